// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GRAPHSMITH_GRAPH_H_
#define GRAPHSMITH_GRAPH_H_

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphsmith/kernels.h"
#include "graphsmith/tensor.h"

namespace graphsmith {

struct NodeRef {
  std::string node;
  int slot = 0;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

// One stage of a fused elementwise chain.
struct FusedStep {
  std::string op;
  Attrs attrs;
  TensorType type;

  friend bool operator==(const FusedStep&, const FusedStep&) = default;
};

struct Node {
  std::string id;
  std::string op;
  Attrs attrs;
  std::vector<NodeRef> inputs;
  TensorType type;
  std::optional<Tensor> value;   // payload of Weight / Constant nodes
  std::vector<FusedStep> fused;  // stages of a "Fused" node

  bool structurally_equal(const Node& other) const;
};

// A concrete computation graph with nodes stored in topological order.
class Graph {
 public:
  std::vector<Node> nodes;
  std::vector<NodeRef> outputs;

  const Node* find(const std::string& id) const;
  Node* find(const std::string& id);

  std::vector<const Node*> nodes_with_op(std::string_view op) const;
  std::vector<std::string> input_names() const;
  std::vector<std::string> weight_names() const;

  // Consumers of each node id.
  std::unordered_map<std::string, std::vector<std::string>> consumers() const;

  // Rebuilds the node order topologically; throws if a cycle or dangling
  // reference exists.
  void sort_topologically();

  bool structurally_equal(const Graph& other) const;

  // Fresh node id not yet used in the graph.
  std::string fresh_id(const std::string& prefix = "n") const;
};

// Re-runs type inference over every node and compares against the declared
// types. Throws ShapeMismatch on the first disagreement.
void check_types(const Graph& graph);

// Type of a fused chain given the head input type.
TensorType infer_fused(const std::vector<FusedStep>& steps, const TensorType& input);

}  // namespace graphsmith

#endif  // GRAPHSMITH_GRAPH_H_
