// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Hand-built graphs for tests; node types come from kernel inference.

#ifndef GRAPHSMITH_TESTS_GRAPH_BUILDER_H_
#define GRAPHSMITH_TESTS_GRAPH_BUILDER_H_

#include <string>
#include <vector>

#include "graphsmith/graph.h"
#include "graphsmith/kernels.h"

namespace graphsmith::testing {

struct Builder {
  Graph g;

  NodeRef input(const std::string& id, DType dtype, Shape shape) {
    g.nodes.push_back(Node{.id = id, .op = "Input", .type = {dtype, std::move(shape)}});
    return {id, 0};
  }

  NodeRef weight(const std::string& id, Tensor value) {
    g.nodes.push_back(Node{.id = id, .op = "Weight", .type = {value.dtype(), value.shape()}, .value = value});
    return {id, 0};
  }

  NodeRef constant(const std::string& id, Tensor value) {
    g.nodes.push_back(Node{.id = id, .op = "Constant", .type = {value.dtype(), value.shape()}, .value = value});
    return {id, 0};
  }

  NodeRef op(const std::string& id, const std::string& name, std::vector<NodeRef> ins, Attrs attrs = {}) {
    std::vector<TensorType> types;
    for (const auto& r : ins) types.push_back(g.find(r.node)->type);
    Node n{.id = id, .op = name, .attrs = attrs, .inputs = std::move(ins)};
    n.type = kernel(name).infer(types, attrs);
    g.nodes.push_back(std::move(n));
    return {id, 0};
  }

  Builder& output(const NodeRef& r) {
    g.outputs.push_back(r);
    return *this;
  }
};

inline Tensor f32(std::vector<double> v, Shape shape = {}) {
  if (shape.empty() && v.size() != 1) shape = {static_cast<std::int64_t>(v.size())};
  return Tensor(DType::kF32, std::move(shape), std::move(v));
}

}  // namespace graphsmith::testing

#endif  // GRAPHSMITH_TESTS_GRAPH_BUILDER_H_
