// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Reference interpreter and reverse-mode autodiff over concrete graphs.

#ifndef GRAPHSMITH_INTERPRETER_H_
#define GRAPHSMITH_INTERPRETER_H_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphsmith/graph.h"

namespace graphsmith {

using TensorMap = std::map<std::string, Tensor>;

class NonScalarLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DetachedLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Record of executed primitives. Value slots are indices into an arena; leaf
// slots (graph inputs and weights) accumulate gradients during backward().
class Tape {
 public:
  struct Entry {
    std::string op;
    Attrs attrs;
    std::vector<int> inputs;
    int output;
  };

  int add_leaf(const std::string& name, Tensor value);
  // Constant slot that never receives gradient.
  int add_constant(Tensor value);
  // Runs `op` through its reference kernel and records it.
  int apply(const std::string& op, const Attrs& attrs, std::vector<int> inputs);

  const Tensor& value(int slot) const { return values_[static_cast<std::size_t>(slot)]; }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::map<std::string, int>& leaves() const { return leaves_; }

  // Gradient of the rank-0 tensor at `loss` w.r.t. every leaf (f64 buffers
  // shaped like the leaves).
  std::map<std::string, std::vector<double>> backward(int loss, bool use_proxy = true,
                                                      ProxyCounter* counter = nullptr) const;

  // Backward pass seeded with explicit cotangents on arbitrary slots.
  std::map<std::string, std::vector<double>> backward_seeded(
      const std::map<int, std::vector<double>>& seeds, bool use_proxy = true,
      ProxyCounter* counter = nullptr) const;

  // Re-executes every entry; true iff all outputs match bit for bit.
  bool replay_matches() const;

 private:
  std::vector<Tensor> values_;
  std::vector<bool> is_leaf_;
  std::vector<Entry> entries_;
  std::map<std::string, int> leaves_;
};

struct ExecResult {
  std::map<std::string, Tensor> values;  // output of every node
  std::map<std::string, int> slots;      // node id -> tape slot when recorded
  std::optional<Tape> tape;

  // Values of the graph outputs, in order.
  std::vector<Tensor> outputs(const Graph& graph) const;
};

// Executes `graph` in topological order. Input nodes are bound from `inputs`,
// Weight nodes from `weights` (falling back to the node payload). NaN/Inf
// propagate per IEEE-754. Throws ShapeMismatch when a node's computed type
// differs from its declared type, UnknownOp for unknown operators.
//
// `stop_at_nonfinite` halts after the first node producing NaN/Inf; its id is
// then reported in `first_nonfinite`.
struct ExecOptions {
  bool record = false;
  bool stop_at_nonfinite = false;
};

ExecResult execute(const Graph& graph, const TensorMap& inputs, const TensorMap& weights,
                   const ExecOptions& options = {});

// Id of the first node (topological order) whose output holds NaN/Inf.
std::optional<std::string> first_nonfinite(const Graph& graph, const ExecResult& result);

// Maximum relative error between the autodiff gradient of op `op` at `point`
// and central finite differences with step `h`. The scalar objective is the
// inner product of the op output with a fixed pseudo-random cotangent.
// Throws RegionExcluded when any element lies in a proxy region.
class RegionExcluded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double check_gradient(const std::string& op, const Attrs& attrs, const std::vector<Tensor>& point,
                      double h);

}  // namespace graphsmith

#endif  // GRAPHSMITH_INTERPRETER_H_
