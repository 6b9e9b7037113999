// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/graph.h"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace graphsmith {

bool Node::structurally_equal(const Node& other) const {
  if (id != other.id || op != other.op || attrs != other.attrs || inputs != other.inputs ||
      type != other.type || fused != other.fused || value.has_value() != other.value.has_value()) {
    return false;
  }
  return !value || value->identical(*other.value);
}

const Node* Graph::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

Node* Graph::find(const std::string& id) {
  for (auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<const Node*> Graph::nodes_with_op(std::string_view op) const {
  std::vector<const Node*> out;
  for (const auto& n : nodes) {
    if (n.op == op) out.push_back(&n);
  }
  return out;
}

std::vector<std::string> Graph::input_names() const {
  std::vector<std::string> names;
  for (const auto* n : nodes_with_op("Input")) names.push_back(n->id);
  return names;
}

std::vector<std::string> Graph::weight_names() const {
  std::vector<std::string> names;
  for (const auto* n : nodes_with_op("Weight")) names.push_back(n->id);
  return names;
}

std::unordered_map<std::string, std::vector<std::string>> Graph::consumers() const {
  std::unordered_map<std::string, std::vector<std::string>> out;
  for (const auto& n : nodes) {
    out[n.id];
    for (const auto& in : n.inputs) out[in.node].push_back(n.id);
  }
  return out;
}

void Graph::sort_topologically() {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i].id] = i;
  std::vector<int> pending(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> users(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& in : nodes[i].inputs) {
      auto it = index.find(in.node);
      if (it == index.end()) throw ShapeMismatch("dangling reference to '" + in.node + "'");
      ++pending[i];
      users[it->second].push_back(i);
    }
  }
  // Kahn's algorithm, always taking the lowest original position first so
  // that an already-sorted graph is left unchanged.
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (pending[i] == 0) ready.insert(i);
  }
  std::vector<Node> sorted;
  sorted.reserve(nodes.size());
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    sorted.push_back(nodes[i]);
    for (auto u : users[i]) {
      if (--pending[u] == 0) ready.insert(u);
    }
  }
  if (sorted.size() != nodes.size()) throw ShapeMismatch("graph contains a cycle");
  nodes = std::move(sorted);
}

bool Graph::structurally_equal(const Graph& other) const {
  if (nodes.size() != other.nodes.size() || outputs != other.outputs) return false;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].structurally_equal(other.nodes[i])) return false;
  }
  return true;
}

std::string Graph::fresh_id(const std::string& prefix) const {
  std::set<std::string> used;
  for (const auto& n : nodes) used.insert(n.id);
  for (std::size_t i = nodes.size();; ++i) {
    std::string id = prefix + std::to_string(i);
    if (!used.count(id)) return id;
  }
}

TensorType infer_fused(const std::vector<FusedStep>& steps, const TensorType& input) {
  TensorType t = input;
  for (const auto& s : steps) {
    const TensorType in[] = {t};
    t = kernel(s.op).infer(in, s.attrs);
  }
  return t;
}

void check_types(const Graph& graph) {
  std::unordered_map<std::string, const Node*> seen;
  for (const auto& n : graph.nodes) {
    std::vector<TensorType> in;
    for (const auto& ref : n.inputs) {
      auto it = seen.find(ref.node);
      if (it == seen.end()) {
        throw ShapeMismatch(n.id + ": input '" + ref.node + "' is not defined before use");
      }
      in.push_back(it->second->type);
    }
    TensorType got;
    if (is_leaf_op(n.op)) {
      got = n.type;
      if (n.value && (n.value->dtype() != n.type.dtype || n.value->shape() != n.type.shape)) {
        throw ShapeMismatch(n.id + ": payload type differs from declared " + type_to_string(n.type));
      }
    } else if (n.op == "Fused") {
      if (in.size() != 1 || n.fused.empty()) throw ShapeMismatch(n.id + ": malformed fused node");
      got = infer_fused(n.fused, in[0]);
    } else {
      got = kernel(n.op).infer(in, n.attrs);
    }
    if (got != n.type) {
      throw ShapeMismatch(n.id + " (" + n.op + "): inferred " + type_to_string(got) +
                          " but declared " + type_to_string(n.type));
    }
    seen[n.id] = &n;
  }
  for (const auto& out : graph.outputs) {
    if (!seen.count(out.node)) throw ShapeMismatch("graph output '" + out.node + "' is undefined");
  }
}

}  // namespace graphsmith
