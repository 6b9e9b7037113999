// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/passes.h"

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "graphsmith/kernels.h"

namespace graphsmith {

void FaultRegistry::register_fault(Fault f) {
  if (find(f.id)) throw DuplicateFaultId("fault id '" + f.id + "' already registered");
  faults_.push_back(std::move(f));
}

const Fault* FaultRegistry::find(std::string_view id) const {
  for (const auto& f : faults_) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const FaultRegistry& standard_faults() {
  static const FaultRegistry reg = [] {
    FaultRegistry r;
    r.register_fault({"F1", "AlgebraicSimplify", "reorders floor(a / b) * c into floor(a * c / b)"});
    r.register_fault({"F2", "AlgebraicSimplify",
                      "MatMul scale hoisting takes any one-element operand as the scalar factor"});
    r.register_fault({"F3", "ElementwiseFuse", "fuses across Cast and runs the chain in the head dtype"});
    return r;
  }();
  return reg;
}

FaultSet parse_faults(std::string_view list) {
  FaultSet out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string id(list.substr(pos, comma - pos));
    if (!id.empty()) {
      if (!standard_faults().find(id)) throw UnknownFault("unknown fault '" + id + "'");
      out.insert(id);
    }
    pos = comma + 1;
  }
  return out;
}

namespace {

constexpr std::int64_t kFoldLimit = 1 << 16;

const Node& producer(const Graph& g, const NodeRef& r) { return *g.find(r.node); }

void replace_uses(Graph& g, const std::string& old_id, const NodeRef& to) {
  for (auto& n : g.nodes) {
    for (auto& in : n.inputs) {
      if (in.node == old_id) in = to;
    }
  }
  for (auto& out : g.outputs) {
    if (out.node == old_id) out = to;
  }
}

bool is_graph_output(const Graph& g, const std::string& id) {
  return std::any_of(g.outputs.begin(), g.outputs.end(), [&](const NodeRef& r) { return r.node == id; });
}

bool constant_equal_to(const Node& n, double v) {
  if (n.op != "Constant" || !n.value) return false;
  const auto vals = n.value->values();
  return std::all_of(vals.begin(), vals.end(), [v](double x) { return x == v; });
}

// For a binary node, the operand that is not the identity element `v`,
// provided dropping the other operand leaves the type unchanged.
const NodeRef* identity_operand(const Graph& g, const Node& n, double v, bool either_side) {
  const Node& a = producer(g, n.inputs[0]);
  const Node& b = producer(g, n.inputs[1]);
  if (constant_equal_to(b, v) && a.type == n.type) return &n.inputs[0];
  if (either_side && constant_equal_to(a, v) && b.type == n.type) return &n.inputs[1];
  return nullptr;
}

struct ScaleSplit {
  NodeRef scale;
  NodeRef matrix;
};

// Splits a Mul or Div feeding a MatMul into scalar factor and matrix. The
// divisor is the only candidate factor of a Div.
std::optional<ScaleSplit> split_scale(const Graph& g, const Node& op, bool buggy) {
  const NodeRef& p = op.inputs[0];
  const NodeRef& q = op.inputs[1];
  const Node& pn = producer(g, p);
  const Node& qn = producer(g, q);
  const bool commutes = op.op == "Mul";
  if (buggy) {
    auto one = [](const Node& n) { return num_elements(n.type.shape) == 1; };
    if (one(qn)) return ScaleSplit{q, p};
    if (commutes && one(pn)) return ScaleSplit{p, q};
    return std::nullopt;
  }
  if (qn.type.shape.empty() && pn.type == op.type) return ScaleSplit{q, p};
  if (commutes && pn.type.shape.empty() && qn.type == op.type) return ScaleSplit{p, q};
  return std::nullopt;
}

std::vector<FusedStep> steps_of(const Node& n) {
  if (n.op == "Fused") return n.fused;
  return {FusedStep{n.op, n.attrs, n.type}};
}

bool fusible(const Node& n) {
  if (n.op == "Fused") return true;
  return has_kernel(n.op) && !is_leaf_op(n.op) && kernel(n.op).elementwise_unary;
}

// Buggy fusion: drops every Cast, runs the rest in the head dtype and casts
// once at the end.
std::vector<FusedStep> strip_casts(const std::vector<FusedStep>& steps, const TensorType& head, DType tail) {
  std::vector<FusedStep> out;
  TensorType t = head;
  for (const auto& s : steps) {
    if (s.op == "Cast") continue;
    FusedStep step = s;
    try {
      const TensorType in[] = {t};
      step.type = kernel(s.op).infer(in, s.attrs);
    } catch (const std::exception&) {
      // Leave the stale type in place; the post-pass type check reports it.
    }
    t = step.type;
    out.push_back(std::move(step));
  }
  if (t.dtype != tail) {
    out.push_back(FusedStep{"Cast", {{"to", static_cast<std::int64_t>(tail)}}, TensorType{tail, t.shape}});
  }
  return out;
}

}  // namespace

bool constant_fold(Graph& g, const FaultSet&) {
  bool changed = false;
  std::unordered_map<std::string, const Node*> by_id;
  for (auto& n : g.nodes) {
    if (!is_leaf_op(n.op) && !n.inputs.empty() && num_elements(n.type.shape) <= kFoldLimit) {
      bool all_const = true;
      std::vector<const Tensor*> args;
      for (const auto& in : n.inputs) {
        const Node* p = by_id.at(in.node);
        all_const = all_const && p->op == "Constant" && p->value;
        if (all_const) args.push_back(&*p->value);
      }
      if (all_const) {
        Tensor v;
        if (n.op == "Fused") {
          v = *args[0];
          for (const auto& s : n.fused) {
            const Tensor* one[] = {&v};
            v = kernel(s.op).compute(one, s.attrs);
          }
        } else {
          v = kernel(n.op).compute(args, n.attrs);
        }
        n.op = "Constant";
        n.inputs.clear();
        n.attrs.clear();
        n.fused.clear();
        n.value = std::move(v);
        changed = true;
      }
    }
    by_id[n.id] = &n;
  }
  return changed;
}

bool algebraic_simplify(Graph& g, const FaultSet& faults) {
  const bool f1 = faults.count("F1") > 0;
  const bool f2 = faults.count("F2") > 0;
  const auto consumers = g.consumers();
  auto single_use = [&](const std::string& id) {
    auto it = consumers.find(id);
    return it != consumers.end() && it->second.size() == 1 && !is_graph_output(g, id);
  };

  std::vector<Node> added;
  std::unordered_set<std::string> taken;
  for (const auto& n : g.nodes) taken.insert(n.id);
  auto fresh = [&](const std::string& base) {
    for (int i = 0;; ++i) {
      std::string id = base + ".s" + std::to_string(i);
      if (taken.insert(id).second) return id;
    }
  };

  bool changed = false;
  for (std::size_t idx = 0; idx < g.nodes.size() && !changed; ++idx) {
    Node& n = g.nodes[idx];
    if (consumers.at(n.id).empty() && !is_graph_output(g, n.id)) continue;  // dead, left for DeadNodeElim
    const NodeRef* keep = nullptr;
    if (n.op == "Mul") keep = identity_operand(g, n, 1.0, true);
    else if (n.op == "Add") keep = identity_operand(g, n, 0.0, true);
    else if (n.op == "Sub") keep = identity_operand(g, n, 0.0, false);
    else if (n.op == "Div") keep = identity_operand(g, n, 1.0, false);
    else if (n.op == "Neg") {
      const Node& p = producer(g, n.inputs[0]);
      if (p.op == "Neg") keep = &p.inputs[0];
    }
    if (keep) {
      const NodeRef to = *keep;
      replace_uses(g, n.id, to);
      changed = true;
      break;
    }

    if (f1 && n.op == "Mul") {
      // floor(a / b) * c  ->  floor(a * c / b)
      for (std::size_t side = 0; side < 2; ++side) {
        const Node& fl = producer(g, n.inputs[side]);
        if (fl.op != "Floor" && fl.op != "Ceil") continue;
        const Node& div = producer(g, fl.inputs[0]);
        if (div.op != "Div") continue;
        const NodeRef a = div.inputs[0], b = div.inputs[1], c = n.inputs[1 - side];
        Node mul{.id = fresh(n.id), .op = "Mul", .inputs = {a, c}};
        Node quo{.id = fresh(n.id), .op = "Div", .inputs = {NodeRef{mul.id, 0}, b}};
        try {
          const TensorType mi[] = {producer(g, a).type, producer(g, c).type};
          mul.type = kernel("Mul").infer(mi, {});
          const TensorType di[] = {mul.type, producer(g, b).type};
          quo.type = kernel("Div").infer(di, {});
        } catch (const ShapeMismatch&) {
          continue;
        }
        if (quo.type != n.type) continue;
        n.op = fl.op;
        n.inputs = {NodeRef{quo.id, 0}};
        added.push_back(std::move(mul));
        added.push_back(std::move(quo));
        changed = true;
        break;
      }
      if (changed) break;
    }

    if (n.op == "MatMul") {
      for (std::size_t side = 0; side < 2 && !changed; ++side) {
        const Node& scaled = producer(g, n.inputs[side]);
        if ((scaled.op != "Mul" && scaled.op != "Div") || !single_use(scaled.id)) continue;
        auto split = split_scale(g, scaled, f2);
        if (!split) continue;
        // (s * A) @ B  ->  s * (A @ B);  (A / s) @ B  ->  (A @ B) / s
        Node mm = n;
        mm.id = fresh(n.id);
        mm.inputs[side] = split->matrix;
        n.op = scaled.op;
        n.attrs.clear();
        if (scaled.op == "Mul") n.inputs = {split->scale, NodeRef{mm.id, 0}};
        else n.inputs = {NodeRef{mm.id, 0}, split->scale};
        added.push_back(std::move(mm));
        changed = true;
      }
    }
  }
  for (auto& a : added) g.nodes.push_back(std::move(a));
  return changed;
}

bool elementwise_fuse(Graph& g, const FaultSet& faults) {
  const bool f3 = faults.count("F3") > 0;
  const auto consumers = g.consumers();
  for (auto& u : g.nodes) {
    if (u.op == "Fused" || !fusible(u) || u.inputs.size() != 1) continue;
    if (u.op == "Cast" && !f3) continue;
    const Node& p = producer(g, u.inputs[0]);
    if (!fusible(p) || is_graph_output(g, p.id)) continue;
    auto it = consumers.find(p.id);
    if (it == consumers.end() || it->second.size() != 1) continue;
    std::vector<FusedStep> steps = steps_of(p);
    const bool crosses_cast = std::any_of(steps.begin(), steps.end(), [](const FusedStep& s) { return s.op == "Cast"; });
    if (crosses_cast && !f3) continue;
    steps.push_back(FusedStep{u.op, u.attrs, u.type});
    const NodeRef head = p.inputs[0];
    if (f3 && (crosses_cast || u.op == "Cast")) steps = strip_casts(steps, producer(g, head).type, u.type.dtype);
    u.op = "Fused";
    u.attrs.clear();
    u.fused = std::move(steps);
    u.inputs = {head};
    // p is now dead; DeadNodeElim removes it.
    return true;
  }
  return false;
}

bool dead_node_elim(Graph& g, const FaultSet&) {
  std::unordered_set<std::string> live;
  std::vector<std::string> stack;
  for (const auto& o : g.outputs) stack.push_back(o.node);
  std::unordered_map<std::string, const Node*> by_id;
  for (const auto& n : g.nodes) by_id[n.id] = &n;
  while (!stack.empty()) {
    std::string id = std::move(stack.back());
    stack.pop_back();
    if (!live.insert(id).second) continue;
    for (const auto& in : by_id.at(id)->inputs) stack.push_back(in.node);
  }
  const auto before = g.nodes.size();
  std::erase_if(g.nodes, [&](const Node& n) { return n.op != "Input" && !live.count(n.id); });
  return g.nodes.size() != before;
}

Graph optimize(const Graph& input, OptLevel level, const FaultSet& faults, PipelineStats* stats) {
  Graph g = input;
  if (level == OptLevel::kO0) return g;
  using PassFn = bool (*)(Graph&, const FaultSet&);
  static const std::pair<const char*, PassFn> kPipeline[] = {
      {"ConstantFold", constant_fold},
      {"AlgebraicSimplify", algebraic_simplify},
      {"ElementwiseFuse", elementwise_fuse},
      {"DeadNodeElim", dead_node_elim},
  };
  for (int round = 0; round < kMaxPipelineRounds; ++round) {
    bool changed = false;
    for (const auto& [name, fn] : kPipeline) {
      // Each pass runs to its own fixpoint before the next one starts.
      for (int guard = 0; guard < 1000; ++guard) {
        bool c = false;
        try {
          c = fn(g, faults);
          if (c) {
            g.sort_topologically();
            check_types(g);
          }
        } catch (const std::exception& e) {
          throw PassCrash(name, e.what());
        }
        if (!c) break;
        changed = true;
        if (stats) stats->applied.push_back(name);
      }
    }
    if (stats) stats->rounds = round + 1;
    if (!changed) break;
  }
  return g;
}

}  // namespace graphsmith
