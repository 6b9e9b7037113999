// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/interpreter.h"

#include <cmath>
#include <stdexcept>

#include "graphsmith/rng.h"

namespace graphsmith {

int Tape::add_leaf(const std::string& name, Tensor value) {
  const int slot = static_cast<int>(values_.size());
  values_.push_back(std::move(value));
  is_leaf_.push_back(true);
  leaves_[name] = slot;
  return slot;
}

int Tape::add_constant(Tensor value) {
  values_.push_back(std::move(value));
  is_leaf_.push_back(false);
  return static_cast<int>(values_.size()) - 1;
}

int Tape::apply(const std::string& op, const Attrs& attrs, std::vector<int> inputs) {
  std::vector<const Tensor*> args;
  for (int s : inputs) args.push_back(&values_[static_cast<std::size_t>(s)]);
  Tensor out = kernel(op).compute(args, attrs);
  values_.push_back(std::move(out));
  is_leaf_.push_back(false);
  const int slot = static_cast<int>(values_.size()) - 1;
  entries_.push_back({op, attrs, std::move(inputs), slot});
  return slot;
}

std::map<std::string, std::vector<double>> Tape::backward(int loss, bool use_proxy,
                                                          ProxyCounter* counter) const {
  if (loss < 0 || loss >= static_cast<int>(values_.size())) {
    throw DetachedLoss("loss slot " + std::to_string(loss) + " is not on the tape");
  }
  if (value(loss).rank() != 0) {
    throw NonScalarLoss("loss has shape " + shape_to_string(value(loss).shape()));
  }
  // Reachability: the loss must depend on at least one leaf.
  std::vector<bool> reaches(values_.size(), false);
  for (std::size_t i = 0; i < values_.size(); ++i) reaches[i] = is_leaf_[i];
  for (const auto& e : entries_) {
    for (int s : e.inputs) {
      if (reaches[static_cast<std::size_t>(s)]) reaches[static_cast<std::size_t>(e.output)] = true;
    }
  }
  if (!reaches[static_cast<std::size_t>(loss)]) {
    throw DetachedLoss("loss does not depend on any leaf");
  }
  return backward_seeded({{loss, {1.0}}}, use_proxy, counter);
}

std::map<std::string, std::vector<double>> Tape::backward_seeded(
    const std::map<int, std::vector<double>>& seeds, bool use_proxy, ProxyCounter* counter) const {
  std::vector<std::vector<double>> grads(values_.size());
  for (const auto& [slot, g] : seeds) grads[static_cast<std::size_t>(slot)] = g;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const auto& g_out = grads[static_cast<std::size_t>(it->output)];
    if (g_out.empty()) continue;
    const Kernel& k = kernel(it->op);
    if (!k.vjp) continue;
    std::vector<const Tensor*> args;
    for (int s : it->inputs) args.push_back(&values_[static_cast<std::size_t>(s)]);
    Grads g_in = k.vjp({args, value(it->output), g_out, it->attrs, use_proxy, counter});
    for (std::size_t i = 0; i < it->inputs.size(); ++i) {
      if (g_in[i].empty()) continue;
      auto& dst = grads[static_cast<std::size_t>(it->inputs[i])];
      if (dst.empty()) {
        dst = std::move(g_in[i]);
      } else {
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += g_in[i][j];
      }
    }
  }
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, slot] : leaves_) {
    auto g = grads[static_cast<std::size_t>(slot)];
    if (g.empty()) g.assign(static_cast<std::size_t>(value(slot).size()), 0.0);
    out[name] = std::move(g);
  }
  return out;
}

bool Tape::replay_matches() const {
  for (const auto& e : entries_) {
    std::vector<const Tensor*> args;
    for (int s : e.inputs) args.push_back(&values_[static_cast<std::size_t>(s)]);
    if (!kernel(e.op).compute(args, e.attrs).identical(value(e.output))) return false;
  }
  return true;
}

std::vector<Tensor> ExecResult::outputs(const Graph& graph) const {
  std::vector<Tensor> out;
  for (const auto& ref : graph.outputs) out.push_back(values.at(ref.node));
  return out;
}

ExecResult execute(const Graph& graph, const TensorMap& inputs, const TensorMap& weights,
                   const ExecOptions& options) {
  ExecResult result;
  if (options.record) result.tape.emplace();
  for (const auto& n : graph.nodes) {
    Tensor out;
    int slot = -1;
    if (n.op == "Input" || n.op == "Weight") {
      const TensorMap& src = n.op == "Input" ? inputs : weights;
      auto it = src.find(n.id);
      if (it != src.end()) {
        out = it->second;
      } else if (n.value) {
        out = *n.value;
      } else {
        throw std::invalid_argument("no value bound for " + n.op + " '" + n.id + "'");
      }
      if (result.tape) slot = result.tape->add_leaf(n.id, out);
    } else if (n.op == "Constant") {
      if (!n.value) throw std::invalid_argument("constant '" + n.id + "' has no payload");
      out = *n.value;
      if (result.tape) slot = result.tape->add_constant(out);
    } else {
      std::vector<const Tensor*> args;
      std::vector<int> arg_slots;
      for (const auto& ref : n.inputs) {
        auto it = result.values.find(ref.node);
        if (it == result.values.end()) {
          throw ShapeMismatch(n.id + ": input '" + ref.node + "' not yet computed");
        }
        args.push_back(&it->second);
        if (result.tape) arg_slots.push_back(result.slots.at(ref.node));
      }
      if (n.op == "Fused") {
        if (args.size() != 1) throw ShapeMismatch(n.id + ": fused node needs one input");
        Tensor cur = *args[0];
        int cur_slot = arg_slots.empty() ? -1 : arg_slots[0];
        for (const auto& step : n.fused) {
          if (result.tape) {
            cur_slot = result.tape->apply(step.op, step.attrs, {cur_slot});
            cur = result.tape->value(cur_slot);
          } else {
            const Tensor* one[] = {&cur};
            cur = kernel(step.op).compute(one, step.attrs);
          }
        }
        out = std::move(cur);
        slot = cur_slot;
      } else {
        const Kernel& k = kernel(n.op);
        if (static_cast<int>(args.size()) != k.arity) {
          throw ShapeMismatch(n.id + ": " + n.op + " expects " + std::to_string(k.arity) + " inputs");
        }
        if (result.tape) {
          slot = result.tape->apply(n.op, n.attrs, arg_slots);
          out = result.tape->value(slot);
        } else {
          out = k.compute(args, n.attrs);
        }
      }
    }
    if (out.dtype() != n.type.dtype || out.shape() != n.type.shape) {
      throw ShapeMismatch(n.id + " (" + n.op + "): produced " + std::string(dtype_name(out.dtype())) +
                          shape_to_string(out.shape()) + ", declared " + type_to_string(n.type));
    }
    const bool bad = out.has_nonfinite();
    if (result.tape) result.slots[n.id] = slot;
    result.values.emplace(n.id, std::move(out));
    if (bad && options.stop_at_nonfinite) break;
  }
  return result;
}

std::optional<std::string> first_nonfinite(const Graph& graph, const ExecResult& result) {
  for (const auto& n : graph.nodes) {
    auto it = result.values.find(n.id);
    if (it != result.values.end() && it->second.has_nonfinite()) return n.id;
  }
  return std::nullopt;
}

double check_gradient(const std::string& op, const Attrs& attrs, const std::vector<Tensor>& point,
                      double h) {
  const Kernel& k = kernel(op);
  if (!k.vjp) throw std::invalid_argument(op + " is not differentiable");
  if (const auto* proxy = find_proxy(op)) {
    for (double v : point[0].values()) {
      if (proxy->in_region(v, attrs)) {
        throw RegionExcluded(op + ": point lies in proxy region " + proxy->region);
      }
    }
  }
  // Work in f64 so the finite differences are not dominated by rounding.
  std::vector<Tensor> x;
  for (const auto& t : point) {
    const DType dt = is_float(t.dtype()) ? DType::kF64 : t.dtype();
    x.emplace_back(dt, t.shape(), std::vector<double>(t.values().begin(), t.values().end()));
  }
  auto run = [&](const std::vector<Tensor>& args) {
    std::vector<const Tensor*> ptrs;
    for (const auto& t : args) ptrs.push_back(&t);
    return k.compute(ptrs, attrs);
  };
  const Tensor y = run(x);
  Rng rng(0xC0FFEE);
  std::vector<double> cot(static_cast<std::size_t>(y.size()));
  for (auto& c : cot) c = rng.uniform_real(0.5, 1.5);
  auto objective = [&](const Tensor& out) {
    double s = 0.0;
    for (std::int64_t i = 0; i < out.size(); ++i) s += cot[i] * out[i];
    return s;
  };
  std::vector<const Tensor*> ptrs;
  for (const auto& t : x) ptrs.push_back(&t);
  const Grads ad = k.vjp({ptrs, y, cot, attrs, true, nullptr});
  double worst = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (!is_float(x[a].dtype()) || ad[a].empty()) continue;
    for (std::int64_t i = 0; i < x[a].size(); ++i) {
      auto plus = x, minus = x;
      plus[a].mutable_values()[i] += h;
      minus[a].mutable_values()[i] -= h;
      const double fd = (objective(run(plus)) - objective(run(minus))) / (2.0 * h);
      const double g = ad[a][i];
      worst = std::max(worst, std::fabs(g - fd) / std::max(std::fabs(g), 1e-8));
    }
  }
  return worst;
}

}  // namespace graphsmith
