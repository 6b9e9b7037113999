// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/valuesearch.h"

#include <chrono>
#include <cmath>
#include <map>

namespace graphsmith {

double loss_from_inequality(const TensorInequality& pred, std::span<const Tensor* const> args,
                            std::vector<std::vector<double>>* grads) {
  Shape shape;
  for (int slot : pred.operands) shape = broadcast_shapes(shape, args[static_cast<std::size_t>(slot)]->shape());
  std::vector<std::vector<std::int64_t>> maps;
  for (int slot : pred.operands) maps.push_back(broadcast_index_map(shape, args[static_cast<std::size_t>(slot)]->shape()));
  if (grads) {
    grads->assign(args.size(), {});
    for (int slot : pred.operands) {
      (*grads)[static_cast<std::size_t>(slot)].assign(static_cast<std::size_t>(args[static_cast<std::size_t>(slot)]->size()), 0.0);
    }
  }
  const std::size_t k = pred.operands.size();
  std::vector<double> v(k), d(k);
  const double slack = pred.strict ? kStrictSlack : 0.0;
  double loss = 0.0;
  const auto n = static_cast<std::size_t>(num_elements(shape));
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t j = 0; j < k; ++j) v[j] = (*args[static_cast<std::size_t>(pred.operands[j])])[maps[j][e]];
    const double f = pred.f(v) + slack;
    if (std::isnan(f)) {
      // Undefined predicate value: count as a violation without a gradient.
      loss += 1.0;
      continue;
    }
    if (f <= 0.0) continue;
    loss += f;
    if (!grads) continue;
    pred.df(v, d);
    for (std::size_t j = 0; j < k; ++j) {
      (*grads)[static_cast<std::size_t>(pred.operands[j])][static_cast<std::size_t>(maps[j][e])] += d[j];
    }
  }
  return loss;
}

std::string_view search_mode_name(SearchMode m) {
  switch (m) {
    case SearchMode::kGrad: return "grad";
    case SearchMode::kGradNoProxy: return "grad-noproxy";
    case SearchMode::kSample: return "sample";
  }
  return "grad";
}

std::optional<SearchMode> parse_search_mode(std::string_view s) {
  if (s == "grad") return SearchMode::kGrad;
  if (s == "grad-noproxy") return SearchMode::kGradNoProxy;
  if (s == "sample") return SearchMode::kSample;
  return std::nullopt;
}

const std::vector<TensorInequality>& vulnerabilities_of(std::string_view op) {
  static const std::map<std::string, std::vector<TensorInequality>, std::less<>> table = [] {
    std::map<std::string, std::vector<TensorInequality>, std::less<>> t;
    for (const OpSpec* s : standard_registry().all()) {
      if (!s->vulnerabilities.empty() && !t.count(s->kernel)) t[s->kernel] = s->vulnerabilities;
    }
    return t;
  }();
  static const std::vector<TensorInequality> kNone;
  auto it = table.find(op);
  return it == table.end() ? kNone : it->second;
}

namespace {

double draw(DType dtype, double lo, double hi, Rng& rng) {
  if (dtype == DType::kBool) return rng.coin(0.5) ? 1.0 : 0.0;
  if (is_int(dtype)) return static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
  return rng.uniform_real(lo, hi);
}

Tensor random_tensor(const TensorType& t, double lo, double hi, Rng& rng) {
  std::vector<double> data(static_cast<std::size_t>(num_elements(t.shape)));
  for (double& v : data) v = draw(t.dtype, lo, hi, rng);
  return Tensor(t.dtype, t.shape, std::move(data));
}

struct Adam {
  std::vector<double> m, v;
  int t = 0;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

void random_leaves(const Graph& graph, double lo, double hi, Rng& rng, TensorMap& inputs, TensorMap& weights) {
  for (const Node& n : graph.nodes) {
    if (n.op == "Input") inputs[n.id] = random_tensor(n.type, lo, hi, rng);
    else if (n.op == "Weight") weights[n.id] = random_tensor(n.type, lo, hi, rng);
  }
}

bool numerically_valid(const Graph& graph, const TensorMap& inputs, const TensorMap& weights) {
  ExecResult r = execute(graph, inputs, weights);
  return !first_nonfinite(graph, r).has_value();
}

SearchResult search_values(const Graph& graph, const SearchOptions& options, Rng& rng) {
  TensorMap inputs, weights;
  random_leaves(graph, options.init_lo, options.init_hi, rng, inputs, weights);
  return search_values_from(graph, options, rng, std::move(inputs), std::move(weights));
}

SearchResult sample_baseline(const Graph& graph, Rng& rng, int tries) {
  SearchOptions o;
  o.mode = SearchMode::kSample;
  o.budget_ms = 1e18;
  o.max_steps = tries;
  return search_values(graph, o, rng);
}

SearchResult search_values_from(const Graph& graph, const SearchOptions& options, Rng& rng, TensorMap inputs,
                                TensorMap weights) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(Clock::now() - start).count(); };

  SearchResult res;
  res.inputs = std::move(inputs);
  res.weights = std::move(weights);
  auto leaf = [&](const std::string& name) -> Tensor& {
    auto it = res.inputs.find(name);
    return it != res.inputs.end() ? it->second : res.weights.at(name);
  };

  int iterations = 0;
  std::map<std::string, Adam> adam;
  std::string last_target;
  const bool use_proxy = options.mode != SearchMode::kGradNoProxy;

  while (true) {
    if (options.max_steps && iterations >= *options.max_steps) break;
    if (iterations > 0 && elapsed_ms() >= options.budget_ms) break;
    ++iterations;

    if (options.mode == SearchMode::kSample) {
      ++res.steps;
      if (iterations > 1) {
        res.inputs.clear();
        res.weights.clear();
        random_leaves(graph, options.init_lo, options.init_hi, rng, res.inputs, res.weights);
      }
      if (numerically_valid(graph, res.inputs, res.weights)) {
        res.success = true;
        break;
      }
      continue;
    }

    ExecResult run = execute(graph, res.inputs, res.weights, {.record = true});
    // First node with an exceptional output, and its first positive loss.
    const Node* target = nullptr;
    const TensorInequality* pred = nullptr;
    std::vector<std::vector<double>> op_grads;
    if (auto bad = first_nonfinite(graph, run)) {
      target = graph.find(*bad);
      std::vector<const Tensor*> args;
      for (const NodeRef& r : target->inputs) args.push_back(&run.values.at(r.node));
      for (const TensorInequality& p : vulnerabilities_of(target->op)) {
        std::vector<std::vector<double>> g;
        if (loss_from_inequality(p, args, &g) > 0.0) {
          pred = &p;
          op_grads = std::move(g);
          break;
        }
      }
    } else {
      res.success = true;
      break;
    }

    if (!pred) {
      // Exceptional value without a violated predicate (e.g. overflow): restart.
      res.inputs.clear();
      res.weights.clear();
      random_leaves(graph, options.init_lo, options.init_hi, rng, res.inputs, res.weights);
      adam.clear();
      continue;
    }

    const std::string key = target->id + "/" + pred->text;
    if (key != last_target) {
      adam.clear();
      last_target = key;
    }

    std::map<int, std::vector<double>> seeds;
    for (std::size_t i = 0; i < target->inputs.size(); ++i) {
      if (op_grads[i].empty()) continue;
      const int slot = run.slots.at(target->inputs[i].node);
      auto& dst = seeds[slot];
      if (dst.empty()) dst = op_grads[i];
      else for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += op_grads[i][j];
    }
    auto grads = run.tape->backward_seeded(seeds, use_proxy);

    bool any_grad = false;
    for (auto& [name, g] : grads) {
      if (!is_float(leaf(name).dtype())) continue;
      for (double& x : g) {
        if (!std::isfinite(x)) x = 0.0;
        any_grad = any_grad || x != 0.0;
      }
    }
    if (!any_grad) {
      res.inputs.clear();
      res.weights.clear();
      random_leaves(graph, options.init_lo, options.init_hi, rng, res.inputs, res.weights);
      adam.clear();
      continue;
    }

    ++res.steps;
    for (auto& [name, g] : grads) {
      Tensor& x = leaf(name);
      if (!is_float(x.dtype())) continue;
      Adam& st = adam[name];
      if (st.m.empty()) {
        st.m.assign(g.size(), 0.0);
        st.v.assign(g.size(), 0.0);
      }
      ++st.t;
      const double c1 = 1.0 - std::pow(kBeta1, st.t), c2 = 1.0 - std::pow(kBeta2, st.t);
      std::vector<double> next(x.values().begin(), x.values().end());
      for (std::size_t j = 0; j < g.size(); ++j) {
        // Lazy update: entries outside the active loss keep their value and moments.
        if (g[j] == 0.0) continue;
        st.m[j] = kBeta1 * st.m[j] + (1 - kBeta1) * g[j];
        st.v[j] = kBeta2 * st.v[j] + (1 - kBeta2) * g[j] * g[j];
        next[j] -= options.learning_rate * (st.m[j] / c1) / (std::sqrt(st.v[j] / c2) + kAdamEps);
        if (!std::isfinite(next[j])) next[j] = draw(x.dtype(), options.init_lo, options.init_hi, rng);
      }
      x = Tensor(x.dtype(), x.shape(), std::move(next));
    }
  }

  // Never report success without an independent re-check.
  if (res.success) res.success = numerically_valid(graph, res.inputs, res.weights);
  res.elapsed_ms = elapsed_ms();
  return res;
}

}  // namespace graphsmith
