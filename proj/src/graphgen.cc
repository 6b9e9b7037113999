// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/graphgen.h"

#include <algorithm>
#include <deque>
#include <functional>

#include "graphsmith/binning.h"

namespace graphsmith {

using sym::Expr;

int GraphModel::add_placeholder(AbsTensor type) {
  SymNode n;
  n.id = static_cast<int>(nodes.size());
  n.placeholder = true;
  n.type = std::move(type);
  nodes.push_back(std::move(n));
  return nodes.back().id;
}

std::vector<int> GraphModel::placeholders() const {
  std::vector<int> out;
  for (const SymNode& n : nodes) {
    if (n.placeholder) out.push_back(n.id);
  }
  return out;
}

std::vector<int> GraphModel::intermediates() const {
  std::vector<int> out;
  for (const SymNode& n : nodes) out.push_back(n.id);
  return out;
}

int GraphModel::num_ops() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const SymNode& n) { return !n.placeholder; }));
}

std::vector<int> GraphModel::consumers(int id) const {
  std::vector<int> out;
  for (const SymNode& n : nodes) {
    if (std::find(n.inputs.begin(), n.inputs.end(), id) != n.inputs.end()) out.push_back(n.id);
  }
  return out;
}

std::vector<int> GraphModel::topo_order() const {
  std::vector<int> indeg(nodes.size(), 0);
  std::vector<std::vector<int>> succ(nodes.size());
  for (const SymNode& n : nodes) {
    for (int i : n.inputs) {
      succ[static_cast<std::size_t>(i)].push_back(n.id);
      ++indeg[static_cast<std::size_t>(n.id)];
    }
  }
  std::deque<int> ready;
  for (const SymNode& n : nodes) {
    if (indeg[static_cast<std::size_t>(n.id)] == 0) ready.push_back(n.id);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int id = ready.front();
    ready.pop_front();
    order.push_back(id);
    for (int s : succ[static_cast<std::size_t>(id)]) {
      if (--indeg[static_cast<std::size_t>(s)] == 0) ready.push_back(s);
    }
  }
  if (order.size() != nodes.size()) throw std::logic_error("graph model has a cycle");
  return order;
}

bool GraphModel::acyclic() const {
  try {
    topo_order();
    return true;
  } catch (const std::logic_error&) {
    return false;
  }
}

bool GraphModel::connected() const {
  if (nodes.empty()) return true;
  std::vector<std::vector<int>> adj(nodes.size());
  for (const SymNode& n : nodes) {
    for (int i : n.inputs) {
      adj[static_cast<std::size_t>(i)].push_back(n.id);
      adj[static_cast<std::size_t>(n.id)].push_back(i);
    }
  }
  std::vector<bool> seen(nodes.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  std::size_t count = 0;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    ++count;
    for (int j : adj[static_cast<std::size_t>(id)]) {
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        stack.push_back(j);
      }
    }
  }
  return count == nodes.size();
}

std::string GraphModel::describe() const {
  auto name = [this](sym::SymId id) { return store.name(id); };
  std::string out;
  for (int id : topo_order()) {
    const SymNode& n = nodes[static_cast<std::size_t>(id)];
    out += "%" + std::to_string(id) + " = " + (n.placeholder ? std::string("placeholder") : n.spec->name) + "(";
    for (std::size_t i = 0; i < n.inputs.size(); ++i) out += (i ? ", %" : "%") + std::to_string(n.inputs[i]);
    out += ") : " + n.type.to_string(name) + "\n";
  }
  return out;
}

std::vector<Combination> type_match(const std::vector<TypeSig>& pool, const std::vector<Signature>& menu,
                                    std::size_t limit) {
  std::vector<Combination> out;
  for (std::size_t r = 0; r < menu.size() && out.size() < limit; ++r) {
    const auto& slots = menu[r].inputs;
    std::vector<std::vector<int>> options(slots.size());
    bool possible = true;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      for (std::size_t p = 0; p < pool.size(); ++p) {
        if (pool[p] == slots[s]) options[s].push_back(static_cast<int>(p));
      }
      if (options[s].empty()) possible = false;
    }
    if (!possible) continue;
    std::vector<int> picks(slots.size());
    std::function<void(std::size_t)> rec = [&](std::size_t s) {
      if (out.size() >= limit) return;
      if (s == slots.size()) {
        out.push_back({r, picks});
        return;
      }
      for (int p : options[s]) {
        picks[s] = p;
        rec(s + 1);
      }
    };
    rec(0);
  }
  return out;
}

namespace {

Expr numel(const AbsTensor& t) {
  Expr p(1);
  for (const Expr& d : t.shape) p = p * d;
  return p;
}

TypeSig sig_of(const AbsTensor& t) { return {t.dtype, t.rank()}; }

void bin_after_insertion(GraphModel& m, const OpInstance& inst, const std::vector<AbsTensor>& inputs,
                         const std::vector<sym::SymId>& fresh, Rng& rng, const GenOptions& opts) {
  if (opts.bins <= 0) return;
  auto plans = plans_for_insertion(m.store, inst, inputs, fresh, opts.bins);
  apply_binning_all(m.store, plans, rng);
}

}  // namespace

bool solve_insertion(GraphModel& m, const std::vector<sym::Predicate>& extra, const OpSpec& spec,
                     const OpInstance& inst, const std::vector<AbsTensor>& v, std::vector<AbsTensor>* outputs) {
  std::vector<sym::Predicate> c = extra;
  auto req = spec.requires_of(inst, v);
  c.insert(c.end(), req.begin(), req.end());
  auto outs = spec.type_transfer(inst, v);
  for (const AbsTensor& o : outs) {
    for (const Expr& d : o.shape) c.push_back(d >= 1);
    if (o.rank() > 1) c.push_back(numel(o) <= kElementCap);
  }
  if (!m.store.try_add_constraints(c)) return false;
  if (outputs) *outputs = std::move(outs);
  return true;
}

DType row_dtype(const Signature& row) {
  return row.inputs.empty() ? row.outputs.at(0).dtype : row.inputs[0].dtype;
}

bool forward_insert(GraphModel& m, const OpSpec& spec, Rng& rng, const GenOptions& opts) {
  const std::vector<int> live = m.intermediates();
  std::vector<TypeSig> pool;
  for (int id : live) pool.push_back(sig_of(m.nodes[static_cast<std::size_t>(id)].type));
  auto combos = type_match(pool, spec.menu);
  if (!opts.excluded.empty()) {
    std::erase_if(combos, [&](const Combination& c) {
      return opts.excluded.contains({spec.name, row_dtype(spec.menu[c.row])});
    });
  }
  if (combos.empty()) return false;
  // Prefer distinct operands; x - x and friends mostly produce constant zeros.
  std::vector<Combination> distinct;
  for (const Combination& c : combos) {
    std::vector<int> sorted = c.picks;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) distinct.push_back(c);
  }
  if (!distinct.empty()) combos = std::move(distinct);
  const Combination& pick = combos[rng.index(combos.size())];
  OpInstance inst = spec.instantiate(pick.row, m.store, rng);
  std::vector<AbsTensor> v;
  std::vector<int> ids;
  for (int p : pick.picks) {
    ids.push_back(live[static_cast<std::size_t>(p)]);
    v.push_back(m.nodes[static_cast<std::size_t>(ids.back())].type);
  }
  std::vector<AbsTensor> outs;
  if (!solve_insertion(m, {}, spec, inst, v, &outs)) return false;
  SymNode n;
  n.id = static_cast<int>(m.nodes.size());
  n.placeholder = false;
  n.spec = &spec;
  n.inst = inst;
  n.inputs = ids;
  n.type = outs[0];
  m.nodes.push_back(std::move(n));
  bin_after_insertion(m, inst, v, {}, rng, opts);
  return true;
}

bool backward_insert(GraphModel& m, const OpSpec& spec, Rng& rng, const GenOptions& opts) {
  if (!spec.infer_fn) return false;
  std::vector<std::pair<int, std::size_t>> candidates;
  for (int id : m.placeholders()) {
    const TypeSig s = sig_of(m.nodes[static_cast<std::size_t>(id)].type);
    for (std::size_t r = 0; r < spec.menu.size(); ++r) {
      if (opts.excluded.contains({spec.name, row_dtype(spec.menu[r])})) continue;
      if (spec.menu[r].outputs[0] == s) candidates.emplace_back(id, r);
    }
  }
  if (candidates.empty()) return false;
  const auto [target, row] = candidates[rng.index(candidates.size())];
  const AbsTensor placeholder = m.nodes[static_cast<std::size_t>(target)].type;
  OpInstance inst = spec.instantiate(row, m.store, rng);
  const auto first_fresh = static_cast<sym::SymId>(m.store.symbols().size());
  std::vector<AbsTensor> ins = spec.infer_input_type(inst, {&placeholder, 1}, m.store);
  std::vector<sym::SymId> fresh;
  for (auto id = first_fresh; id < static_cast<sym::SymId>(m.store.symbols().size()); ++id) fresh.push_back(id);

  auto outs = spec.type_transfer(inst, ins);
  std::vector<sym::Predicate> extra;
  for (int i = 0; i < placeholder.rank(); ++i) extra.push_back(sym::eq(outs[0].shape[i], placeholder.shape[i]));
  for (const AbsTensor& t : ins) {
    for (const Expr& d : t.shape) extra.push_back(d >= 1);
    if (t.rank() > 1) extra.push_back(numel(t) <= kElementCap);
  }
  if (!solve_insertion(m, extra, spec, inst, ins, nullptr)) return false;

  std::vector<int> inputs;
  for (const AbsTensor& t : ins) inputs.push_back(m.add_placeholder(t));
  SymNode& n = m.nodes[static_cast<std::size_t>(target)];
  n.placeholder = false;
  n.spec = &spec;
  n.inst = inst;
  n.inputs = inputs;
  bin_after_insertion(m, inst, ins, fresh, rng, opts);
  return true;
}

GenResult generate(const Registry& registry, int target_nodes, std::uint64_t seed, const GenOptions& opts) {
  if (target_nodes < 1) throw std::invalid_argument("target_nodes must be >= 1");
  GenResult res{GraphModel(seed), false, 0};
  GraphModel& m = res.model;
  Rng rng(seed);

  // Start from one placeholder; mostly f32 since most operators are float-only.
  static const DType kStart[] = {DType::kF32, DType::kF32, DType::kF32, DType::kF32, DType::kF32,
                                 DType::kF64, DType::kI32, DType::kI64};
  const DType dt = kStart[rng.index(std::size(kStart))];
  const auto first_fresh = static_cast<sym::SymId>(m.store.symbols().size());
  AbsTensor t = fresh_tensor(m.store, dt, static_cast<int>(rng.uniform_int(1, 4)), "p0");
  m.add_placeholder(t);
  if (opts.bins > 0) {
    std::vector<BinPlan> plans;
    for (auto id = first_fresh; id < static_cast<sym::SymId>(m.store.symbols().size()); ++id) {
      const SymbolInfo& info = m.store.symbols()[static_cast<std::size_t>(id)];
      plans.push_back(plan_bins(id, info.lo, info.hi, opts.bins));
    }
    std::vector<sym::Predicate> cap;
    if (t.rank() > 1) cap.push_back(numel(t) <= kElementCap);
    m.store.try_add_constraints(cap);
    apply_binning_all(m.store, plans, rng);
  }

  const auto specs = registry.generatable();
  int consecutive = 0;
  while (m.num_ops() < target_nodes) {
    if (consecutive >= 50) {
      res.short_generation = true;
      break;
    }
    if (res.attempts >= 500 && m.num_ops() == 0) {
      throw GenerationStalled("no operator could be inserted after 500 attempts");
    }
    const OpSpec& spec = *specs[rng.index(specs.size())];
    const bool forward = rng.coin(0.5);
    ++res.attempts;
    const bool ok = forward ? forward_insert(m, spec, rng, opts) : backward_insert(m, spec, rng, opts);
    consecutive = ok ? 0 : consecutive + 1;
  }
  return res;
}

namespace {

Shape concrete_shape(const AbsTensor& t, const sym::Assignment& model) {
  Shape s;
  for (const Expr& d : t.shape) s.push_back(sym::evaluate_i64(d, model));
  return s;
}

Tensor random_payload(DType dtype, const Shape& shape, Rng& rng) {
  std::vector<double> data(static_cast<std::size_t>(num_elements(shape)));
  for (double& v : data) {
    if (is_float(dtype)) v = rng.uniform_real(-1.0, 1.0);
    else if (dtype == DType::kBool) v = rng.coin(0.5) ? 1.0 : 0.0;
    else v = static_cast<double>(rng.uniform_int(-3, 3));
  }
  return Tensor(dtype, shape, std::move(data));
}

}  // namespace

Graph concretize(const GraphModel& m, Rng& rng) {
  const sym::Assignment& model = m.store.model();
  const std::vector<int> order = m.topo_order();
  const std::vector<int> holders = m.placeholders();
  std::vector<bool> is_input(m.nodes.size(), false);
  for (bool any = false; !any;) {
    for (int id : holders) {
      is_input[static_cast<std::size_t>(id)] = rng.coin(0.5);
      any = any || is_input[static_cast<std::size_t>(id)];
    }
    if (holders.empty()) break;
  }

  std::vector<std::string> names(m.nodes.size());
  int n_in = 0, n_w = 0;
  for (int id : order) {
    const SymNode& s = m.nodes[static_cast<std::size_t>(id)];
    if (!s.placeholder) names[static_cast<std::size_t>(id)] = "n" + std::to_string(id);
    else if (is_input[static_cast<std::size_t>(id)]) names[static_cast<std::size_t>(id)] = "in" + std::to_string(n_in++);
    else names[static_cast<std::size_t>(id)] = "w" + std::to_string(n_w++);
  }

  Graph g;
  for (int id : order) {
    const SymNode& s = m.nodes[static_cast<std::size_t>(id)];
    Node n;
    n.id = names[static_cast<std::size_t>(id)];
    n.type = {s.type.dtype, concrete_shape(s.type, model)};
    if (s.placeholder) {
      n.op = is_input[static_cast<std::size_t>(id)] ? "Input" : "Weight";
      if (n.op == "Weight") n.value = random_payload(n.type.dtype, n.type.shape, rng);
    } else {
      n.op = s.spec->kernel;
      n.attrs = s.inst.concrete_attrs(model);
      for (int i : s.inputs) n.inputs.push_back({names[static_cast<std::size_t>(i)], 0});
    }
    g.nodes.push_back(std::move(n));
  }
  for (int id : order) {
    const SymNode& s = m.nodes[static_cast<std::size_t>(id)];
    if (!s.placeholder && m.consumers(id).empty()) g.outputs.push_back({names[static_cast<std::size_t>(id)], 0});
  }
  return g;
}

std::optional<Graph> single_op_graph(const OpSpec& spec, std::size_t row, std::uint64_t seed) {
  if (row >= spec.menu.size()) throw std::out_of_range("menu row out of range");
  GraphModel m(seed);
  Rng rng(seed);
  std::vector<AbsTensor> v;
  std::vector<int> ids;
  std::vector<sym::Predicate> extra;
  for (std::size_t i = 0; i < spec.menu[row].inputs.size(); ++i) {
    const TypeSig& sig = spec.menu[row].inputs[i];
    AbsTensor t = fresh_tensor(m.store, sig.dtype, sig.rank, "p" + std::to_string(i));
    for (const Expr& d : t.shape) {
      extra.push_back(d >= 1);
      extra.push_back(d <= 4);
    }
    ids.push_back(m.add_placeholder(t));
    v.push_back(std::move(t));
  }
  if (ids.empty()) return std::nullopt;
  OpInstance inst = spec.instantiate(row, m.store, rng);
  std::vector<AbsTensor> outs;
  if (!solve_insertion(m, extra, spec, inst, v, &outs)) return std::nullopt;
  SymNode n;
  n.id = static_cast<int>(m.nodes.size());
  n.placeholder = false;
  n.spec = &spec;
  n.inst = inst;
  n.inputs = ids;
  n.type = outs[0];
  m.nodes.push_back(std::move(n));
  return concretize(m, rng);
}

Graph generate_graph(const Registry& registry, int target_nodes, std::uint64_t seed, const GenOptions& opts,
                     bool* short_generation) {
  GenResult r = generate(registry, target_nodes, seed, opts);
  if (short_generation) *short_generation = r.short_generation;
  Rng rng(splitmix64(seed ^ 0xC0C0A5EULL));
  return concretize(r.model, rng);
}

}  // namespace graphsmith
