// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/binning.h"

#include <algorithm>
#include <map>

namespace graphsmith {

using sym::Expr;

BinPlan plan_bins(sym::SymId attr, std::int64_t lo, std::int64_t hi, int k) {
  if (lo > hi) throw EmptyDomain("empty domain [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  if (k < 1) throw std::invalid_argument("bin count must be positive");
  BinPlan plan;
  plan.attr = attr;
  plan.k = k;
  for (int i = 0; i < k; ++i) {
    const std::int64_t b_lo = std::int64_t{1} << i;
    if (b_lo > hi) break;
    const bool last = i == k - 1 || (std::int64_t{1} << (i + 1)) > hi;
    const std::int64_t b_hi = last ? hi : (std::int64_t{1} << (i + 1)) - 1;
    plan.regular.push_back({Expr(b_lo), Expr(b_hi)});
    if (last) break;
  }
  return plan;
}

namespace {

std::vector<Bin> zero_bin() { return {{Expr(0), Expr(0)}}; }

std::vector<Bin> negative_bins(std::int64_t k) {
  std::vector<Bin> out;
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t a = std::int64_t{1} << i;
    const std::int64_t b = (std::int64_t{1} << (i + 1)) - 1;
    out.push_back({Expr(-b), Expr(-a)});
  }
  return out;
}

bool is_pad_family(const std::string& spec) {
  return spec == "ConstPad" || spec == "ReflectPad" || spec == "ReplicatePad";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> special_bin_families() {
  return {{"Conv2d", "pad"}, {"ConstPad", "pad"},   {"ReflectPad", "pad"},
          {"ReplicatePad", "pad"}, {"Slice", "start"}, {"Slice", "end"}};
}

std::vector<Bin> special_bins(const std::string& spec, const std::string& role, std::int64_t k,
                              const OpInstance& inst, std::span<const AbsTensor> inputs) {
  if (spec == "Conv2d" && role == "pad") return zero_bin();
  if (is_pad_family(spec) && role == "pad") {
    auto out = zero_bin();
    auto neg = negative_bins(k);
    out.insert(out.end(), neg.begin(), neg.end());
    return out;
  }
  if (spec == "Slice" && !inputs.empty()) {
    const Expr& dim = inputs[0].shape.at(static_cast<std::size_t>(inst.fixed("axis")));
    if (role == "start") return zero_bin();
    if (role == "end") return {{dim, dim}};
  }
  return {};
}

namespace {

std::vector<sym::Predicate> bin_predicates(const BinPlan& plan, const Bin& b) {
  Expr x = Expr::var(plan.attr);
  std::vector<sym::Predicate> c{x >= b.lo, x <= b.hi};
  c.insert(c.end(), plan.joint.begin(), plan.joint.end());
  return c;
}

// A value inside the bin under the current model, used as a search preference.
std::int64_t preferred(const ConstraintStore& store, const Bin& b, Rng& rng) {
  std::int64_t lo, hi;
  try {
    lo = store.eval(b.lo);
    hi = store.eval(b.hi);
  } catch (const std::overflow_error&) {
    return 0;
  }
  if (lo > hi) return lo;
  return rng.uniform_int(lo, hi);
}

}  // namespace

bool apply_binning(ConstraintStore& store, const BinPlan& plan, Rng& rng) {
  std::vector<Bin> bins = plan.regular;
  bins.insert(bins.end(), plan.special.begin(), plan.special.end());
  while (!bins.empty()) {
    const std::size_t i = rng.index(bins.size());
    const Bin b = bins[i];
    if (store.try_add_constraints(bin_predicates(plan, b), {{plan.attr, preferred(store, b, rng)}})) return true;
    bins.erase(bins.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return false;
}

int apply_binning_all(ConstraintStore& store, const std::vector<BinPlan>& plans, Rng& rng) {
  if (plans.empty()) return 0;
  std::vector<sym::Predicate> joint;
  std::map<sym::SymId, std::int64_t> prefer;
  Rng trial = rng.fork();
  for (const BinPlan& plan : plans) {
    const std::size_t n = plan.regular.size() + plan.special.size();
    if (n == 0) continue;
    const std::size_t i = trial.index(n);
    const Bin& b = i < plan.regular.size() ? plan.regular[i] : plan.special[i - plan.regular.size()];
    auto c = bin_predicates(plan, b);
    joint.insert(joint.end(), c.begin(), c.end());
    prefer[plan.attr] = preferred(store, b, trial);
  }
  if (store.try_add_constraints(joint, prefer)) return static_cast<int>(plans.size());
  int ok = 0;
  for (const BinPlan& plan : plans) ok += apply_binning(store, plan, rng) ? 1 : 0;
  return ok;
}

std::vector<BinPlan> plans_for_insertion(const ConstraintStore& store, const OpInstance& inst,
                                         std::span<const AbsTensor> inputs,
                                         const std::vector<sym::SymId>& fresh_dims, int k) {
  std::vector<BinPlan> plans;
  for (const SymAttr& a : inst.attr_symbols) {
    const SymbolInfo& info = store.symbols().at(static_cast<std::size_t>(a.id));
    BinPlan plan = plan_bins(a.id, info.lo, info.hi, k);
    plan.special = special_bins(inst.spec->name, a.role, k, inst, inputs);
    if (inst.spec->name == "Slice" && !inputs.empty()) {
      // Keep bounds inside the valid index range of the sliced dim.
      const Expr& dim = inputs[0].shape.at(static_cast<std::size_t>(inst.fixed("axis")));
      const Expr x = Expr::var(a.id);
      if (a.role == "start") plan.joint = {x >= 0, x < dim};
      if (a.role == "end") plan.joint = {x >= 1, x <= dim};
    }
    plans.push_back(std::move(plan));
  }
  for (sym::SymId d : fresh_dims) {
    const SymbolInfo& info = store.symbols().at(static_cast<std::size_t>(d));
    plans.push_back(plan_bins(d, info.lo, info.hi, k));
  }
  return plans;
}

}  // namespace graphsmith
