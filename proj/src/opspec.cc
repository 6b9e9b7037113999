// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/opspec.h"

#include <algorithm>

namespace graphsmith {

std::string AbsTensor::to_string(const std::function<std::string(sym::SymId)>& name) const {
  std::string out = std::string(dtype_name(dtype)) + "[";
  for (int i = 0; i < rank(); ++i) {
    if (i) out += ", ";
    out += shape[i].to_string(name);
  }
  return out + "]";
}

AbsTensor fresh_tensor(ConstraintStore& store, DType dtype, int rank, const std::string& tag) {
  AbsTensor t{dtype, {}};
  for (int i = 0; i < rank; ++i) {
    t.shape.push_back(sym::Expr::var(store.new_dim(tag + ".d" + std::to_string(i))));
  }
  return t;
}

std::string sig_to_string(const TypeSig& s) {
  return std::string(dtype_name(s.dtype)) + "r" + std::to_string(s.rank);
}

std::string_view meta_kind_name(MetaKind k) {
  switch (k) {
    case MetaKind::kElementwiseUnary: return "elementwise-unary";
    case MetaKind::kElementwiseBinary: return "elementwise-binary";
    case MetaKind::kBroadcast: return "broadcast";
    case MetaKind::kReduce: return "reduce";
    case MetaKind::kShape: return "shape";
    case MetaKind::kCustom: return "custom";
  }
  return "custom";
}

sym::Expr OpInstance::add_attr(ConstraintStore& store, const std::string& key, const std::string& role,
                               std::int64_t lo, std::int64_t hi) {
  const std::string name = spec->name + "#" + std::to_string(store.symbols().size()) + "." + key;
  const sym::SymId id = store.new_symbol(name, lo, hi);
  sym::Expr e = sym::Expr::var(id);
  sym_attrs.insert_or_assign(key, e);
  attr_symbols.push_back({key, role, id});
  return e;
}

Attrs OpInstance::concrete_attrs(const sym::Assignment& model) const {
  Attrs out = fixed_attrs;
  for (const auto& [key, e] : sym_attrs) out[key] = sym::evaluate_i64(e, model);
  return out;
}

OpInstance OpSpec::instantiate(std::size_t row, ConstraintStore& store, Rng& rng) const {
  OpInstance inst;
  inst.spec = this;
  inst.sig = menu.at(row);
  if (instantiate_attrs) instantiate_attrs(inst, store, rng);
  return inst;
}

namespace {

void check_inputs(const OpSpec& spec, std::span<const AbsTensor> inputs) {
  if (static_cast<int>(inputs.size()) != spec.arity) {
    throw ArityMismatch(spec.name + ": expected " + std::to_string(spec.arity) + " inputs, got " +
                        std::to_string(inputs.size()));
  }
}

}  // namespace

std::vector<sym::Predicate> OpSpec::requires_of(const OpInstance& inst, std::span<const AbsTensor> inputs) const {
  check_inputs(*this, inputs);
  if (!requires_fn) return {};
  return requires_fn(inst, inputs);
}

std::vector<AbsTensor> OpSpec::type_transfer(const OpInstance& inst, std::span<const AbsTensor> inputs) const {
  check_inputs(*this, inputs);
  return transfer_fn(inst, inputs);
}

std::vector<AbsTensor> OpSpec::infer_input_type(const OpInstance& inst, std::span<const AbsTensor> outputs,
                                                ConstraintStore& store) const {
  if (!infer_fn) throw NoInverse(name + " does not support backward insertion");
  if (outputs.size() != inst.sig.outputs.size()) {
    throw ArityMismatch(name + ": expected " + std::to_string(inst.sig.outputs.size()) + " outputs");
  }
  return infer_fn(inst, outputs, store);
}

namespace {

void collect_divisors(const sym::Expr& e, std::vector<sym::Expr>& out) {
  switch (e.kind()) {
    case sym::ExprKind::kConst:
    case sym::ExprKind::kVar: return;
    case sym::ExprKind::kFloorDiv:
    case sym::ExprKind::kMod: out.push_back(e.rhs()); break;
    default: break;
  }
  collect_divisors(e.lhs(), out);
  collect_divisors(e.rhs(), out);
}

// True when `preds` syntactically states divisor > 0.
bool guarded(const sym::Expr& divisor, const std::vector<sym::Predicate>& preds) {
  if (divisor.is_const()) return divisor.constant() > 0;
  if (!divisor.is_var()) return false;
  for (const sym::Predicate& p : preds) {
    if (p.any.size() != 1) continue;
    const sym::Comparison& c = p.any[0];
    auto is_div = [&](const sym::Expr& e) { return e.is_var() && e.id() == divisor.id(); };
    auto cst = [](const sym::Expr& e, std::int64_t min) { return e.is_const() && e.constant() >= min; };
    if (is_div(c.lhs) && ((c.cmp == sym::Cmp::kGt && cst(c.rhs, 0)) || (c.cmp == sym::Cmp::kGe && cst(c.rhs, 1)))) {
      return true;
    }
    if (is_div(c.rhs) && ((c.cmp == sym::Cmp::kLt && cst(c.lhs, 0)) || (c.cmp == sym::Cmp::kLe && cst(c.lhs, 1)))) {
      return true;
    }
  }
  return false;
}

}  // namespace

const OpSpec& Registry::add(OpSpec spec) {
  if (find(spec.name)) throw DuplicateName("operator spec '" + spec.name + "' already registered");
  auto bad = [&](const std::string& why) { return IllFormedSpec(spec.name + ": " + why); };
  if (spec.arity < 0) throw bad("negative arity");
  if (spec.arity == 0) {
    if (!is_leaf_op(spec.kernel)) throw bad("arity-0 specs must lower to a leaf op");
    specs_.push_back(std::make_unique<OpSpec>(std::move(spec)));
    return *specs_.back();
  }
  if (!has_kernel(spec.kernel)) throw bad("no interpreter kernel named '" + spec.kernel + "'");
  if (spec.menu.empty()) throw bad("empty type menu");
  if (!spec.transfer_fn) throw bad("missing type_transfer");
  for (const Signature& row : spec.menu) {
    if (static_cast<int>(row.inputs.size()) != spec.arity) throw bad("menu row arity differs from spec arity");
    if (row.outputs.size() != 1) throw bad("exactly one output per row is supported");
  }

  // Every row must transfer to its declared output type, and at least one row
  // must admit outputs with all dims >= 1.
  bool feasible = false;
  Rng rng(0);
  for (std::size_t r = 0; r < spec.menu.size(); ++r) {
    ConstraintStore store;
    OpInstance inst = spec.instantiate(r, store, rng);
    std::vector<AbsTensor> ins;
    for (std::size_t i = 0; i < inst.sig.inputs.size(); ++i) {
      ins.push_back(fresh_tensor(store, inst.sig.inputs[i].dtype, inst.sig.inputs[i].rank, "in" + std::to_string(i)));
    }
    auto preds = spec.requires_fn ? spec.requires_fn(inst, ins) : std::vector<sym::Predicate>{};
    auto outs = spec.transfer_fn(inst, ins);
    if (outs.size() != 1 || outs[0].dtype != inst.sig.outputs[0].dtype ||
        outs[0].rank() != inst.sig.outputs[0].rank) {
      throw bad("type_transfer disagrees with menu row " + std::to_string(r));
    }
    std::vector<sym::Expr> divisors;
    for (const sym::Expr& d : outs[0].shape) collect_divisors(d, divisors);
    for (const sym::Expr& d : divisors) {
      if (!guarded(d, preds)) throw bad("divisor without a positivity predicate");
    }
    if (feasible) continue;
    for (const sym::Expr& d : outs[0].shape) preds.push_back(d >= 1);
    feasible = store.try_add_constraints(preds);
  }
  if (!feasible) throw bad("no assignment gives every output dim >= 1");
  specs_.push_back(std::make_unique<OpSpec>(std::move(spec)));
  return *specs_.back();
}

const OpSpec* Registry::find(std::string_view name) const {
  for (const auto& s : specs_) {
    if (s->name == name) return s.get();
  }
  return nullptr;
}

const OpSpec& Registry::get(std::string_view name) const {
  const OpSpec* s = find(name);
  if (!s) throw std::out_of_range("unknown operator spec '" + std::string(name) + "'");
  return *s;
}

std::vector<const OpSpec*> Registry::all() const {
  std::vector<const OpSpec*> out;
  for (const auto& s : specs_) out.push_back(s.get());
  return out;
}

std::vector<const OpSpec*> Registry::generatable() const {
  std::vector<const OpSpec*> out;
  for (const auto& s : specs_) {
    if (s->generatable()) out.push_back(s.get());
  }
  return out;
}

std::vector<const OpSpec*> Registry::by_meta(MetaKind kind) const {
  std::vector<const OpSpec*> out;
  for (const auto& s : specs_) {
    if (s->meta == kind) out.push_back(s.get());
  }
  return out;
}

std::vector<const OpSpec*> Registry::by_kernel(std::string_view kernel) const {
  std::vector<const OpSpec*> out;
  for (const auto& s : specs_) {
    if (s->kernel == kernel) out.push_back(s.get());
  }
  return out;
}

const Registry& standard_registry() {
  static const Registry* r = [] {
    auto* reg = new Registry();
    register_standard_ops(*reg);
    return reg;
  }();
  return *r;
}

}  // namespace graphsmith
