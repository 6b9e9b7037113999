// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Declarative operator specifications: symbolic input/output types, validity
// predicates, forward type transfer and backward input inference.

#ifndef GRAPHSMITH_OPSPEC_H_
#define GRAPHSMITH_OPSPEC_H_

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphsmith/dtype.h"
#include "graphsmith/kernels.h"
#include "graphsmith/rng.h"
#include "graphsmith/solver.h"
#include "graphsmith/sym.h"

namespace graphsmith {

class DuplicateName : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class IllFormedSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ArityMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NoInverse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AbsTensor {
  DType dtype = DType::kF32;
  std::vector<sym::Expr> shape;

  int rank() const { return static_cast<int>(shape.size()); }
  std::string to_string(const std::function<std::string(sym::SymId)>& name) const;
};

// Fresh abstract tensor whose dims are new dimension symbols.
AbsTensor fresh_tensor(ConstraintStore& store, DType dtype, int rank, const std::string& tag);

struct TypeSig {
  DType dtype;
  int rank;

  friend bool operator==(const TypeSig&, const TypeSig&) = default;
};

std::string sig_to_string(const TypeSig& s);

// One row of an operator's type menu.
struct Signature {
  std::vector<TypeSig> inputs;
  std::vector<TypeSig> outputs;
};

enum class MetaKind { kElementwiseUnary, kElementwiseBinary, kBroadcast, kReduce, kShape, kCustom };

std::string_view meta_kind_name(MetaKind k);

// Elementwise tensor inequality in canonical form f(x) <= 0 or f(x) < 0 over
// a subset of the operator inputs (broadcast together).
struct TensorInequality {
  std::string text;
  bool strict = false;
  std::vector<int> operands;
  std::function<double(std::span<const double>)> f;
  // Partial derivatives of f with respect to each operand.
  std::function<void(std::span<const double>, std::span<double>)> df;
};

// Integer attribute backed by a solver symbol. `role` groups related attrs
// (e.g. every padding amount has role "pad") for binning.
struct SymAttr {
  std::string key;
  std::string role;
  sym::SymId id;
};

struct OpSpec;

// An operator with a chosen type-menu row and its attribute symbols.
struct OpInstance {
  const OpSpec* spec = nullptr;
  Signature sig;
  std::map<std::string, sym::Expr> sym_attrs;
  Attrs fixed_attrs;
  std::vector<SymAttr> attr_symbols;

  const sym::Expr& a(const std::string& key) const { return sym_attrs.at(key); }
  std::int64_t fixed(const std::string& key) const { return fixed_attrs.at(key); }

  // Adds a symbolic attribute in [lo, hi].
  sym::Expr add_attr(ConstraintStore& store, const std::string& key, const std::string& role,
                     std::int64_t lo, std::int64_t hi);

  // Concrete attribute map under the store model.
  Attrs concrete_attrs(const sym::Assignment& model) const;
};

struct AttrDecl {
  std::string name;
  std::int64_t lo = kAttrMin;
  std::int64_t hi = kAttrMax;
};

struct OpSpec {
  std::string name;    // unique spec name
  std::string kernel;  // interpreter op the instance lowers to
  MetaKind meta = MetaKind::kCustom;
  int arity = 1;
  std::vector<AttrDecl> attrs;
  std::vector<Signature> menu;

  // Creates attribute symbols and fixed choices for a chosen menu row.
  std::function<void(OpInstance&, ConstraintStore&, Rng&)> instantiate_attrs;
  std::function<std::vector<sym::Predicate>(const OpInstance&, std::span<const AbsTensor>)> requires_fn;
  std::function<std::vector<AbsTensor>(const OpInstance&, std::span<const AbsTensor>)> transfer_fn;
  // Null when backward insertion is unsupported.
  std::function<std::vector<AbsTensor>(const OpInstance&, std::span<const AbsTensor>, ConstraintStore&)> infer_fn;

  std::vector<TensorInequality> vulnerabilities;

  bool generatable() const { return arity > 0; }

  OpInstance instantiate(std::size_t row, ConstraintStore& store, Rng& rng) const;

  std::vector<sym::Predicate> requires_of(const OpInstance& inst, std::span<const AbsTensor> inputs) const;
  std::vector<AbsTensor> type_transfer(const OpInstance& inst, std::span<const AbsTensor> inputs) const;
  std::vector<AbsTensor> infer_input_type(const OpInstance& inst, std::span<const AbsTensor> outputs,
                                          ConstraintStore& store) const;
};

class Registry {
 public:
  // Validates and adds a spec; throws DuplicateName or IllFormedSpec.
  const OpSpec& add(OpSpec spec);

  const OpSpec* find(std::string_view name) const;
  const OpSpec& get(std::string_view name) const;
  std::vector<const OpSpec*> all() const;
  std::vector<const OpSpec*> generatable() const;
  std::vector<const OpSpec*> by_meta(MetaKind kind) const;
  // Specs lowering to the given kernel.
  std::vector<const OpSpec*> by_kernel(std::string_view kernel) const;
  std::size_t size() const { return specs_.size(); }

 private:
  std::vector<std::unique_ptr<OpSpec>> specs_;
};

// The built-in operator library; built once, immutable afterwards.
const Registry& standard_registry();

// Adds every built-in operator spec to `r`.
void register_standard_ops(Registry& r);

}  // namespace graphsmith

#endif  // GRAPHSMITH_OPSPEC_H_
