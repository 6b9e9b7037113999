// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Attribute binning: partition a symbol's range into geometric bins, pick one
// uniformly and constrain the solver model into it.

#ifndef GRAPHSMITH_BINNING_H_
#define GRAPHSMITH_BINNING_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphsmith/opspec.h"
#include "graphsmith/rng.h"
#include "graphsmith/solver.h"

namespace graphsmith {

class EmptyDomain : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inclusive range [lo, hi]; bounds may reference other symbols.
struct Bin {
  sym::Expr lo;
  sym::Expr hi;
};

struct BinPlan {
  sym::SymId attr = -1;
  int k = 0;
  std::vector<Bin> regular;
  std::vector<Bin> special;
  // Predicates emitted together with every bin (e.g. index validity).
  std::vector<sym::Predicate> joint;
};

// Regular bins [1,2), [2,4), ..., the last one closed at `hi`.
BinPlan plan_bins(sym::SymId attr, std::int64_t lo, std::int64_t hi, int k);

// Extra bins for (spec, attribute role) pairs; empty when none are registered.
std::vector<Bin> special_bins(const std::string& spec, const std::string& role, std::int64_t k,
                              const OpInstance& inst, std::span<const AbsTensor> inputs);

// Names of the (spec, role) pairs that carry special bins.
std::vector<std::pair<std::string, std::string>> special_bin_families();

// Samples bins uniformly, removing unsatisfiable ones, until one commits.
// Returns false (leaving the attribute unconstrained) if every bin fails.
bool apply_binning(ConstraintStore& store, const BinPlan& plan, Rng& rng);

// Bins every plan; first tries one joint sample for all plans in a single
// solver call, then falls back to apply_binning per plan.
int apply_binning_all(ConstraintStore& store, const std::vector<BinPlan>& plans, Rng& rng);

// Plans for the attribute symbols of an instance plus the given fresh dims.
std::vector<BinPlan> plans_for_insertion(const ConstraintStore& store, const OpInstance& inst,
                                         std::span<const AbsTensor> inputs,
                                         const std::vector<sym::SymId>& fresh_dims, int k);

}  // namespace graphsmith

#endif  // GRAPHSMITH_BINNING_H_
