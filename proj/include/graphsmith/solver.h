// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Incremental constraint store over symbolic integers with try-add/rollback.

#ifndef GRAPHSMITH_SOLVER_H_
#define GRAPHSMITH_SOLVER_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphsmith/sym.h"

namespace graphsmith {

inline constexpr std::int64_t kDimMin = 1;
inline constexpr std::int64_t kDimMax = 64;
inline constexpr std::int64_t kAttrMin = 0;
inline constexpr std::int64_t kAttrMax = 1 << 16;
// Marks an entry of a hint vector as absent.
inline constexpr std::int64_t kNoHint = INT64_MIN;

struct SymbolInfo {
  std::string name;
  std::int64_t lo;
  std::int64_t hi;
};

struct SolveOptions {
  std::chrono::milliseconds budget{500};
  bool randomize = false;
  std::uint64_t seed = 0;
};

// Backtracking search with interval propagation. Returns a model that has been
// verified against every predicate by exact evaluation, or nullopt when the
// system is unsatisfiable or the budget ran out.
std::optional<sym::Assignment> solve(const std::vector<SymbolInfo>& symbols,
                                     const std::vector<sym::Predicate>& constraints,
                                     const sym::Assignment* hint, const SolveOptions& options);

// Renders the constraint system as an SMT-LIB2 script (QF_NIA).
std::string to_smtlib2(const std::vector<SymbolInfo>& symbols,
                       const std::vector<sym::Predicate>& constraints);

// Parses the output of an SMT process answering (check-sat)(get-model).
// Returns nullopt on "unsat", "unknown" or malformed output.
std::optional<sym::Assignment> parse_smt_model(const std::string& output,
                                               const std::vector<SymbolInfo>& symbols);

class ConstraintStore {
 public:
  explicit ConstraintStore(std::uint64_t seed = 0) : seed_(seed) {}

  // Shell command of an SMT-LIB2 solver reading the script on stdin. When set,
  // it replaces the built-in search.
  void set_external_solver(std::string command) { external_ = std::move(command); }

  sym::SymId new_symbol(std::string name, std::int64_t lo, std::int64_t hi);
  sym::SymId new_dim(std::string name) { return new_symbol(std::move(name), kDimMin, kDimMax); }
  sym::SymId new_attr(std::string name) { return new_symbol(std::move(name), kAttrMin, kAttrMax); }

  // Commits `c` when the union with the committed set is satisfiable. Values
  // in `prefer` are tried first for the named symbols; otherwise the previous
  // model value, then the smallest feasible value.
  bool try_add_constraints(const std::vector<sym::Predicate>& c,
                           const std::map<sym::SymId, std::int64_t>& prefer = {});

  const sym::Assignment& model() const { return model_; }
  sym::Assignment randomize_model(std::uint64_t seed) const;

  const std::vector<sym::Predicate>& committed() const { return committed_; }
  const std::vector<SymbolInfo>& symbols() const { return symbols_; }
  const std::string& name(sym::SymId id) const { return symbols_.at(static_cast<std::size_t>(id)).name; }

  std::int64_t value(sym::SymId id) const { return model_.at(static_cast<std::size_t>(id)); }
  std::int64_t eval(const sym::Expr& e) const { return sym::evaluate_i64(e, model_); }

  void set_budget(std::chrono::milliseconds b) { budget_ = b; }

  std::string dump() const;

 private:
  std::optional<sym::Assignment> run(const std::vector<sym::Predicate>& constraints,
                                     const sym::Assignment* hint, const SolveOptions& o) const;

  std::uint64_t seed_;
  std::vector<SymbolInfo> symbols_;
  std::vector<sym::Predicate> committed_;
  sym::Assignment model_;
  std::size_t hinted_ = 0;
  std::string external_;
  std::chrono::milliseconds budget_{500};
};

}  // namespace graphsmith

#endif  // GRAPHSMITH_SOLVER_H_
