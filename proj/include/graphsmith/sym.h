// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Symbolic integer expressions and predicates used to describe tensor shapes
// and operator attributes.

#ifndef GRAPHSMITH_SYM_H_
#define GRAPHSMITH_SYM_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace graphsmith::sym {

using SymId = int;
using BigInt = boost::multiprecision::cpp_int;

enum class ExprKind { kConst, kVar, kAdd, kSub, kMul, kFloorDiv, kMod, kMax };

struct ExprNode;

// Immutable expression tree over symbolic integers.
class Expr {
 public:
  Expr(std::int64_t constant);  // NOLINT(google-explicit-constructor)
  Expr(int constant) : Expr(static_cast<std::int64_t>(constant)) {}  // NOLINT
  static Expr var(SymId id);

  ExprKind kind() const;
  std::int64_t constant() const;  // kConst only
  SymId id() const;               // kVar only
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_const() const { return kind() == ExprKind::kConst; }
  bool is_var() const { return kind() == ExprKind::kVar; }

  // Collects all symbol ids referenced (with repetition removed).
  void collect(std::vector<SymId>& out) const;

  std::string to_string(const std::function<std::string(SymId)>& name) const;

  const ExprNode* node() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  static Expr make(ExprKind k, Expr a, Expr b);
  std::shared_ptr<const ExprNode> node_;

  friend Expr operator+(const Expr&, const Expr&);
  friend Expr operator-(const Expr&, const Expr&);
  friend Expr operator*(const Expr&, const Expr&);
  friend Expr floordiv(const Expr&, const Expr&);
  friend Expr mod(const Expr&, const Expr&);
  friend Expr max(const Expr&, const Expr&);
};

struct ExprNode {
  ExprKind kind;
  std::int64_t constant = 0;
  SymId id = -1;
  std::optional<Expr> a, b;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr floordiv(const Expr& a, const Expr& b);
Expr mod(const Expr& a, const Expr& b);
Expr max(const Expr& a, const Expr& b);

enum class Cmp { kLt, kLe, kEq, kGe, kGt, kNe };

std::string_view cmp_text(Cmp c);

struct Comparison {
  Expr lhs;
  Cmp cmp;
  Expr rhs;
};

// Disjunction of comparisons; a single comparison in the common case.
struct Predicate {
  std::vector<Comparison> any;

  std::string to_string(const std::function<std::string(SymId)>& name) const;
};

Predicate operator<(const Expr& a, const Expr& b);
Predicate operator<=(const Expr& a, const Expr& b);
Predicate operator>(const Expr& a, const Expr& b);
Predicate operator>=(const Expr& a, const Expr& b);
Predicate eq(const Expr& a, const Expr& b);
Predicate ne(const Expr& a, const Expr& b);
Predicate operator||(const Predicate& a, const Predicate& b);

// Total assignment indexed by SymId.
using Assignment = std::vector<std::int64_t>;

// Exact evaluation. Division or modulo by zero yields nullopt.
std::optional<BigInt> evaluate(const Expr& e, const Assignment& model);
bool holds(const Comparison& c, const Assignment& model);
bool holds(const Predicate& p, const Assignment& model);

// Evaluates to int64, throwing std::overflow_error if out of range or undefined.
std::int64_t evaluate_i64(const Expr& e, const Assignment& model);

}  // namespace graphsmith::sym

#endif  // GRAPHSMITH_SYM_H_
