// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/sym.h"

#include <algorithm>
#include <stdexcept>

namespace graphsmith::sym {

Expr::Expr(std::int64_t constant) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::kConst;
  n->constant = constant;
  node_ = std::move(n);
}

Expr Expr::var(SymId id) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::kVar;
  n->id = id;
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

Expr Expr::make(ExprKind k, Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

ExprKind Expr::kind() const { return node_->kind; }
std::int64_t Expr::constant() const { return node_->constant; }
SymId Expr::id() const { return node_->id; }
const Expr& Expr::lhs() const { return *node_->a; }
const Expr& Expr::rhs() const { return *node_->b; }

void Expr::collect(std::vector<SymId>& out) const {
  switch (kind()) {
    case ExprKind::kConst: return;
    case ExprKind::kVar:
      if (std::find(out.begin(), out.end(), id()) == out.end()) out.push_back(id());
      return;
    default:
      lhs().collect(out);
      rhs().collect(out);
  }
}

std::string Expr::to_string(const std::function<std::string(SymId)>& name) const {
  const char* op = "";
  switch (kind()) {
    case ExprKind::kConst: return std::to_string(constant());
    case ExprKind::kVar: return name(id());
    case ExprKind::kAdd: op = " + "; break;
    case ExprKind::kSub: op = " - "; break;
    case ExprKind::kMul: op = " * "; break;
    case ExprKind::kFloorDiv: op = " // "; break;
    case ExprKind::kMod: op = " % "; break;
    case ExprKind::kMax:
      return "max(" + lhs().to_string(name) + ", " + rhs().to_string(name) + ")";
  }
  return "(" + lhs().to_string(name) + op + rhs().to_string(name) + ")";
}

// Light constant folding keeps shape expressions readable.
Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(a.constant() + b.constant());
  if (b.is_const() && b.constant() == 0) return a;
  if (a.is_const() && a.constant() == 0) return b;
  return Expr::make(ExprKind::kAdd, a, b);
}
Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(a.constant() - b.constant());
  if (b.is_const() && b.constant() == 0) return a;
  return Expr::make(ExprKind::kSub, a, b);
}
Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(a.constant() * b.constant());
  if (b.is_const() && b.constant() == 1) return a;
  if (a.is_const() && a.constant() == 1) return b;
  return Expr::make(ExprKind::kMul, a, b);
}
Expr floordiv(const Expr& a, const Expr& b) {
  if (b.is_const() && b.constant() == 1) return a;
  return Expr::make(ExprKind::kFloorDiv, a, b);
}
Expr mod(const Expr& a, const Expr& b) { return Expr::make(ExprKind::kMod, a, b); }
Expr max(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(std::max(a.constant(), b.constant()));
  return Expr::make(ExprKind::kMax, a, b);
}

std::string_view cmp_text(Cmp c) {
  switch (c) {
    case Cmp::kLt: return "<";
    case Cmp::kLe: return "<=";
    case Cmp::kEq: return "=";
    case Cmp::kGe: return ">=";
    case Cmp::kGt: return ">";
    case Cmp::kNe: return "!=";
  }
  return "?";
}

std::string Predicate::to_string(const std::function<std::string(SymId)>& name) const {
  std::string out;
  for (std::size_t i = 0; i < any.size(); ++i) {
    if (i) out += " or ";
    out += any[i].lhs.to_string(name) + " " + std::string(cmp_text(any[i].cmp)) + " " +
           any[i].rhs.to_string(name);
  }
  return out;
}

namespace {
Predicate single(const Expr& a, Cmp c, const Expr& b) { return Predicate{{Comparison{a, c, b}}}; }
}  // namespace

Predicate operator<(const Expr& a, const Expr& b) { return single(a, Cmp::kLt, b); }
Predicate operator<=(const Expr& a, const Expr& b) { return single(a, Cmp::kLe, b); }
Predicate operator>(const Expr& a, const Expr& b) { return single(a, Cmp::kGt, b); }
Predicate operator>=(const Expr& a, const Expr& b) { return single(a, Cmp::kGe, b); }
Predicate eq(const Expr& a, const Expr& b) { return single(a, Cmp::kEq, b); }
Predicate ne(const Expr& a, const Expr& b) { return single(a, Cmp::kNe, b); }
Predicate operator||(const Predicate& a, const Predicate& b) {
  Predicate p = a;
  p.any.insert(p.any.end(), b.any.begin(), b.any.end());
  return p;
}

namespace {

BigInt big_floordiv(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;  // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::optional<BigInt> evaluate(const Expr& e, const Assignment& model) {
  switch (e.kind()) {
    case ExprKind::kConst: return BigInt(e.constant());
    case ExprKind::kVar:
      if (e.id() < 0 || static_cast<std::size_t>(e.id()) >= model.size()) return std::nullopt;
      return BigInt(model[static_cast<std::size_t>(e.id())]);
    default: break;
  }
  auto a = evaluate(e.lhs(), model);
  auto b = evaluate(e.rhs(), model);
  if (!a || !b) return std::nullopt;
  switch (e.kind()) {
    case ExprKind::kAdd: return *a + *b;
    case ExprKind::kSub: return *a - *b;
    case ExprKind::kMul: return *a * *b;
    case ExprKind::kFloorDiv:
      if (*b == 0) return std::nullopt;
      return big_floordiv(*a, *b);
    case ExprKind::kMod:
      if (*b == 0) return std::nullopt;
      return *a - big_floordiv(*a, *b) * *b;
    case ExprKind::kMax: return *a > *b ? *a : *b;
    default: return std::nullopt;
  }
}

bool holds(const Comparison& c, const Assignment& model) {
  auto l = evaluate(c.lhs, model);
  auto r = evaluate(c.rhs, model);
  if (!l || !r) return false;
  switch (c.cmp) {
    case Cmp::kLt: return *l < *r;
    case Cmp::kLe: return *l <= *r;
    case Cmp::kEq: return *l == *r;
    case Cmp::kGe: return *l >= *r;
    case Cmp::kGt: return *l > *r;
    case Cmp::kNe: return *l != *r;
  }
  return false;
}

bool holds(const Predicate& p, const Assignment& model) {
  return std::any_of(p.any.begin(), p.any.end(), [&](const Comparison& c) { return holds(c, model); });
}

std::int64_t evaluate_i64(const Expr& e, const Assignment& model) {
  auto v = evaluate(e, model);
  if (!v) throw std::overflow_error("expression is undefined under the model");
  if (*v > BigInt(INT64_MAX) || *v < BigInt(INT64_MIN)) {
    throw std::overflow_error("expression exceeds int64");
  }
  return static_cast<std::int64_t>(*v);
}

}  // namespace graphsmith::sym
