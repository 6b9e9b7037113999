// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/solver.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "graphsmith/rng.h"

namespace graphsmith {

using sym::Cmp;
using sym::Comparison;
using sym::Expr;
using sym::ExprKind;
using sym::Predicate;

namespace {

constexpr std::int64_t kInf = std::int64_t{1} << 62;
constexpr std::size_t kMaxNodes = 4000;
constexpr int kMaxRounds = 40;

std::int64_t clamp128(__int128 v) {
  if (v > kInf) return kInf;
  if (v < -kInf) return -kInf;
  return static_cast<std::int64_t>(v);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

struct Iv {
  std::int64_t lo, hi;
  bool empty() const { return lo > hi; }
  bool single() const { return lo == hi; }
  bool contains(std::int64_t v) const { return lo <= v && v <= hi; }
};

Iv meet(Iv a, Iv b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

using Domains = std::vector<Iv>;

class Propagator {
 public:
  explicit Propagator(const std::vector<Predicate>& cs) : cs_(cs) {}

  Iv fwd(const Expr& e, const Domains& d) const {
    switch (e.kind()) {
      case ExprKind::kConst: return {e.constant(), e.constant()};
      case ExprKind::kVar: return d[static_cast<std::size_t>(e.id())];
      default: break;
    }
    Iv a = fwd(e.lhs(), d), b = fwd(e.rhs(), d);
    if (a.empty() || b.empty()) return {1, 0};
    switch (e.kind()) {
      case ExprKind::kAdd:
        return {clamp128(__int128(a.lo) + b.lo), clamp128(__int128(a.hi) + b.hi)};
      case ExprKind::kSub:
        return {clamp128(__int128(a.lo) - b.hi), clamp128(__int128(a.hi) - b.lo)};
      case ExprKind::kMul: {
        std::array<__int128, 4> p{__int128(a.lo) * b.lo, __int128(a.lo) * b.hi,
                                  __int128(a.hi) * b.lo, __int128(a.hi) * b.hi};
        return {clamp128(*std::min_element(p.begin(), p.end())),
                clamp128(*std::max_element(p.begin(), p.end()))};
      }
      case ExprKind::kFloorDiv: {
        // Divisors are required to be positive by every spec.
        Iv bb{std::max<std::int64_t>(b.lo, 1), b.hi};
        if (bb.empty()) return {-kInf, kInf};
        std::array<std::int64_t, 4> q{floor_div(a.lo, bb.lo), floor_div(a.lo, bb.hi),
                                      floor_div(a.hi, bb.lo), floor_div(a.hi, bb.hi)};
        return {*std::min_element(q.begin(), q.end()), *std::max_element(q.begin(), q.end())};
      }
      case ExprKind::kMod: {
        if (b.lo < 1) return {-kInf, kInf};
        if (a.lo >= 0 && a.hi < b.lo) return a;
        if (a.lo >= 0) return {0, std::min(b.hi - 1, a.hi)};
        return {0, b.hi - 1};
      }
      case ExprKind::kMax: return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
      default: return {-kInf, kInf};
    }
  }

  // Shrinks variable domains so that e can still take a value inside t.
  bool narrow(const Expr& e, Iv t, Domains& d) {
    if (t.lo <= -kInf && t.hi >= kInf) return true;
    switch (e.kind()) {
      case ExprKind::kConst: return t.contains(e.constant());
      case ExprKind::kVar: {
        Iv& v = d[static_cast<std::size_t>(e.id())];
        Iv n = meet(v, t);
        if (n.empty()) return false;
        if (n.lo != v.lo || n.hi != v.hi) {
          v = n;
          changed_ = true;
        }
        return true;
      }
      default: break;
    }
    Iv a = fwd(e.lhs(), d), b = fwd(e.rhs(), d);
    if (a.empty() || b.empty()) return false;
    Iv self = fwd(e, d);
    if (meet(self, t).empty()) return false;
    switch (e.kind()) {
      case ExprKind::kAdd:
        return narrow(e.lhs(), {sub_lo(t.lo, b.hi), sub_hi(t.hi, b.lo)}, d) &&
               narrow(e.rhs(), {sub_lo(t.lo, fwd(e.lhs(), d).hi), sub_hi(t.hi, fwd(e.lhs(), d).lo)}, d);
      case ExprKind::kSub:
        return narrow(e.lhs(), {add_lo(t.lo, b.lo), add_hi(t.hi, b.hi)}, d) &&
               narrow(e.rhs(), {sub_lo(fwd(e.lhs(), d).lo, t.hi), sub_hi(fwd(e.lhs(), d).hi, t.lo)}, d);
      case ExprKind::kMul: {
        if (a.lo >= 0 && b.lo >= 0 && !t.contains(0) && t.hi >= 0) {
          if (!narrow(e.lhs(), {1, kInf}, d) || !narrow(e.rhs(), {1, kInf}, d)) return false;
          a = fwd(e.lhs(), d);
          b = fwd(e.rhs(), d);
        }
        if (b.lo >= 1 && !narrow(e.lhs(), quotient(t, b), d)) return false;
        a = fwd(e.lhs(), d);
        if (a.lo >= 1 && !narrow(e.rhs(), quotient(t, a), d)) return false;
        return true;
      }
      case ExprKind::kFloorDiv: {
        if (b.lo < 1) return true;
        std::int64_t lo = -kInf, hi = kInf;
        if (t.lo > -kInf) lo = clamp128(t.lo >= 0 ? __int128(t.lo) * b.lo : __int128(t.lo) * b.hi);
        if (t.hi < kInf) {
          __int128 n = __int128(t.hi) + 1;
          hi = clamp128(n >= 0 ? n * b.hi - 1 : n * b.lo - 1);
        }
        return narrow(e.lhs(), {lo, hi}, d);
      }
      case ExprKind::kMod: return true;
      case ExprKind::kMax: {
        if (!narrow(e.lhs(), {-kInf, t.hi}, d) || !narrow(e.rhs(), {-kInf, t.hi}, d)) return false;
        a = fwd(e.lhs(), d);
        b = fwd(e.rhs(), d);
        if (a.hi < t.lo && !narrow(e.rhs(), {t.lo, kInf}, d)) return false;
        if (b.hi < t.lo && !narrow(e.lhs(), {t.lo, kInf}, d)) return false;
        return true;
      }
      default: return true;
    }
  }

  static bool feasible(const Comparison& c, const Iv& l, const Iv& r) {
    switch (c.cmp) {
      case Cmp::kLt: return l.lo < r.hi;
      case Cmp::kLe: return l.lo <= r.hi;
      case Cmp::kGt: return l.hi > r.lo;
      case Cmp::kGe: return l.hi >= r.lo;
      case Cmp::kEq: return !meet(l, r).empty();
      case Cmp::kNe: return !(l.single() && r.single() && l.lo == r.lo);
    }
    return true;
  }

  bool revise(const Comparison& c, Domains& d) {
    Iv l = fwd(c.lhs, d), r = fwd(c.rhs, d);
    if (l.empty() || r.empty() || !feasible(c, l, r)) return false;
    switch (c.cmp) {
      case Cmp::kLt:
        return narrow(c.lhs, {-kInf, r.hi - 1}, d) && narrow(c.rhs, {fwd(c.lhs, d).lo + 1, kInf}, d);
      case Cmp::kLe:
        return narrow(c.lhs, {-kInf, r.hi}, d) && narrow(c.rhs, {fwd(c.lhs, d).lo, kInf}, d);
      case Cmp::kGt:
        return narrow(c.lhs, {r.lo + 1, kInf}, d) && narrow(c.rhs, {-kInf, fwd(c.lhs, d).hi - 1}, d);
      case Cmp::kGe:
        return narrow(c.lhs, {r.lo, kInf}, d) && narrow(c.rhs, {-kInf, fwd(c.lhs, d).hi}, d);
      case Cmp::kEq: {
        Iv m = meet(l, r);
        return narrow(c.lhs, m, d) && narrow(c.rhs, m, d);
      }
      case Cmp::kNe:
        return exclude(c.lhs, r, d) && exclude(c.rhs, l, d);
    }
    return true;
  }

  bool propagate(Domains& d) {
    for (int round = 0; round < kMaxRounds; ++round) {
      changed_ = false;
      for (const Predicate& p : cs_) {
        if (p.any.size() == 1) {
          if (!revise(p.any[0], d)) return false;
          continue;
        }
        const Comparison* only = nullptr;
        int alive = 0;
        for (const Comparison& c : p.any) {
          Iv l = fwd(c.lhs, d), r = fwd(c.rhs, d);
          if (!l.empty() && !r.empty() && feasible(c, l, r)) {
            ++alive;
            only = &c;
          }
        }
        if (alive == 0) return false;
        if (alive == 1 && !revise(*only, d)) return false;
      }
      if (!changed_) return true;
    }
    return true;
  }

 private:
  static std::int64_t sub_lo(std::int64_t x, std::int64_t y) {
    return x <= -kInf ? -kInf : clamp128(__int128(x) - y);
  }
  static std::int64_t sub_hi(std::int64_t x, std::int64_t y) {
    return x >= kInf ? kInf : clamp128(__int128(x) - y);
  }
  static std::int64_t add_lo(std::int64_t x, std::int64_t y) {
    return x <= -kInf ? -kInf : clamp128(__int128(x) + y);
  }
  static std::int64_t add_hi(std::int64_t x, std::int64_t y) {
    return x >= kInf ? kInf : clamp128(__int128(x) + y);
  }

  // Values x with x*y in t for some y in the strictly positive interval b.
  static Iv quotient(Iv t, Iv b) {
    std::int64_t lo = t.lo <= -kInf ? -kInf : std::min(ceil_div(t.lo, b.lo), ceil_div(t.lo, b.hi));
    std::int64_t hi = t.hi >= kInf ? kInf : std::max(floor_div(t.hi, b.lo), floor_div(t.hi, b.hi));
    return {lo, hi};
  }

  bool exclude(const Expr& e, Iv other, Domains& d) {
    if (!other.single() || !e.is_var()) return true;
    Iv& v = d[static_cast<std::size_t>(e.id())];
    if (v.lo == other.lo && v.lo < v.hi) {
      ++v.lo;
      changed_ = true;
    } else if (v.hi == other.lo && v.lo < v.hi) {
      --v.hi;
      changed_ = true;
    }
    return !(v.single() && v.lo == other.lo);
  }

  const std::vector<Predicate>& cs_;
  bool changed_ = false;
};

class Search {
 public:
  Search(const std::vector<SymbolInfo>& symbols, const std::vector<Predicate>& cs,
         const sym::Assignment* hint, const SolveOptions& o)
      : symbols_(symbols), cs_(cs), hint_(hint), opts_(o), prop_(cs), rng_(o.seed) {
    deadline_ = std::chrono::steady_clock::now() + o.budget;
    // Only symbols that occur in a constraint need branching.
    used_.assign(symbols.size(), false);
    std::vector<sym::SymId> ids;
    for (const Predicate& p : cs) {
      for (const Comparison& c : p.any) {
        c.lhs.collect(ids);
        c.rhs.collect(ids);
      }
    }
    for (sym::SymId id : ids) {
      if (id >= 0 && static_cast<std::size_t>(id) < used_.size()) used_[static_cast<std::size_t>(id)] = true;
    }
  }

  std::optional<sym::Assignment> run() {
    Domains d;
    d.reserve(symbols_.size());
    for (const SymbolInfo& s : symbols_) d.push_back({s.lo, s.hi});
    for (const Predicate& p : cs_) {
      for (const Comparison& c : p.any) {
        if (!ids_in_range(c.lhs) || !ids_in_range(c.rhs)) return std::nullopt;
      }
    }
    if (dfs(d)) return result_;
    return std::nullopt;
  }

 private:
  bool ids_in_range(const Expr& e) const {
    std::vector<sym::SymId> ids;
    e.collect(ids);
    return std::all_of(ids.begin(), ids.end(), [&](sym::SymId id) {
      return id >= 0 && static_cast<std::size_t>(id) < symbols_.size();
    });
  }

  std::optional<std::int64_t> hint(std::size_t i) const {
    if (hint_ && i < hint_->size() && (*hint_)[i] != kNoHint) return (*hint_)[i];
    return std::nullopt;
  }

  // Small values are more useful for shapes, so unhinted picks are log-uniform.
  std::int64_t pick(Iv v) {
    if (!opts_.randomize) return v.lo;
    double width = static_cast<double>(v.hi - v.lo) + 1.0;
    double u = rng_.uniform_real(0.0, std::log(width + 1.0));
    auto off = static_cast<std::int64_t>(std::floor(std::exp(u))) - 1;
    return std::clamp(v.lo + off, v.lo, v.hi);
  }

  bool out_of_budget() {
    if (++nodes_ > kMaxNodes) return true;
    return (nodes_ & 63) == 0 && std::chrono::steady_clock::now() > deadline_;
  }

  bool dfs(Domains d) {
    if (out_of_budget()) {
      exhausted_ = true;
      return false;
    }
    if (!prop_.propagate(d)) return false;
    // Unconstrained symbols take their hint or a sampled value directly.
    std::optional<std::size_t> var;
    std::uint64_t best_width = UINT64_MAX;
    bool best_hinted = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i].single()) continue;
      if (!used_[i]) continue;
      auto h = hint(i);
      bool hinted = h && d[i].contains(*h);
      auto width = static_cast<std::uint64_t>(d[i].hi - d[i].lo);
      if (!var || (hinted && !best_hinted) || (hinted == best_hinted && !hinted && width < best_width)) {
        var = i;
        best_width = width;
        best_hinted = hinted;
        if (hinted) break;
      }
    }
    if (!var) return finish(d);

    Iv v = d[*var];
    std::vector<Iv> branches;
    std::vector<std::int64_t> points;
    if (auto h = hint(*var); h && v.contains(*h)) points.push_back(*h);
    std::int64_t p = pick(v);
    if (std::find(points.begin(), points.end(), p) == points.end()) points.push_back(p);
    for (std::int64_t x : points) branches.push_back({x, x});
    std::sort(points.begin(), points.end());
    std::vector<Iv> rest;
    std::int64_t cur = v.lo;
    for (std::int64_t x : points) {
      if (cur <= x - 1) rest.push_back({cur, x - 1});
      cur = x + 1;
    }
    if (cur <= v.hi) rest.push_back({cur, v.hi});
    std::vector<Iv> halves;
    for (Iv r : rest) {
      if (r.hi - r.lo < 2) {
        halves.push_back(r);
        continue;
      }
      std::int64_t mid = r.lo + (r.hi - r.lo) / 2;
      halves.push_back({r.lo, mid});
      halves.push_back({mid + 1, r.hi});
    }
    if (opts_.randomize) rng_.shuffle(halves);
    branches.insert(branches.end(), halves.begin(), halves.end());

    for (Iv b : branches) {
      Domains next = d;
      next[*var] = b;
      if (dfs(std::move(next))) return true;
      if (exhausted_) return false;
    }
    return false;
  }

  bool finish(const Domains& d) {
    sym::Assignment m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i].single()) {
        m[i] = d[i].lo;
        continue;
      }
      auto h = hint(i);
      m[i] = (h && d[i].contains(*h)) ? *h : pick(d[i]);
    }
    for (const Predicate& p : cs_) {
      if (!sym::holds(p, m)) return false;
    }
    result_ = std::move(m);
    return true;
  }

  const std::vector<SymbolInfo>& symbols_;
  const std::vector<Predicate>& cs_;
  const sym::Assignment* hint_;
  SolveOptions opts_;
  Propagator prop_;
  Rng rng_;
  std::vector<bool> used_;
  std::chrono::steady_clock::time_point deadline_;
  std::size_t nodes_ = 0;
  bool exhausted_ = false;
  sym::Assignment result_;
};

std::string smt_expr(const Expr& e) {
  auto name = [](sym::SymId id) { return "s" + std::to_string(id); };
  auto lit = [](std::int64_t v) {
    return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v);
  };
  switch (e.kind()) {
    case ExprKind::kConst: return lit(e.constant());
    case ExprKind::kVar: return name(e.id());
    case ExprKind::kAdd: return "(+ " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case ExprKind::kSub: return "(- " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case ExprKind::kMul: return "(* " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case ExprKind::kFloorDiv: return "(div " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case ExprKind::kMod: return "(mod " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case ExprKind::kMax: {
      std::string a = smt_expr(e.lhs()), b = smt_expr(e.rhs());
      return "(ite (>= " + a + " " + b + ") " + a + " " + b + ")";
    }
  }
  return "0";
}

std::string smt_cmp(const Comparison& c) {
  std::string l = smt_expr(c.lhs), r = smt_expr(c.rhs);
  switch (c.cmp) {
    case Cmp::kLt: return "(< " + l + " " + r + ")";
    case Cmp::kLe: return "(<= " + l + " " + r + ")";
    case Cmp::kEq: return "(= " + l + " " + r + ")";
    case Cmp::kGe: return "(>= " + l + " " + r + ")";
    case Cmp::kGt: return "(> " + l + " " + r + ")";
    case Cmp::kNe: return "(not (= " + l + " " + r + "))";
  }
  return "true";
}

}  // namespace

std::optional<sym::Assignment> solve(const std::vector<SymbolInfo>& symbols,
                                     const std::vector<Predicate>& constraints,
                                     const sym::Assignment* hint, const SolveOptions& options) {
  Search s(symbols, constraints, hint, options);
  return s.run();
}

std::string to_smtlib2(const std::vector<SymbolInfo>& symbols, const std::vector<Predicate>& constraints) {
  std::ostringstream out;
  out << "(set-logic QF_NIA)\n";
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    out << "(declare-const s" << i << " Int) ; " << symbols[i].name << "\n";
  }
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    out << "(assert (and (<= " << smt_expr(Expr(symbols[i].lo)) << " s" << i << ") (<= s" << i << " "
        << smt_expr(Expr(symbols[i].hi)) << ")))\n";
  }
  for (const Predicate& p : constraints) {
    if (p.any.size() == 1) {
      out << "(assert " << smt_cmp(p.any[0]) << ")\n";
      continue;
    }
    out << "(assert (or";
    for (const Comparison& c : p.any) out << " " << smt_cmp(c);
    out << "))\n";
  }
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

std::optional<sym::Assignment> parse_smt_model(const std::string& output, const std::vector<SymbolInfo>& symbols) {
  std::istringstream in(output);
  std::string first;
  in >> first;
  if (first != "sat") return std::nullopt;
  sym::Assignment m(symbols.size());
  std::vector<bool> seen(symbols.size(), false);
  static const std::regex kDef(R"(\(define-fun\s+s(\d+)\s+\(\)\s+Int\s+(\(\s*-\s*(\d+)\s*\)|(\d+))\s*\))");
  for (auto it = std::sregex_iterator(output.begin(), output.end(), kDef); it != std::sregex_iterator(); ++it) {
    const std::smatch& mt = *it;
    std::size_t id = std::stoul(mt[1].str());
    if (id >= symbols.size()) return std::nullopt;
    m[id] = mt[3].matched ? -std::stoll(mt[3].str()) : std::stoll(mt[4].str());
    seen[id] = true;
  }
  // Symbols the solver left out are unconstrained; use their lower bound.
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (!seen[i]) m[i] = symbols[i].lo;
  }
  return m;
}

sym::SymId ConstraintStore::new_symbol(std::string name, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("empty domain for symbol " + name);
  symbols_.push_back({std::move(name), lo, hi});
  model_.push_back(lo);
  return static_cast<sym::SymId>(symbols_.size() - 1);
}

std::optional<sym::Assignment> ConstraintStore::run(const std::vector<Predicate>& constraints,
                                                    const sym::Assignment* hint, const SolveOptions& o) const {
  if (external_.empty()) return solve(symbols_, constraints, hint, o);
  char path[] = "/tmp/graphsmith-smt-XXXXXX";
  int fd = mkstemp(path);
  if (fd < 0) return std::nullopt;
  {
    std::ofstream f(path);
    f << to_smtlib2(symbols_, constraints);
  }
  std::string output;
  if (FILE* p = popen(("(" + external_ + ") < " + path).c_str(), "r")) {
    std::array<char, 4096> buf{};
    while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) output.append(buf.data(), n);
    pclose(p);
  }
  ::close(fd);
  std::remove(path);
  auto m = parse_smt_model(output, symbols_);
  if (!m) return std::nullopt;
  for (const Predicate& c : constraints) {
    if (!sym::holds(c, *m)) return std::nullopt;
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if ((*m)[i] < symbols_[i].lo || (*m)[i] > symbols_[i].hi) return std::nullopt;
  }
  return m;
}

bool ConstraintStore::try_add_constraints(const std::vector<Predicate>& c,
                                          const std::map<sym::SymId, std::int64_t>& prefer) {
  std::vector<Predicate> all = committed_;
  all.insert(all.end(), c.begin(), c.end());
  // Symbols introduced since the last commit carry placeholder values, not hints.
  sym::Assignment hint(model_.begin(), model_.begin() + static_cast<std::ptrdiff_t>(hinted_));
  std::vector<bool> has(model_.size(), false);
  std::fill(has.begin(), has.begin() + static_cast<std::ptrdiff_t>(hinted_), true);
  hint.resize(model_.size(), 0);
  for (const auto& [id, v] : prefer) {
    if (id < 0 || static_cast<std::size_t>(id) >= hint.size()) continue;
    hint[static_cast<std::size_t>(id)] = v;
    has[static_cast<std::size_t>(id)] = true;
  }
  for (std::size_t i = 0; i < hint.size(); ++i) {
    if (!has[i]) hint[i] = kNoHint;
  }
  SolveOptions o;
  o.budget = budget_;
  auto m = run(all, &hint, o);
  if (!m) return false;
  committed_ = std::move(all);
  model_ = std::move(*m);
  hinted_ = model_.size();
  return true;
}

sym::Assignment ConstraintStore::randomize_model(std::uint64_t seed) const {
  SolveOptions o;
  o.budget = budget_;
  o.randomize = true;
  o.seed = splitmix64(seed_ ^ seed);
  auto m = run(committed_, nullptr, o);
  return m ? *m : model_;
}

std::string ConstraintStore::dump() const {
  auto nm = [this](sym::SymId id) { return name(id); };
  std::string out;
  for (const Predicate& p : committed_) out += p.to_string(nm) + "\n";
  return out;
}

}  // namespace graphsmith
