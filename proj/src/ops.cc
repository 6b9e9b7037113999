// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Built-in operator specs.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphsmith/opspec.h"

namespace graphsmith {
namespace {

using sym::Expr;
using sym::Predicate;
using Preds = std::vector<Predicate>;
using Ins = std::span<const AbsTensor>;

constexpr int kMaxRank = 4;
const std::vector<DType> kFloats = {DType::kF32, DType::kF64};
const std::vector<DType> kNumeric = {DType::kF32, DType::kF64, DType::kI32, DType::kI64};

Expr product(const std::vector<Expr>& dims) {
  Expr p(1);
  for (const Expr& d : dims) p = p * d;
  return p;
}

// Fresh inputs for every menu slot; transfer equalities tie them to outputs.
std::vector<AbsTensor> fresh_inputs(const OpInstance& inst, ConstraintStore& store) {
  std::vector<AbsTensor> ins;
  for (std::size_t i = 0; i < inst.sig.inputs.size(); ++i) {
    ins.push_back(fresh_tensor(store, inst.sig.inputs[i].dtype, inst.sig.inputs[i].rank,
                               inst.spec->name + ".in" + std::to_string(i)));
  }
  return ins;
}

auto fresh_infer() {
  return [](const OpInstance& inst, Ins, ConstraintStore& store) { return fresh_inputs(inst, store); };
}

// ---------------------------------------------------------------------------
// Vulnerable-operator predicates

double left_sign(double x) { return x > 0 ? 1.0 : -1.0; }

TensorInequality nonneg(int slot) {
  return {"-X <= 0", false, {slot}, [](std::span<const double> v) { return -v[0]; },
          [](std::span<const double>, std::span<double> g) { g[0] = -1.0; }};
}

TensorInequality positive(int slot) {
  return {"-X < 0", true, {slot}, [](std::span<const double> v) { return -v[0]; },
          [](std::span<const double>, std::span<double> g) { g[0] = -1.0; }};
}

TensorInequality unit_interval(int slot) {
  return {"|X| - 1 <= 0", false, {slot}, [](std::span<const double> v) { return std::fabs(v[0]) - 1.0; },
          [](std::span<const double> v, std::span<double> g) { g[0] = left_sign(v[0]); }};
}

TensorInequality nonzero(int slot) {
  return {"-|Y| < 0", true, {slot}, [](std::span<const double> v) { return -std::fabs(v[0]); },
          [](std::span<const double> v, std::span<double> g) { g[0] = -left_sign(v[0]); }};
}

TensorInequality pow_magnitude() {
  return {"Y * ln(X) - 40 <= 0", false, {0, 1},
          [](std::span<const double> v) { return v[1] * std::log(v[0]) - 40.0; },
          [](std::span<const double> v, std::span<double> g) {
            g[0] = v[1] / v[0];
            g[1] = std::log(v[0]);
          }};
}

// ---------------------------------------------------------------------------
// Elementwise

OpSpec unary(const std::string& name, const std::vector<DType>& dtypes,
             std::vector<TensorInequality> vulns = {}) {
  OpSpec s;
  s.name = name;
  s.kernel = name;
  s.meta = MetaKind::kElementwiseUnary;
  s.arity = 1;
  for (DType dt : dtypes) {
    for (int r = 0; r <= kMaxRank; ++r) s.menu.push_back({{{dt, r}}, {{dt, r}}});
  }
  s.transfer_fn = [](const OpInstance&, Ins in) { return std::vector<AbsTensor>{in[0]}; };
  s.infer_fn = [](const OpInstance&, Ins out, ConstraintStore&) { return std::vector<AbsTensor>{out[0]}; };
  s.vulnerabilities = std::move(vulns);
  return s;
}

OpSpec binary_same(const std::string& name, const std::vector<DType>& dtypes, bool out_bool,
                   std::vector<TensorInequality> vulns = {}) {
  OpSpec s;
  s.name = name;
  s.kernel = name;
  s.meta = MetaKind::kElementwiseBinary;
  s.arity = 2;
  for (DType dt : dtypes) {
    for (int r = 0; r <= kMaxRank; ++r) {
      s.menu.push_back({{{dt, r}, {dt, r}}, {{out_bool ? DType::kBool : dt, r}}});
    }
  }
  s.requires_fn = [](const OpInstance&, Ins in) {
    Preds p;
    for (int i = 0; i < in[0].rank(); ++i) p.push_back(sym::eq(in[0].shape[i], in[1].shape[i]));
    return p;
  };
  s.transfer_fn = [out_bool](const OpInstance&, Ins in) {
    AbsTensor t = in[0];
    if (out_bool) t.dtype = DType::kBool;
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = [](const OpInstance& inst, Ins out, ConstraintStore&) {
    AbsTensor t{inst.sig.inputs[0].dtype, out[0].shape};
    return std::vector<AbsTensor>{t, t};
  };
  s.vulnerabilities = std::move(vulns);
  return s;
}

// Broadcast rule over right-aligned dims of any number of operands.
void broadcast_rule(Ins in, Preds* preds, std::vector<Expr>* out_shape) {
  int rank = 0;
  for (const AbsTensor& t : in) rank = std::max(rank, t.rank());
  for (int pos = 0; pos < rank; ++pos) {
    std::vector<Expr> dims;
    for (const AbsTensor& t : in) {
      const int i = t.rank() - rank + pos;
      if (i >= 0) dims.push_back(t.shape[i]);
    }
    Expr out = dims[0];
    for (std::size_t k = 1; k < dims.size(); ++k) out = sym::max(out, dims[k]);
    if (preds && dims.size() > 1) {
      if (dims.size() == 2) {
        preds->push_back(sym::eq(dims[0], dims[1]) || sym::eq(dims[0], 1) || sym::eq(dims[1], 1));
      } else {
        for (const Expr& d : dims) preds->push_back(sym::eq(d, out) || sym::eq(d, 1));
      }
    }
    if (out_shape) out_shape->push_back(out);
  }
}

OpSpec binary_bcast(const std::string& name, const std::vector<DType>& dtypes, bool out_bool,
                    std::vector<TensorInequality> vulns = {}) {
  OpSpec s;
  s.name = name + ".bcast";
  s.kernel = name;
  s.meta = MetaKind::kBroadcast;
  s.arity = 2;
  for (DType dt : dtypes) {
    for (int ra = 0; ra <= kMaxRank; ++ra) {
      for (int rb = 0; rb <= kMaxRank; ++rb) {
        s.menu.push_back({{{dt, ra}, {dt, rb}}, {{out_bool ? DType::kBool : dt, std::max(ra, rb)}}});
      }
    }
  }
  s.requires_fn = [](const OpInstance&, Ins in) {
    Preds p;
    broadcast_rule(in, &p, nullptr);
    return p;
  };
  s.transfer_fn = [out_bool](const OpInstance&, Ins in) {
    AbsTensor t{out_bool ? DType::kBool : in[0].dtype, {}};
    broadcast_rule(in, nullptr, &t.shape);
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  s.vulnerabilities = std::move(vulns);
  return s;
}

// ---------------------------------------------------------------------------
// Linear algebra and windows

OpSpec matmul() {
  OpSpec s;
  s.name = "MatMul";
  s.kernel = "MatMul";
  s.arity = 2;
  const std::vector<std::array<int, 3>> ranks = {{2, 2, 2}, {1, 2, 1}, {2, 1, 1}, {1, 1, 0}, {3, 3, 3}};
  for (DType dt : kFloats) {
    for (const auto& r : ranks) s.menu.push_back({{{dt, r[0]}, {dt, r[1]}}, {{dt, r[2]}}});
  }
  // Contracted dim of each operand.
  auto k_of = [](const AbsTensor& t, bool lhs) {
    if (t.rank() == 1) return t.shape[0];
    return lhs ? t.shape[t.rank() - 1] : t.shape[t.rank() - 2];
  };
  s.requires_fn = [k_of](const OpInstance&, Ins in) {
    Preds p{sym::eq(k_of(in[0], true), k_of(in[1], false))};
    if (in[0].rank() == 3) p.push_back(sym::eq(in[0].shape[0], in[1].shape[0]));
    return p;
  };
  s.transfer_fn = [](const OpInstance&, Ins in) {
    const AbsTensor &a = in[0], &b = in[1];
    AbsTensor t{a.dtype, {}};
    if (a.rank() == 3) t.shape = {a.shape[0], a.shape[1], b.shape[2]};
    else if (a.rank() == 2 && b.rank() == 2) t.shape = {a.shape[0], b.shape[1]};
    else if (a.rank() == 1 && b.rank() == 2) t.shape = {b.shape[1]};
    else if (a.rank() == 2 && b.rank() == 1) t.shape = {a.shape[0]};
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

// Output extent of a sliding window along one spatial dim.
Expr window_out(const Expr& in, const Expr& k, const Expr& pad, const Expr& stride) {
  return sym::floordiv(in - k + Expr(2) * pad, stride) + 1;
}

OpSpec conv2d() {
  OpSpec s;
  s.name = "Conv2d";
  s.kernel = "Conv2d";
  s.arity = 2;
  s.attrs = {{"stride", 1, kAttrMax}, {"pad", 0, kAttrMax}};
  for (DType dt : kFloats) s.menu.push_back({{{dt, 4}, {dt, 4}}, {{dt, 4}}});
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore& store, Rng&) {
    inst.add_attr(store, "stride", "stride", kAttrMin, kAttrMax);
    inst.add_attr(store, "pad", "pad", kAttrMin, kAttrMax);
  };
  s.requires_fn = [](const OpInstance& inst, Ins in) {
    const auto &x = in[0].shape, &w = in[1].shape;
    const Expr &stride = inst.a("stride"), &pad = inst.a("pad");
    return Preds{stride > 0,
                 pad >= 0,
                 sym::eq(x[1], w[1]),
                 w[2] <= Expr(2) * pad + x[2],
                 w[3] <= Expr(2) * pad + x[3],
                 // Keeps the reference convolution cheap.
                 w[1] * w[2] * w[3] <= 512};
  };
  s.transfer_fn = [](const OpInstance& inst, Ins in) {
    const auto &x = in[0].shape, &w = in[1].shape;
    const Expr &stride = inst.a("stride"), &pad = inst.a("pad");
    AbsTensor t{in[0].dtype,
                {x[0], w[0], window_out(x[2], w[2], pad, stride), window_out(x[3], w[3], pad, stride)}};
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

OpSpec pool(const std::string& name) {
  OpSpec s;
  s.name = name;
  s.kernel = name;
  s.arity = 1;
  s.attrs = {{"kh", 1, kDimMax}, {"kw", 1, kDimMax}, {"stride", 1, kAttrMax}, {"pad", 0, kAttrMax}};
  for (DType dt : kFloats) s.menu.push_back({{{dt, 4}}, {{dt, 4}}});
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore& store, Rng&) {
    // Window extents share the dimension bound; larger windows only add padding.
    inst.add_attr(store, "kh", "kernel", kAttrMin, kDimMax);
    inst.add_attr(store, "kw", "kernel", kAttrMin, kDimMax);
    inst.add_attr(store, "stride", "stride", kAttrMin, kAttrMax);
    inst.add_attr(store, "pad", "pad", kAttrMin, kAttrMax);
  };
  s.requires_fn = [](const OpInstance& inst, Ins in) {
    const auto& x = in[0].shape;
    const Expr &kh = inst.a("kh"), &kw = inst.a("kw"), &stride = inst.a("stride"), &pad = inst.a("pad");
    return Preds{kw > 0,
                 kh > 0,
                 stride > 0,
                 pad >= 0,
                 kw <= Expr(2) * pad + x[3],
                 kh <= Expr(2) * pad + x[2],
                 // A window must overlap real input.
                 Expr(2) * pad <= kh,
                 Expr(2) * pad <= kw};
  };
  s.transfer_fn = [](const OpInstance& inst, Ins in) {
    const auto& x = in[0].shape;
    const Expr &kh = inst.a("kh"), &kw = inst.a("kw"), &stride = inst.a("stride"), &pad = inst.a("pad");
    AbsTensor t{in[0].dtype, {x[0], x[1], window_out(x[2], kh, pad, stride), window_out(x[3], kw, pad, stride)}};
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

OpSpec softmax() {
  OpSpec s;
  s.name = "Softmax";
  s.kernel = "Softmax";
  s.arity = 1;
  for (DType dt : kFloats) {
    for (int r = 1; r <= kMaxRank; ++r) s.menu.push_back({{{dt, r}}, {{dt, r}}});
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore&, Rng& rng) {
    inst.fixed_attrs["axis"] = rng.uniform_int(0, inst.sig.inputs[0].rank - 1);
  };
  s.transfer_fn = [](const OpInstance&, Ins in) { return std::vector<AbsTensor>{in[0]}; };
  s.infer_fn = [](const OpInstance&, Ins out, ConstraintStore&) { return std::vector<AbsTensor>{out[0]}; };
  return s;
}

// ---------------------------------------------------------------------------
// Shape manipulation

OpSpec reshape() {
  OpSpec s;
  s.name = "Reshape";
  s.kernel = "Reshape";
  s.meta = MetaKind::kShape;
  s.arity = 1;
  for (DType dt : kNumeric) {
    for (int ri = 1; ri <= kMaxRank; ++ri) {
      for (int ro = 1; ro <= kMaxRank; ++ro) s.menu.push_back({{{dt, ri}}, {{dt, ro}}});
    }
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore& store, Rng&) {
    for (int i = 0; i < inst.sig.outputs[0].rank; ++i) {
      inst.add_attr(store, "dim" + std::to_string(i), "dim", kDimMin, kDimMax);
    }
  };
  auto target = [](const OpInstance& inst) {
    std::vector<Expr> dims;
    for (int i = 0; i < inst.sig.outputs[0].rank; ++i) dims.push_back(inst.a("dim" + std::to_string(i)));
    return dims;
  };
  s.requires_fn = [target](const OpInstance& inst, Ins in) {
    const auto dims = target(inst);
    Preds p{sym::eq(product(dims), product(in[0].shape))};
    for (const Expr& d : dims) p.push_back(d >= 1);
    return p;
  };
  s.transfer_fn = [target](const OpInstance& inst, Ins in) {
    return std::vector<AbsTensor>{{in[0].dtype, target(inst)}};
  };
  s.infer_fn = fresh_infer();
  return s;
}

OpSpec slice() {
  OpSpec s;
  s.name = "Slice";
  s.kernel = "Slice";
  s.meta = MetaKind::kShape;
  s.arity = 1;
  for (DType dt : kNumeric) {
    for (int r = 1; r <= kMaxRank; ++r) s.menu.push_back({{{dt, r}}, {{dt, r}}});
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore& store, Rng& rng) {
    inst.fixed_attrs["axis"] = rng.uniform_int(0, inst.sig.inputs[0].rank - 1);
    inst.add_attr(store, "start", "start", kAttrMin, kAttrMax);
    inst.add_attr(store, "end", "end", kAttrMin, kAttrMax);
    inst.add_attr(store, "step", "step", kAttrMin, kAttrMax);
  };
  s.requires_fn = [](const OpInstance& inst, Ins in) {
    const Expr& dim = in[0].shape[static_cast<std::size_t>(inst.fixed("axis"))];
    const Expr &start = inst.a("start"), &end = inst.a("end"), &step = inst.a("step");
    return Preds{start >= 0, start < end, end <= dim, step >= 1};
  };
  s.transfer_fn = [](const OpInstance& inst, Ins in) {
    AbsTensor t = in[0];
    const Expr &start = inst.a("start"), &end = inst.a("end"), &step = inst.a("step");
    t.shape[static_cast<std::size_t>(inst.fixed("axis"))] = sym::floordiv(end - start - 1, step) + 1;
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

OpSpec concat() {
  OpSpec s;
  s.name = "Concat";
  s.kernel = "Concat";
  s.meta = MetaKind::kShape;
  s.arity = 2;
  for (DType dt : kNumeric) {
    for (int r = 1; r <= kMaxRank; ++r) s.menu.push_back({{{dt, r}, {dt, r}}, {{dt, r}}});
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore&, Rng& rng) {
    inst.fixed_attrs["axis"] = rng.uniform_int(0, inst.sig.inputs[0].rank - 1);
  };
  s.requires_fn = [](const OpInstance& inst, Ins in) {
    Preds p;
    for (int i = 0; i < in[0].rank(); ++i) {
      if (i != inst.fixed("axis")) p.push_back(sym::eq(in[0].shape[i], in[1].shape[i]));
    }
    return p;
  };
  s.transfer_fn = [](const OpInstance& inst, Ins in) {
    AbsTensor t = in[0];
    const auto axis = static_cast<std::size_t>(inst.fixed("axis"));
    t.shape[axis] = in[0].shape[axis] + in[1].shape[axis];
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

OpSpec transpose() {
  OpSpec s;
  s.name = "Transpose";
  s.kernel = "Transpose";
  s.meta = MetaKind::kShape;
  s.arity = 1;
  for (DType dt : kNumeric) {
    for (int r = 2; r <= kMaxRank; ++r) s.menu.push_back({{{dt, r}}, {{dt, r}}});
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore&, Rng& rng) {
    const int rank = inst.sig.inputs[0].rank;
    std::vector<int> perm(static_cast<std::size_t>(rank));
    std::iota(perm.begin(), perm.end(), 0);
    // Identity permutations are not interesting.
    while (std::is_sorted(perm.begin(), perm.end())) rng.shuffle(perm);
    for (int i = 0; i < rank; ++i) inst.fixed_attrs["perm" + std::to_string(i)] = perm[i];
  };
  s.transfer_fn = [](const OpInstance& inst, Ins in) {
    AbsTensor t = in[0];
    for (int i = 0; i < t.rank(); ++i) t.shape[i] = in[0].shape[inst.fixed("perm" + std::to_string(i))];
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = [](const OpInstance& inst, Ins out, ConstraintStore&) {
    AbsTensor t = out[0];
    for (int i = 0; i < t.rank(); ++i) t.shape[inst.fixed("perm" + std::to_string(i))] = out[0].shape[i];
    return std::vector<AbsTensor>{t};
  };
  return s;
}

OpSpec broadcast_to() {
  OpSpec s;
  s.name = "BroadcastTo";
  s.kernel = "BroadcastTo";
  s.meta = MetaKind::kBroadcast;
  s.arity = 1;
  for (DType dt : kNumeric) {
    for (int ri = 0; ri <= kMaxRank; ++ri) {
      for (int ro = std::max(ri, 1); ro <= kMaxRank; ++ro) s.menu.push_back({{{dt, ri}}, {{dt, ro}}});
    }
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore& store, Rng&) {
    for (int i = 0; i < inst.sig.outputs[0].rank; ++i) {
      inst.add_attr(store, "dim" + std::to_string(i), "dim", kDimMin, kDimMax);
    }
  };
  s.requires_fn = [](const OpInstance& inst, Ins in) {
    Preds p;
    const int ro = inst.sig.outputs[0].rank;
    for (int i = 0; i < ro; ++i) {
      const Expr& d = inst.a("dim" + std::to_string(i));
      p.push_back(d >= 1);
      const int j = in[0].rank() - ro + i;
      if (j >= 0) p.push_back(sym::eq(in[0].shape[j], d) || sym::eq(in[0].shape[j], 1));
    }
    return p;
  };
  s.transfer_fn = [](const OpInstance& inst, Ins in) {
    AbsTensor t{in[0].dtype, {}};
    for (int i = 0; i < inst.sig.outputs[0].rank; ++i) t.shape.push_back(inst.a("dim" + std::to_string(i)));
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

enum class PadKind { kConstant = 0, kReflect = 1, kReplicate = 2 };

OpSpec pad(const std::string& name, PadKind kind) {
  OpSpec s;
  s.name = name;
  s.kernel = "Pad";
  s.meta = MetaKind::kShape;
  s.arity = 1;
  for (DType dt : kNumeric) {
    for (int r = 1; r <= kMaxRank; ++r) s.menu.push_back({{{dt, r}}, {{dt, r}}});
  }
  // Only the trailing (at most two) dims are padded.
  auto padded = [](int rank) { return std::max(0, rank - 2); };
  s.instantiate_attrs = [kind, padded](OpInstance& inst, ConstraintStore& store, Rng& rng) {
    inst.fixed_attrs["mode"] = static_cast<std::int64_t>(kind);
    if (kind == PadKind::kConstant) inst.fixed_attrs["value"] = rng.coin(0.5) ? 1 : 0;
    const int rank = inst.sig.inputs[0].rank;
    const std::int64_t lo = kind == PadKind::kConstant ? -kDimMax : kAttrMin;
    for (int i = padded(rank); i < rank; ++i) {
      inst.add_attr(store, "lo" + std::to_string(i), "pad", lo, kAttrMax);
      inst.add_attr(store, "hi" + std::to_string(i), "pad", lo, kAttrMax);
    }
  };
  s.requires_fn = [kind, padded](const OpInstance& inst, Ins in) {
    Preds p;
    const int rank = in[0].rank();
    for (int i = padded(rank); i < rank; ++i) {
      const Expr& dim = in[0].shape[i];
      const Expr &lo = inst.a("lo" + std::to_string(i)), &hi = inst.a("hi" + std::to_string(i));
      switch (kind) {
        case PadKind::kConstant:
          p.push_back(lo + dim >= 1);
          p.push_back(hi + dim >= 1);
          break;
        case PadKind::kReflect:
          p.insert(p.end(), {lo >= 0, hi >= 0, lo < dim, hi < dim});
          break;
        case PadKind::kReplicate:
          p.insert(p.end(), {lo >= 0, hi >= 0});
          break;
      }
    }
    return p;
  };
  s.transfer_fn = [padded](const OpInstance& inst, Ins in) {
    AbsTensor t = in[0];
    for (int i = padded(t.rank()); i < t.rank(); ++i) {
      t.shape[i] = in[0].shape[i] + inst.a("lo" + std::to_string(i)) + inst.a("hi" + std::to_string(i));
    }
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

OpSpec where() {
  OpSpec s;
  s.name = "Where";
  s.kernel = "Where";
  s.meta = MetaKind::kBroadcast;
  s.arity = 3;
  for (DType dt : kNumeric) {
    for (int rc = 0; rc <= 3; ++rc) {
      for (int rt = 0; rt <= 3; ++rt) {
        for (int rf = 0; rf <= 3; ++rf) {
          s.menu.push_back({{{DType::kBool, rc}, {dt, rt}, {dt, rf}}, {{dt, std::max({rc, rt, rf})}}});
        }
      }
    }
  }
  s.requires_fn = [](const OpInstance&, Ins in) {
    Preds p;
    broadcast_rule(in, &p, nullptr);
    return p;
  };
  s.transfer_fn = [](const OpInstance&, Ins in) {
    AbsTensor t{in[1].dtype, {}};
    broadcast_rule(in, nullptr, &t.shape);
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = fresh_infer();
  return s;
}

OpSpec reduce(const std::string& name, const std::vector<DType>& dtypes, bool to_index) {
  OpSpec s;
  s.name = name;
  s.kernel = name;
  s.meta = MetaKind::kReduce;
  s.arity = 1;
  for (DType dt : dtypes) {
    for (int r = 1; r <= kMaxRank; ++r) s.menu.push_back({{{dt, r}}, {{to_index ? DType::kI64 : dt, r - 1}}});
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore&, Rng& rng) {
    inst.fixed_attrs["axis"] = rng.uniform_int(0, inst.sig.inputs[0].rank - 1);
  };
  s.transfer_fn = [to_index](const OpInstance& inst, Ins in) {
    AbsTensor t = in[0];
    if (to_index) t.dtype = DType::kI64;
    t.shape.erase(t.shape.begin() + inst.fixed("axis"));
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = [](const OpInstance& inst, Ins out, ConstraintStore& store) {
    AbsTensor t{inst.sig.inputs[0].dtype, out[0].shape};
    const auto axis = inst.fixed("axis");
    t.shape.insert(t.shape.begin() + axis, Expr::var(store.new_dim(inst.spec->name + ".reduced")));
    return std::vector<AbsTensor>{t};
  };
  return s;
}

OpSpec cast() {
  OpSpec s;
  s.name = "Cast";
  s.kernel = "Cast";
  s.arity = 1;
  for (DType from : kAllDTypes) {
    for (DType to : kAllDTypes) {
      if (from == to) continue;
      for (int r = 0; r <= kMaxRank; ++r) s.menu.push_back({{{from, r}}, {{to, r}}});
    }
  }
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore&, Rng&) {
    inst.fixed_attrs["to"] = static_cast<std::int64_t>(inst.sig.outputs[0].dtype);
  };
  s.transfer_fn = [](const OpInstance& inst, Ins in) {
    AbsTensor t = in[0];
    t.dtype = inst.sig.outputs[0].dtype;
    return std::vector<AbsTensor>{t};
  };
  s.infer_fn = [](const OpInstance& inst, Ins out, ConstraintStore&) {
    return std::vector<AbsTensor>{{inst.sig.inputs[0].dtype, out[0].shape}};
  };
  return s;
}

OpSpec clip() {
  OpSpec s = unary("Clip", kNumeric);
  s.instantiate_attrs = [](OpInstance& inst, ConstraintStore&, Rng& rng) {
    inst.fixed_attrs["lo"] = rng.uniform_int(-4, 0);
    inst.fixed_attrs["hi"] = rng.uniform_int(1, 4);
  };
  return s;
}

OpSpec leaf(const std::string& name) {
  OpSpec s;
  s.name = name;
  s.kernel = name;
  s.arity = 0;
  return s;
}

}  // namespace

void register_standard_ops(Registry& r) {
  r.add(leaf("Input"));
  r.add(leaf("Constant"));

  r.add(unary("Sqrt", kFloats, {nonneg(0)}));
  r.add(unary("Log2", kFloats, {positive(0)}));
  r.add(unary("Asin", kFloats, {unit_interval(0)}));
  r.add(unary("Sigmoid", kFloats));
  r.add(unary("Tanh", kFloats));
  r.add(unary("ReLU", kNumeric));
  r.add(unary("LeakyReLU", kFloats));
  r.add(unary("Floor", kFloats));
  r.add(unary("Ceil", kFloats));
  r.add(clip());
  r.add(unary("Abs", kNumeric));
  r.add(unary("Neg", kNumeric));

  struct Bin {
    const char* name;
    std::vector<DType> dtypes;
    bool out_bool;
    std::vector<TensorInequality> vulns;
  };
  const std::vector<Bin> binaries = {
      {"Add", kNumeric, false, {}},
      {"Sub", kNumeric, false, {}},
      {"Mul", kNumeric, false, {}},
      {"Div", kFloats, false, {nonzero(1)}},
      {"Pow", kFloats, false, {positive(0), pow_magnitude()}},
      {"Mod", kFloats, false, {nonzero(1)}},
      {"Equal", kNumeric, true, {}},
  };
  for (const Bin& b : binaries) {
    r.add(binary_same(b.name, b.dtypes, b.out_bool, b.vulns));
    r.add(binary_bcast(b.name, b.dtypes, b.out_bool, b.vulns));
  }

  r.add(matmul());
  r.add(conv2d());
  r.add(pool("MaxPool2d"));
  r.add(pool("AvgPool2d"));
  r.add(softmax());
  r.add(reshape());
  r.add(slice());
  r.add(concat());
  r.add(transpose());
  r.add(broadcast_to());
  r.add(pad("ConstPad", PadKind::kConstant));
  r.add(pad("ReflectPad", PadKind::kReflect));
  r.add(pad("ReplicatePad", PadKind::kReplicate));
  r.add(where());
  r.add(reduce("ReduceSum", kNumeric, false));
  r.add(reduce("ReduceMax", kNumeric, false));
  r.add(reduce("ReduceMean", kFloats, false));
  r.add(reduce("ArgMax", kNumeric, true));
  r.add(cast());
}

}  // namespace graphsmith
