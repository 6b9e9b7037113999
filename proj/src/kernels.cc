// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace graphsmith {

std::string type_to_string(const TensorType& t) {
  return std::string(dtype_name(t.dtype)) + shape_to_string(t.shape);
}

bool is_leaf_op(std::string_view op) {
  return op == "Input" || op == "Weight" || op == "Constant";
}

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    const std::int64_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ShapeMismatch("cannot broadcast " + shape_to_string(a) + " with " +
                          shape_to_string(b));
    }
    out[rank - 1 - i] = da == 1 ? db : da;
  }
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& op, const std::string& what) {
  throw ShapeMismatch(op + ": " + what);
}

std::int64_t attr(const Attrs& attrs, const std::string& key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) throw ShapeMismatch("missing attribute '" + key + "'");
  return it->second;
}

std::int64_t attr_or(const Attrs& attrs, const std::string& key, std::int64_t dflt) {
  auto it = attrs.find(key);
  return it == attrs.end() ? dflt : it->second;
}

// Flat source index in `in` for every element of `out` under broadcasting.
std::vector<std::int64_t> broadcast_map(const Shape& out, const Shape& in) {
  const auto n = num_elements(out);
  std::vector<std::int64_t> map(static_cast<std::size_t>(n));
  const auto out_strides = strides_of(out);
  const auto in_strides = strides_of(in);
  const int offset = static_cast<int>(out.size() - in.size());
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t rem = i, src = 0;
    for (std::size_t d = 0; d < out.size(); ++d) {
      const std::int64_t coord = rem / out_strides[d];
      rem %= out_strides[d];
      const int id = static_cast<int>(d) - offset;
      if (id >= 0 && in[id] != 1) src += coord * in_strides[id];
    }
    map[static_cast<std::size_t>(i)] = src;
  }
  return map;
}

void check_arity(const std::string& op, std::size_t got, int want) {
  if (static_cast<int>(got) != want) {
    fail(op, "expects " + std::to_string(want) + " inputs, got " + std::to_string(got));
  }
}

// ---------------------------------------------------------------------------
// Elementwise unary

struct UnaryRule {
  std::function<double(double, const Attrs&)> f;
  // Derivative at x given output y; nullopt-like NaN means "not differentiable".
  std::function<double(double x, double y, const Attrs&)> df;
  bool float_only = true;
};

Kernel make_unary(const std::string& name, UnaryRule rule) {
  Kernel k;
  k.name = name;
  k.arity = 1;
  k.elementwise_unary = true;
  const bool float_only = rule.float_only;
  k.infer = [name, float_only](std::span<const TensorType> in, const Attrs&) {
    check_arity(name, in.size(), 1);
    if (float_only && !is_float(in[0].dtype)) fail(name, "requires a float input");
    if (in[0].dtype == DType::kBool) fail(name, "does not accept bool");
    return in[0];
  };
  auto f = rule.f;
  k.compute = [f](std::span<const Tensor* const> in, const Attrs& attrs) {
    const Tensor& x = *in[0];
    std::vector<double> out(static_cast<std::size_t>(x.size()));
    for (std::int64_t i = 0; i < x.size(); ++i) out[i] = f(x[i], attrs);
    return Tensor(x.dtype(), x.shape(), std::move(out));
  };
  auto df = rule.df;
  const ProxyDerivativeSpec* proxy = find_proxy(name);
  k.vjp = [df, proxy](const VjpArgs& a) {
    const Tensor& x = *a.inputs[0];
    if (!is_float(x.dtype())) return Grads{{}};
    std::vector<double> g(static_cast<std::size_t>(x.size()));
    for (std::int64_t i = 0; i < x.size(); ++i) {
      double d;
      if (proxy && proxy->in_region(x[i], a.attrs)) {
        if (a.use_proxy) {
          d = proxy->alpha;
          if (a.counter) ++a.counter->fired;
        } else {
          d = df(x[i], a.output[i], a.attrs);
        }
      } else {
        d = df(x[i], a.output[i], a.attrs);
      }
      g[i] = a.grad_out[i] * d;
    }
    return Grads{std::move(g)};
  };
  return k;
}

// ---------------------------------------------------------------------------
// Elementwise binary with broadcasting

struct BinaryRule {
  std::function<double(double, double)> f;
  std::function<double(double, double, double)> dfdx;  // (x, y, out)
  std::function<double(double, double, double)> dfdy;
  bool float_only = false;
  bool bool_ok = false;
  bool out_bool = false;
};

Kernel make_binary(const std::string& name, BinaryRule rule) {
  Kernel k;
  k.name = name;
  k.arity = 2;
  const bool float_only = rule.float_only, bool_ok = rule.bool_ok, out_bool = rule.out_bool;
  k.infer = [=](std::span<const TensorType> in, const Attrs&) {
    check_arity(name, in.size(), 2);
    if (in[0].dtype != in[1].dtype) {
      fail(name, "dtype mismatch " + type_to_string(in[0]) + " vs " + type_to_string(in[1]));
    }
    if (float_only && !is_float(in[0].dtype)) fail(name, "requires float inputs");
    if (!bool_ok && in[0].dtype == DType::kBool) fail(name, "does not accept bool");
    return TensorType{out_bool ? DType::kBool : in[0].dtype,
                      broadcast_shapes(in[0].shape, in[1].shape)};
  };
  auto f = rule.f;
  k.compute = [f, out_bool](std::span<const Tensor* const> in, const Attrs&) {
    const Tensor& x = *in[0];
    const Tensor& y = *in[1];
    Shape shape = broadcast_shapes(x.shape(), y.shape());
    const auto mx = broadcast_map(shape, x.shape());
    const auto my = broadcast_map(shape, y.shape());
    std::vector<double> out(mx.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[mx[i]], y[my[i]]);
    return Tensor(out_bool ? DType::kBool : x.dtype(), std::move(shape), std::move(out));
  };
  if (rule.dfdx) {
    auto dfdx = rule.dfdx, dfdy = rule.dfdy;
    k.vjp = [dfdx, dfdy](const VjpArgs& a) {
      const Tensor& x = *a.inputs[0];
      const Tensor& y = *a.inputs[1];
      if (!is_float(x.dtype())) return Grads{{}, {}};
      const auto mx = broadcast_map(a.output.shape(), x.shape());
      const auto my = broadcast_map(a.output.shape(), y.shape());
      std::vector<double> gx(static_cast<std::size_t>(x.size()), 0.0);
      std::vector<double> gy(static_cast<std::size_t>(y.size()), 0.0);
      for (std::size_t i = 0; i < mx.size(); ++i) {
        const double xv = x[mx[i]], yv = y[my[i]], ov = a.output[static_cast<std::int64_t>(i)];
        gx[mx[i]] += a.grad_out[i] * dfdx(xv, yv, ov);
        gy[my[i]] += a.grad_out[i] * dfdy(xv, yv, ov);
      }
      return Grads{std::move(gx), std::move(gy)};
    };
  }
  return k;
}

double floor_mod(double x, double y) {
  if (y == 0.0) return std::numeric_limits<double>::quiet_NaN();
  double r = std::fmod(x, y);
  if (r != 0.0 && ((r < 0) != (y < 0))) r += y;
  return r;
}

// ---------------------------------------------------------------------------
// Gather-style shape ops: every output element copies one input element (or a
// fill value when the map holds -1). Used for reshape/slice/transpose/pad/...

struct GatherPlan {
  Shape out_shape;
  std::vector<std::int64_t> source;  // per output element, -1 = fill
};

Tensor run_gather(const Tensor& x, const GatherPlan& plan, double fill = 0.0) {
  std::vector<double> out(plan.source.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = plan.source[i] < 0 ? fill : x[plan.source[i]];
  }
  return Tensor(x.dtype(), plan.out_shape, std::move(out));
}

std::vector<double> gather_vjp(const Tensor& x, const GatherPlan& plan,
                               std::span<const double> g) {
  std::vector<double> gx(static_cast<std::size_t>(x.size()), 0.0);
  for (std::size_t i = 0; i < plan.source.size(); ++i) {
    if (plan.source[i] >= 0) gx[plan.source[i]] += g[i];
  }
  return gx;
}

Kernel make_gather(const std::string& name,
                   std::function<TensorType(const TensorType&, const Attrs&)> infer,
                   std::function<GatherPlan(const Shape&, const Attrs&)> plan) {
  Kernel k;
  k.name = name;
  k.arity = 1;
  k.infer = [name, infer](std::span<const TensorType> in, const Attrs& attrs) {
    check_arity(name, in.size(), 1);
    return infer(in[0], attrs);
  };
  k.compute = [plan](std::span<const Tensor* const> in, const Attrs& attrs) {
    // Only constant padding reads `value`; other gathers never produce fill slots.
    return run_gather(*in[0], plan(in[0]->shape(), attrs), static_cast<double>(attr_or(attrs, "value", 0)));
  };
  k.vjp = [plan](const VjpArgs& a) {
    const Tensor& x = *a.inputs[0];
    if (!is_float(x.dtype())) return Grads{{}};
    return Grads{gather_vjp(x, plan(x.shape(), a.attrs), a.grad_out)};
  };
  return k;
}

Shape attr_dims(const Attrs& attrs, const std::string& prefix) {
  Shape dims;
  for (int i = 0;; ++i) {
    auto it = attrs.find(prefix + std::to_string(i));
    if (it == attrs.end()) break;
    dims.push_back(it->second);
  }
  return dims;
}

int normalize_axis(const std::string& op, std::int64_t axis, int rank) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) fail(op, "axis " + std::to_string(axis) + " out of range");
  return static_cast<int>(axis);
}

// Decomposes a flat index into (outer, axis, inner) around `axis`.
struct AxisSplit {
  std::int64_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, int axis) {
  AxisSplit sp;
  for (int i = 0; i < axis; ++i) sp.outer *= s[i];
  sp.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

GatherPlan reshape_plan(const Shape& in, const Attrs& attrs) {
  GatherPlan p{attr_dims(attrs, "dim"), {}};
  p.source.resize(static_cast<std::size_t>(num_elements(in)));
  std::iota(p.source.begin(), p.source.end(), 0);
  return p;
}

TensorType reshape_infer(const TensorType& in, const Attrs& attrs) {
  Shape target = attr_dims(attrs, "dim");
  for (auto d : target) {
    if (d < 1) fail("Reshape", "non-positive target dim");
  }
  if (num_elements(target) != num_elements(in.shape)) {
    fail("Reshape", "cannot reshape " + shape_to_string(in.shape) + " to " +
                        shape_to_string(target));
  }
  return {in.dtype, target};
}

struct SliceParams {
  int axis;
  std::int64_t start, end, step, len;
};

SliceParams slice_params(const Shape& in, const Attrs& attrs) {
  SliceParams sp;
  sp.axis = normalize_axis("Slice", attr(attrs, "axis"), static_cast<int>(in.size()));
  sp.start = attr(attrs, "start");
  sp.end = attr(attrs, "end");
  sp.step = attr(attrs, "step");
  if (sp.step < 1 || sp.start < 0 || sp.start >= sp.end || sp.end > in[sp.axis]) {
    fail("Slice", "invalid range [" + std::to_string(sp.start) + ":" + std::to_string(sp.end) +
                      ":" + std::to_string(sp.step) + "] on dim " + std::to_string(in[sp.axis]));
  }
  sp.len = (sp.end - sp.start - 1) / sp.step + 1;
  return sp;
}

GatherPlan slice_plan(const Shape& in, const Attrs& attrs) {
  const auto sp = slice_params(in, attrs);
  GatherPlan p{in, {}};
  p.out_shape[sp.axis] = sp.len;
  const auto split = split_at(in, sp.axis);
  for (std::int64_t o = 0; o < split.outer; ++o) {
    for (std::int64_t j = 0; j < sp.len; ++j) {
      const std::int64_t src_axis = sp.start + j * sp.step;
      for (std::int64_t r = 0; r < split.inner; ++r) {
        p.source.push_back((o * split.len + src_axis) * split.inner + r);
      }
    }
  }
  return p;
}

std::vector<int> read_perm(const Attrs& attrs, int rank) {
  Shape raw = attr_dims(attrs, "perm");
  if (static_cast<int>(raw.size()) != rank) fail("Transpose", "perm length differs from rank");
  std::vector<int> perm(raw.begin(), raw.end());
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < rank; ++i) {
    if (sorted[i] != i) fail("Transpose", "perm is not a permutation");
  }
  return perm;
}

GatherPlan transpose_plan(const Shape& in, const Attrs& attrs) {
  const int rank = static_cast<int>(in.size());
  const auto perm = read_perm(attrs, rank);
  GatherPlan p;
  p.out_shape.resize(rank);
  for (int i = 0; i < rank; ++i) p.out_shape[i] = in[perm[i]];
  const auto in_strides = strides_of(in);
  const auto out_strides = strides_of(p.out_shape);
  const auto n = num_elements(in);
  p.source.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t rem = i, src = 0;
    for (int d = 0; d < rank; ++d) {
      const std::int64_t c = rem / out_strides[d];
      rem %= out_strides[d];
      src += c * in_strides[perm[d]];
    }
    p.source[i] = src;
  }
  return p;
}

GatherPlan broadcast_to_plan(const Shape& in, const Attrs& attrs) {
  Shape target = attr_dims(attrs, "dim");
  if (target.size() < in.size() || broadcast_shapes(in, target) != target) {
    fail("BroadcastTo", "cannot broadcast " + shape_to_string(in) + " to " +
                            shape_to_string(target));
  }
  return {target, broadcast_map(target, in)};
}

enum PadMode : std::int64_t { kPadConstant = 0, kPadReflect = 1, kPadReplicate = 2 };

GatherPlan pad_plan(const Shape& in, const Attrs& attrs) {
  const int rank = static_cast<int>(in.size());
  const auto mode = attr(attrs, "mode");
  std::vector<std::int64_t> lo(rank), hi(rank);
  GatherPlan p;
  p.out_shape.resize(rank);
  for (int i = 0; i < rank; ++i) {
    lo[i] = attr_or(attrs, "lo" + std::to_string(i), 0);
    hi[i] = attr_or(attrs, "hi" + std::to_string(i), 0);
    if (mode == kPadReflect && (lo[i] < 0 || hi[i] < 0 || lo[i] >= in[i] || hi[i] >= in[i])) {
      fail("Pad", "reflect padding must lie in [0, dim)");
    }
    if (mode == kPadReplicate && (lo[i] < 0 || hi[i] < 0)) {
      fail("Pad", "replicate padding must be non-negative");
    }
    if (mode < 0 || mode > 2) fail("Pad", "unknown mode");
    p.out_shape[i] = in[i] + lo[i] + hi[i];
    if (p.out_shape[i] < 1) fail("Pad", "padding leaves an empty dimension");
  }
  const auto in_strides = strides_of(in);
  const auto out_strides = strides_of(p.out_shape);
  const auto n = num_elements(p.out_shape);
  p.source.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t rem = i, src = 0;
    bool inside = true;
    for (int d = 0; d < rank; ++d) {
      const std::int64_t c = rem / out_strides[d];
      rem %= out_strides[d];
      std::int64_t j = c - lo[d];
      if (mode == kPadReflect) {
        if (j < 0) j = -j;
        if (j >= in[d]) j = 2 * (in[d] - 1) - j;
      } else if (mode == kPadReplicate) {
        j = std::clamp<std::int64_t>(j, 0, in[d] - 1);
      } else if (j < 0 || j >= in[d]) {
        inside = false;
      }
      src += j * in_strides[d];
    }
    p.source[i] = inside ? src : -1;
  }
  return p;
}

// ---------------------------------------------------------------------------

Kernel make_concat() {
  Kernel k;
  k.name = "Concat";
  k.arity = 2;
  k.infer = [](std::span<const TensorType> in, const Attrs& attrs) {
    check_arity("Concat", in.size(), 2);
    const auto& a = in[0];
    const auto& b = in[1];
    if (a.dtype != b.dtype || a.shape.size() != b.shape.size()) {
      fail("Concat", "incompatible operands " + type_to_string(a) + ", " + type_to_string(b));
    }
    const int axis = normalize_axis("Concat", attr(attrs, "axis"), static_cast<int>(a.shape.size()));
    Shape out = a.shape;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (static_cast<int>(i) != axis && a.shape[i] != b.shape[i]) {
        fail("Concat", "non-axis dims differ");
      }
    }
    out[axis] += b.shape[axis];
    return TensorType{a.dtype, out};
  };
  auto plan = [](const Shape& a, const Shape& b, int axis) {
    // source >= 0 indexes `a`; source < 0 encodes -(index into b) - 1.
    const auto sa = split_at(a, axis), sb = split_at(b, axis);
    std::vector<std::int64_t> src;
    for (std::int64_t o = 0; o < sa.outer; ++o) {
      for (std::int64_t j = 0; j < sa.len * sa.inner; ++j) src.push_back(o * sa.len * sa.inner + j);
      for (std::int64_t j = 0; j < sb.len * sb.inner; ++j) {
        src.push_back(-(o * sb.len * sb.inner + j) - 1);
      }
    }
    return src;
  };
  k.compute = [plan](std::span<const Tensor* const> in, const Attrs& attrs) {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    const int axis = normalize_axis("Concat", attr(attrs, "axis"), a.rank());
    Shape out = a.shape();
    out[axis] += b.shape()[axis];
    const auto src = plan(a.shape(), b.shape(), axis);
    std::vector<double> data(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) data[i] = src[i] >= 0 ? a[src[i]] : b[-src[i] - 1];
    return Tensor(a.dtype(), out, std::move(data));
  };
  k.vjp = [plan](const VjpArgs& v) {
    const Tensor& a = *v.inputs[0];
    const Tensor& b = *v.inputs[1];
    if (!is_float(a.dtype())) return Grads{{}, {}};
    const int axis = normalize_axis("Concat", attr(v.attrs, "axis"), a.rank());
    const auto src = plan(a.shape(), b.shape(), axis);
    std::vector<double> ga(static_cast<std::size_t>(a.size())), gb(static_cast<std::size_t>(b.size()));
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (src[i] >= 0) {
        ga[src[i]] += v.grad_out[i];
      } else {
        gb[-src[i] - 1] += v.grad_out[i];
      }
    }
    return Grads{std::move(ga), std::move(gb)};
  };
  return k;
}

Kernel make_where() {
  Kernel k;
  k.name = "Where";
  k.arity = 3;
  k.infer = [](std::span<const TensorType> in, const Attrs&) {
    check_arity("Where", in.size(), 3);
    if (in[0].dtype != DType::kBool) fail("Where", "condition must be bool");
    if (in[1].dtype != in[2].dtype) fail("Where", "branch dtypes differ");
    return TensorType{in[1].dtype,
                      broadcast_shapes(broadcast_shapes(in[1].shape, in[2].shape), in[0].shape)};
  };
  k.compute = [](std::span<const Tensor* const> in, const Attrs&) {
    const Tensor &c = *in[0], &t = *in[1], &f = *in[2];
    Shape shape = broadcast_shapes(broadcast_shapes(t.shape(), f.shape()), c.shape());
    const auto mc = broadcast_map(shape, c.shape());
    const auto mt = broadcast_map(shape, t.shape());
    const auto mf = broadcast_map(shape, f.shape());
    std::vector<double> out(mc.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[mc[i]] != 0.0 ? t[mt[i]] : f[mf[i]];
    return Tensor(t.dtype(), std::move(shape), std::move(out));
  };
  k.vjp = [](const VjpArgs& a) {
    const Tensor &c = *a.inputs[0], &t = *a.inputs[1], &f = *a.inputs[2];
    if (!is_float(t.dtype())) return Grads{{}, {}, {}};
    const Shape& shape = a.output.shape();
    const auto mc = broadcast_map(shape, c.shape());
    const auto mt = broadcast_map(shape, t.shape());
    const auto mf = broadcast_map(shape, f.shape());
    std::vector<double> gt(static_cast<std::size_t>(t.size())), gf(static_cast<std::size_t>(f.size()));
    for (std::size_t i = 0; i < mc.size(); ++i) {
      if (c[mc[i]] != 0.0) {
        gt[mt[i]] += a.grad_out[i];
      } else {
        gf[mf[i]] += a.grad_out[i];
      }
    }
    return Grads{{}, std::move(gt), std::move(gf)};
  };
  return k;
}

Kernel make_cast() {
  Kernel k;
  k.name = "Cast";
  k.arity = 1;
  k.elementwise_unary = true;
  k.infer = [](std::span<const TensorType> in, const Attrs& attrs) {
    check_arity("Cast", in.size(), 1);
    const auto to = attr(attrs, "to");
    if (to < 0 || to > 4) fail("Cast", "unknown target dtype");
    return TensorType{static_cast<DType>(to), in[0].shape};
  };
  k.compute = [](std::span<const Tensor* const> in, const Attrs& attrs) {
    const Tensor& x = *in[0];
    const auto to = static_cast<DType>(attr(attrs, "to"));
    std::vector<double> out(x.values().begin(), x.values().end());
    return Tensor(to, x.shape(), std::move(out));
  };
  k.vjp = [](const VjpArgs& a) {
    if (!is_float(a.inputs[0]->dtype()) || !is_float(a.output.dtype())) return Grads{{}};
    return Grads{std::vector<double>(a.grad_out.begin(), a.grad_out.end())};
  };
  return k;
}

enum class ReduceKind { kSum, kMax, kMean, kArgMax };

Kernel make_reduce(const std::string& name, ReduceKind kind) {
  Kernel k;
  k.name = name;
  k.arity = 1;
  k.infer = [name, kind](std::span<const TensorType> in, const Attrs& attrs) {
    check_arity(name, in.size(), 1);
    const auto& x = in[0];
    if (x.dtype == DType::kBool) fail(name, "does not accept bool");
    if ((kind == ReduceKind::kMean) && !is_float(x.dtype)) fail(name, "requires float");
    if (x.shape.empty()) fail(name, "cannot reduce a rank-0 tensor");
    const int axis = normalize_axis(name, attr(attrs, "axis"), static_cast<int>(x.shape.size()));
    Shape out = x.shape;
    out.erase(out.begin() + axis);
    return TensorType{kind == ReduceKind::kArgMax ? DType::kI64 : x.dtype, out};
  };
  k.compute = [name, kind](std::span<const Tensor* const> in, const Attrs& attrs) {
    const Tensor& x = *in[0];
    const int axis = normalize_axis(name, attr(attrs, "axis"), x.rank());
    const auto sp = split_at(x.shape(), axis);
    Shape out_shape = x.shape();
    out_shape.erase(out_shape.begin() + axis);
    std::vector<double> out(static_cast<std::size_t>(sp.outer * sp.inner));
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      for (std::int64_t r = 0; r < sp.inner; ++r) {
        double acc = kind == ReduceKind::kSum || kind == ReduceKind::kMean
                         ? 0.0
                         : x[o * sp.len * sp.inner + r];
        std::int64_t best = 0;
        for (std::int64_t j = 0; j < sp.len; ++j) {
          const double v = x[(o * sp.len + j) * sp.inner + r];
          switch (kind) {
            case ReduceKind::kSum:
            case ReduceKind::kMean: acc += v; break;
            case ReduceKind::kMax:
              if (std::isnan(v) || (!std::isnan(acc) && v > acc)) acc = v;
              break;
            case ReduceKind::kArgMax:
              if (v > acc) {
                acc = v;
                best = j;
              }
              break;
          }
        }
        if (kind == ReduceKind::kMean) acc /= static_cast<double>(sp.len);
        if (kind == ReduceKind::kArgMax) acc = static_cast<double>(best);
        out[o * sp.inner + r] = cast_value(acc, kind == ReduceKind::kArgMax ? DType::kI64 : x.dtype());
      }
    }
    return Tensor(kind == ReduceKind::kArgMax ? DType::kI64 : x.dtype(), out_shape, std::move(out));
  };
  if (kind != ReduceKind::kArgMax) {
    k.vjp = [name, kind](const VjpArgs& a) {
      const Tensor& x = *a.inputs[0];
      if (!is_float(x.dtype())) return Grads{{}};
      const int axis = normalize_axis(name, attr(a.attrs, "axis"), x.rank());
      const auto sp = split_at(x.shape(), axis);
      std::vector<double> g(static_cast<std::size_t>(x.size()), 0.0);
      for (std::int64_t o = 0; o < sp.outer; ++o) {
        for (std::int64_t r = 0; r < sp.inner; ++r) {
          const double go = a.grad_out[o * sp.inner + r];
          if (kind == ReduceKind::kMax) {
            std::int64_t best = 0;
            for (std::int64_t j = 1; j < sp.len; ++j) {
              if (x[(o * sp.len + j) * sp.inner + r] > x[(o * sp.len + best) * sp.inner + r]) best = j;
            }
            g[(o * sp.len + best) * sp.inner + r] += go;
            continue;
          }
          const double scale = kind == ReduceKind::kMean ? 1.0 / static_cast<double>(sp.len) : 1.0;
          for (std::int64_t j = 0; j < sp.len; ++j) g[(o * sp.len + j) * sp.inner + r] += go * scale;
        }
      }
      return Grads{std::move(g)};
    };
  }
  return k;
}

// MatMul over ranks {1,2,3}; rank-1 operands are promoted like NumPy and the
// promoted axis is dropped from the result. Rank-3 operands must agree on the
// leading batch dimension.
struct MatMulDims {
  std::int64_t batch, m, k, n;
  Shape out;
};

MatMulDims matmul_dims(const Shape& a, const Shape& b) {
  if (a.empty() || b.empty()) throw ShapeMismatch("MatMul: matmul-scalar-operand");
  if (a.size() > 3 || b.size() > 3) fail("MatMul", "rank above 3");
  MatMulDims d{};
  const bool batched = a.size() == 3 || b.size() == 3;
  if (batched && (a.size() != 3 || b.size() != 3 || a[0] != b[0])) {
    fail("MatMul", "batched operands must both be rank 3 with equal batch");
  }
  d.batch = batched ? a[0] : 1;
  d.m = a.size() == 1 ? 1 : a[a.size() - 2];
  d.k = a.back();
  const std::int64_t kb = b.size() == 1 ? b[0] : b[b.size() - 2];
  d.n = b.size() == 1 ? 1 : b.back();
  if (d.k != kb) {
    fail("MatMul", "inner dims differ: " + shape_to_string(a) + " @ " + shape_to_string(b));
  }
  if (batched) d.out.push_back(d.batch);
  if (a.size() != 1) d.out.push_back(d.m);
  if (b.size() != 1) d.out.push_back(d.n);
  return d;
}

Kernel make_matmul() {
  Kernel k;
  k.name = "MatMul";
  k.arity = 2;
  k.infer = [](std::span<const TensorType> in, const Attrs&) {
    check_arity("MatMul", in.size(), 2);
    if (in[0].dtype != in[1].dtype || !is_float(in[0].dtype)) fail("MatMul", "requires matching float operands");
    return TensorType{in[0].dtype, matmul_dims(in[0].shape, in[1].shape).out};
  };
  k.compute = [](std::span<const Tensor* const> in, const Attrs&) {
    const Tensor &a = *in[0], &b = *in[1];
    const auto d = matmul_dims(a.shape(), b.shape());
    std::vector<double> out(static_cast<std::size_t>(d.batch * d.m * d.n), 0.0);
    for (std::int64_t bt = 0; bt < d.batch; ++bt) {
      for (std::int64_t i = 0; i < d.m; ++i) {
        for (std::int64_t j = 0; j < d.n; ++j) {
          double acc = 0.0;
          for (std::int64_t p = 0; p < d.k; ++p) {
            acc += a[(bt * d.m + i) * d.k + p] * b[(bt * d.k + p) * d.n + j];
          }
          out[(bt * d.m + i) * d.n + j] = acc;
        }
      }
    }
    return Tensor(a.dtype(), d.out, std::move(out));
  };
  k.vjp = [](const VjpArgs& v) {
    const Tensor &a = *v.inputs[0], &b = *v.inputs[1];
    const auto d = matmul_dims(a.shape(), b.shape());
    std::vector<double> ga(static_cast<std::size_t>(a.size()), 0.0), gb(static_cast<std::size_t>(b.size()), 0.0);
    for (std::int64_t bt = 0; bt < d.batch; ++bt) {
      for (std::int64_t i = 0; i < d.m; ++i) {
        for (std::int64_t j = 0; j < d.n; ++j) {
          const double g = v.grad_out[(bt * d.m + i) * d.n + j];
          for (std::int64_t p = 0; p < d.k; ++p) {
            ga[(bt * d.m + i) * d.k + p] += g * b[(bt * d.k + p) * d.n + j];
            gb[(bt * d.k + p) * d.n + j] += g * a[(bt * d.m + i) * d.k + p];
          }
        }
      }
    }
    return Grads{std::move(ga), std::move(gb)};
  };
  return k;
}

// Spatial geometry shared by Conv2d and the pooling ops (NCHW).
struct Window {
  std::int64_t kh, kw, stride, pad, oh, ow;
};

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Window make_window(const std::string& op, std::int64_t h, std::int64_t w, std::int64_t kh,
                   std::int64_t kw, std::int64_t stride, std::int64_t pad) {
  if (kh < 1 || kw < 1 || stride < 1 || pad < 0) fail(op, "invalid kernel/stride/pad");
  if (kh > 2 * pad + h || kw > 2 * pad + w) fail(op, "kernel larger than padded input");
  Window win{kh, kw, stride, pad, floordiv(h - kh + 2 * pad, stride) + 1,
             floordiv(w - kw + 2 * pad, stride) + 1};
  return win;
}

Kernel make_conv2d() {
  Kernel k;
  k.name = "Conv2d";
  k.arity = 2;
  k.infer = [](std::span<const TensorType> in, const Attrs& attrs) {
    check_arity("Conv2d", in.size(), 2);
    const auto &x = in[0], &w = in[1];
    if (x.shape.size() != 4 || w.shape.size() != 4) fail("Conv2d", "operands must be rank 4");
    if (x.dtype != w.dtype || !is_float(x.dtype)) fail("Conv2d", "requires matching float operands");
    if (x.shape[1] != w.shape[1]) fail("Conv2d", "channel mismatch");
    const auto win = make_window("Conv2d", x.shape[2], x.shape[3], w.shape[2], w.shape[3],
                                 attr(attrs, "stride"), attr(attrs, "pad"));
    return TensorType{x.dtype, {x.shape[0], w.shape[0], win.oh, win.ow}};
  };
  auto geometry = [](const Tensor& x, const Tensor& w, const Attrs& attrs) {
    return make_window("Conv2d", x.shape()[2], x.shape()[3], w.shape()[2], w.shape()[3],
                       attr(attrs, "stride"), attr(attrs, "pad"));
  };
  // Visits every (output, input, weight) index triple that contributes.
  auto for_each_tap = [geometry](const Tensor& x, const Tensor& w, const Attrs& attrs, auto&& fn) {
    const auto win = geometry(x, w, attrs);
    const auto N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    const auto O = w.shape()[0];
    for (std::int64_t n = 0; n < N; ++n)
      for (std::int64_t o = 0; o < O; ++o)
        for (std::int64_t i = 0; i < win.oh; ++i)
          for (std::int64_t j = 0; j < win.ow; ++j) {
            const std::int64_t out_idx = ((n * O + o) * win.oh + i) * win.ow + j;
            for (std::int64_t c = 0; c < C; ++c)
              for (std::int64_t p = 0; p < win.kh; ++p)
                for (std::int64_t q = 0; q < win.kw; ++q) {
                  const std::int64_t y = i * win.stride - win.pad + p;
                  const std::int64_t xcol = j * win.stride - win.pad + q;
                  if (y < 0 || y >= H || xcol < 0 || xcol >= W) continue;
                  fn(out_idx, ((n * C + c) * H + y) * W + xcol, ((o * C + c) * win.kh + p) * win.kw + q);
                }
          }
    return win;
  };
  k.compute = [for_each_tap](std::span<const Tensor* const> in, const Attrs& attrs) {
    const Tensor &x = *in[0], &w = *in[1];
    std::vector<double> acc;
    Window win{};
    {
      const auto g = make_window("Conv2d", x.shape()[2], x.shape()[3], w.shape()[2], w.shape()[3],
                                 attr(attrs, "stride"), attr(attrs, "pad"));
      acc.assign(static_cast<std::size_t>(x.shape()[0] * w.shape()[0] * g.oh * g.ow), 0.0);
    }
    win = for_each_tap(x, w, attrs, [&](std::int64_t o, std::int64_t xi, std::int64_t wi) {
      acc[o] += x[xi] * w[wi];
    });
    return Tensor(x.dtype(), {x.shape()[0], w.shape()[0], win.oh, win.ow}, std::move(acc));
  };
  k.vjp = [for_each_tap](const VjpArgs& v) {
    const Tensor &x = *v.inputs[0], &w = *v.inputs[1];
    std::vector<double> gx(static_cast<std::size_t>(x.size())), gw(static_cast<std::size_t>(w.size()));
    for_each_tap(x, w, v.attrs, [&](std::int64_t o, std::int64_t xi, std::int64_t wi) {
      gx[xi] += v.grad_out[o] * w[wi];
      gw[wi] += v.grad_out[o] * x[xi];
    });
    return Grads{std::move(gx), std::move(gw)};
  };
  return k;
}

Kernel make_pool(const std::string& name, bool is_max) {
  Kernel k;
  k.name = name;
  k.arity = 1;
  auto window = [name](const Shape& s, const Attrs& attrs) {
    const auto win = make_window(name, s[2], s[3], attr(attrs, "kh"), attr(attrs, "kw"),
                                 attr(attrs, "stride"), attr(attrs, "pad"));
    if (2 * win.pad > win.kh || 2 * win.pad > win.kw) fail(name, "pad exceeds half the kernel");
    return win;
  };
  k.infer = [name, window](std::span<const TensorType> in, const Attrs& attrs) {
    check_arity(name, in.size(), 1);
    if (in[0].shape.size() != 4 || !is_float(in[0].dtype)) fail(name, "requires a float rank-4 input");
    const auto win = window(in[0].shape, attrs);
    return TensorType{in[0].dtype, {in[0].shape[0], in[0].shape[1], win.oh, win.ow}};
  };
  // Calls fn(out_idx, list of contributing input indices).
  auto scan = [window](const Tensor& x, const Attrs& attrs, auto&& fn) {
    const auto& s = x.shape();
    const auto win = window(s, attrs);
    std::vector<std::int64_t> taps;
    for (std::int64_t nc = 0; nc < s[0] * s[1]; ++nc)
      for (std::int64_t i = 0; i < win.oh; ++i)
        for (std::int64_t j = 0; j < win.ow; ++j) {
          taps.clear();
          for (std::int64_t p = 0; p < win.kh; ++p)
            for (std::int64_t q = 0; q < win.kw; ++q) {
              const std::int64_t y = i * win.stride - win.pad + p;
              const std::int64_t xc = j * win.stride - win.pad + q;
              if (y < 0 || y >= s[2] || xc < 0 || xc >= s[3]) continue;
              taps.push_back((nc * s[2] + y) * s[3] + xc);
            }
          fn((nc * win.oh + i) * win.ow + j, taps, win);
        }
    return win;
  };
  k.compute = [scan, is_max](std::span<const Tensor* const> in, const Attrs& attrs) {
    const Tensor& x = *in[0];
    std::vector<double> out;
    const auto win = scan(x, attrs, [&](std::int64_t, const std::vector<std::int64_t>& taps, const Window& w) {
      if (is_max) {
        double best = -std::numeric_limits<double>::infinity();
        for (auto t : taps) {
          if (std::isnan(x[t]) || x[t] > best) best = x[t];
          if (std::isnan(best)) break;
        }
        out.push_back(best);
      } else {
        double sum = 0.0;
        for (auto t : taps) sum += x[t];
        out.push_back(sum / static_cast<double>(w.kh * w.kw));
      }
    });
    return Tensor(x.dtype(), {x.shape()[0], x.shape()[1], win.oh, win.ow}, std::move(out));
  };
  k.vjp = [scan, is_max](const VjpArgs& v) {
    const Tensor& x = *v.inputs[0];
    std::vector<double> g(static_cast<std::size_t>(x.size()), 0.0);
    scan(x, v.attrs, [&](std::int64_t o, const std::vector<std::int64_t>& taps, const Window& w) {
      if (taps.empty()) return;
      if (is_max) {
        std::int64_t best = taps[0];
        for (auto t : taps) {
          if (x[t] > x[best]) best = t;
        }
        g[best] += v.grad_out[o];
      } else {
        for (auto t : taps) g[t] += v.grad_out[o] / static_cast<double>(w.kh * w.kw);
      }
    });
    return Grads{std::move(g)};
  };
  return k;
}

Kernel make_softmax() {
  Kernel k;
  k.name = "Softmax";
  k.arity = 1;
  k.infer = [](std::span<const TensorType> in, const Attrs& attrs) {
    check_arity("Softmax", in.size(), 1);
    if (!is_float(in[0].dtype) || in[0].shape.empty()) fail("Softmax", "requires a float tensor of rank >= 1");
    normalize_axis("Softmax", attr(attrs, "axis"), static_cast<int>(in[0].shape.size()));
    return in[0];
  };
  k.compute = [](std::span<const Tensor* const> in, const Attrs& attrs) {
    const Tensor& x = *in[0];
    const auto sp = split_at(x.shape(), normalize_axis("Softmax", attr(attrs, "axis"), x.rank()));
    std::vector<double> out(static_cast<std::size_t>(x.size()));
    for (std::int64_t o = 0; o < sp.outer; ++o)
      for (std::int64_t r = 0; r < sp.inner; ++r) {
        auto at = [&](std::int64_t j) { return (o * sp.len + j) * sp.inner + r; };
        double mx = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < sp.len; ++j) mx = std::max(mx, x[at(j)]);
        double sum = 0.0;
        for (std::int64_t j = 0; j < sp.len; ++j) sum += std::exp(x[at(j)] - mx);
        for (std::int64_t j = 0; j < sp.len; ++j) out[at(j)] = std::exp(x[at(j)] - mx) / sum;
      }
    return Tensor(x.dtype(), x.shape(), std::move(out));
  };
  k.vjp = [](const VjpArgs& v) {
    const Tensor& y = v.output;
    const auto sp = split_at(y.shape(), normalize_axis("Softmax", attr(v.attrs, "axis"), y.rank()));
    std::vector<double> g(static_cast<std::size_t>(y.size()));
    for (std::int64_t o = 0; o < sp.outer; ++o)
      for (std::int64_t r = 0; r < sp.inner; ++r) {
        auto at = [&](std::int64_t j) { return (o * sp.len + j) * sp.inner + r; };
        double dot = 0.0;
        for (std::int64_t j = 0; j < sp.len; ++j) dot += v.grad_out[at(j)] * y[at(j)];
        for (std::int64_t j = 0; j < sp.len; ++j) g[at(j)] = y[at(j)] * (v.grad_out[at(j)] - dot);
      }
    return Grads{std::move(g)};
  };
  return k;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::unordered_map<std::string, Kernel> build_table() {
  std::unordered_map<std::string, Kernel> t;
  auto add = [&t](Kernel k) { t.emplace(k.name, std::move(k)); };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  add(make_unary("Sqrt", {[](double x, const Attrs&) { return std::sqrt(x); },
                          [](double, double y, const Attrs&) { return 0.5 / y; }}));
  add(make_unary("Log2", {[](double x, const Attrs&) { return std::log2(x); },
                          [](double x, double, const Attrs&) { return 1.0 / (x * std::numbers::ln2); }}));
  add(make_unary("Asin", {[](double x, const Attrs&) { return std::asin(x); },
                          [](double x, double, const Attrs&) { return 1.0 / std::sqrt(1.0 - x * x); }}));
  add(make_unary("Sigmoid", {[](double x, const Attrs&) { return sigmoid(x); },
                             [](double x, double, const Attrs&) {
                               const double s = sigmoid(x);
                               return s * (1.0 - s);
                             }}));
  add(make_unary("Tanh", {[](double x, const Attrs&) { return std::tanh(x); },
                          [](double x, double, const Attrs&) {
                            const double th = std::tanh(x);
                            return 1.0 - th * th;
                          }}));
  add(make_unary("ReLU", {[](double x, const Attrs&) { return x > 0 ? x : (std::isnan(x) ? x : 0.0); },
                          [](double x, double, const Attrs&) { return x > 0 ? 1.0 : 0.0; },
                          false}));
  add(make_unary("LeakyReLU",
                 {[](double x, const Attrs&) { return x > 0 ? x : kLeakyReluSlope * x; },
                  [](double x, double, const Attrs&) { return x > 0 ? 1.0 : kLeakyReluSlope; }}));
  add(make_unary("Floor", {[](double x, const Attrs&) { return std::floor(x); },
                           [](double, double, const Attrs&) { return 0.0; }}));
  add(make_unary("Ceil", {[](double x, const Attrs&) { return std::ceil(x); },
                          [](double, double, const Attrs&) { return 0.0; }}));
  add(make_unary("Clip",
                 {[](double x, const Attrs& a) {
                    if (std::isnan(x)) return x;
                    return std::clamp(x, static_cast<double>(attr(a, "lo")), static_cast<double>(attr(a, "hi")));
                  },
                  [](double x, double, const Attrs& a) {
                    return x > static_cast<double>(attr(a, "lo")) && x < static_cast<double>(attr(a, "hi")) ? 1.0 : 0.0;
                  },
                  false}));
  add(make_unary("Abs", {[](double x, const Attrs&) { return std::fabs(x); },
                         // Undifferentiable at 0: use the left derivative.
                         [](double x, double, const Attrs&) { return x > 0 ? 1.0 : -1.0; },
                         false}));
  add(make_unary("Neg", {[](double x, const Attrs&) { return -x; },
                         [](double, double, const Attrs&) { return -1.0; },
                         false}));

  add(make_binary("Add", {[](double x, double y) { return x + y; },
                          [](double, double, double) { return 1.0; },
                          [](double, double, double) { return 1.0; }}));
  add(make_binary("Sub", {[](double x, double y) { return x - y; },
                          [](double, double, double) { return 1.0; },
                          [](double, double, double) { return -1.0; }}));
  add(make_binary("Mul", {[](double x, double y) { return x * y; },
                          [](double, double y, double) { return y; },
                          [](double x, double, double) { return x; }}));
  add(make_binary("Div", {[](double x, double y) { return x / y; },
                          [](double, double y, double) { return 1.0 / y; },
                          [](double x, double y, double) { return -x / (y * y); },
                          true}));
  add(make_binary("Pow", {[](double x, double y) { return std::pow(x, y); },
                          [](double x, double y, double) { return y * std::pow(x, y - 1.0); },
                          [](double x, double, double out) { return x > 0 ? out * std::log(x) : 0.0; },
                          true}));
  add(make_binary("Mod", {[](double x, double y) { return floor_mod(x, y); },
                          [](double, double, double) { return 1.0; },
                          [](double x, double y, double) { return -std::floor(x / y); },
                          true}));
  add(make_binary("Equal", {[](double x, double y) { return x == y ? 1.0 : 0.0; }, nullptr, nullptr,
                            false, true, true}));
  (void)nan;

  add(make_matmul());
  add(make_conv2d());
  add(make_pool("MaxPool2d", true));
  add(make_pool("AvgPool2d", false));
  add(make_softmax());
  add(make_gather("Reshape", reshape_infer, reshape_plan));
  add(make_gather(
      "Slice",
      [](const TensorType& in, const Attrs& attrs) {
        if (in.shape.empty()) fail("Slice", "cannot slice a rank-0 tensor");
        const auto sp = slice_params(in.shape, attrs);
        TensorType out = in;
        out.shape[sp.axis] = sp.len;
        return out;
      },
      slice_plan));
  add(make_gather(
      "Transpose",
      [](const TensorType& in, const Attrs& attrs) {
        return TensorType{in.dtype, transpose_plan(in.shape, attrs).out_shape};
      },
      transpose_plan));
  add(make_gather(
      "BroadcastTo",
      [](const TensorType& in, const Attrs& attrs) {
        Shape target = attr_dims(attrs, "dim");
        if (target.size() < in.shape.size() || broadcast_shapes(in.shape, target) != target) {
          fail("BroadcastTo", "cannot broadcast " + shape_to_string(in.shape) + " to " +
                                  shape_to_string(target));
        }
        return TensorType{in.dtype, target};
      },
      broadcast_to_plan));
  add(make_gather(
      "Pad",
      [](const TensorType& in, const Attrs& attrs) {
        if (in.dtype == DType::kBool) fail("Pad", "does not accept bool");
        if (in.shape.empty()) fail("Pad", "cannot pad a rank-0 tensor");
        Shape out = in.shape;
        const auto mode = attr(attrs, "mode");
        for (std::size_t i = 0; i < out.size(); ++i) {
          const auto lo = attr_or(attrs, "lo" + std::to_string(i), 0);
          const auto hi = attr_or(attrs, "hi" + std::to_string(i), 0);
          if (mode == kPadReflect && (lo < 0 || hi < 0 || lo >= in.shape[i] || hi >= in.shape[i])) {
            fail("Pad", "reflect padding must lie in [0, dim)");
          }
          if (mode == kPadReplicate && (lo < 0 || hi < 0)) fail("Pad", "replicate padding must be non-negative");
          if (mode < 0 || mode > 2) fail("Pad", "unknown mode");
          out[i] += lo + hi;
          if (out[i] < 1) fail("Pad", "padding leaves an empty dimension");
        }
        return TensorType{in.dtype, out};
      },
      pad_plan));
  add(make_concat());
  add(make_where());
  add(make_cast());
  add(make_reduce("ReduceSum", ReduceKind::kSum));
  add(make_reduce("ReduceMax", ReduceKind::kMax));
  add(make_reduce("ReduceMean", ReduceKind::kMean));
  add(make_reduce("ArgMax", ReduceKind::kArgMax));
  return t;
}

const std::unordered_map<std::string, Kernel>& table() {
  static const auto* t = new std::unordered_map<std::string, Kernel>(build_table());
  return *t;
}

}  // namespace

std::vector<std::int64_t> broadcast_index_map(const Shape& out, const Shape& in) {
  return broadcast_map(out, in);
}

const std::vector<ProxyDerivativeSpec>& proxy_specs() {
  static const auto* specs = new std::vector<ProxyDerivativeSpec>{
      {"ReLU", "x <= 0", kProxyAlpha, [](double x, const Attrs&) { return x <= 0; }},
      // Zero derivative off the integers; at integers the closest left
      // derivative is also zero, so the proxy covers the whole line.
      {"Floor", "all x", kProxyAlpha, [](double, const Attrs&) { return true; }},
      {"Ceil", "all x", kProxyAlpha, [](double, const Attrs&) { return true; }},
      {"Clip", "x <= lo or x >= hi", kProxyAlpha,
       [](double x, const Attrs& a) {
         return x <= static_cast<double>(a.at("lo")) || x >= static_cast<double>(a.at("hi"));
       }},
  };
  return *specs;
}

const ProxyDerivativeSpec* find_proxy(std::string_view op) {
  for (const auto& p : proxy_specs()) {
    if (p.op == op) return &p;
  }
  return nullptr;
}

const Kernel& kernel(std::string_view name) {
  auto it = table().find(std::string(name));
  if (it == table().end()) throw UnknownOp("unknown op '" + std::string(name) + "'");
  return it->second;
}

bool has_kernel(std::string_view name) { return table().count(std::string(name)) > 0; }

std::vector<std::string> kernel_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : table()) names.push_back(name);
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace graphsmith
