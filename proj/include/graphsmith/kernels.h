// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Reference kernels for every operator the interpreter understands, together
// with their type rules and vector-Jacobian products.

#ifndef GRAPHSMITH_KERNELS_H_
#define GRAPHSMITH_KERNELS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphsmith/tensor.h"

namespace graphsmith {

using Attrs = std::map<std::string, std::int64_t>;

struct TensorType {
  DType dtype = DType::kF32;
  Shape shape;

  friend bool operator==(const TensorType&, const TensorType&) = default;
};

std::string type_to_string(const TensorType& t);

class UnknownOp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Substitute derivative used where the true derivative is zero or undefined.
struct ProxyDerivativeSpec {
  std::string op;
  std::string region;  // human-readable region description
  double alpha;        // proxy derivative value inside the region
  std::function<bool(double x, const Attrs& attrs)> in_region;
};

// Every registered proxy; |alpha| <= 0.1 and sign follows the op's trend.
const std::vector<ProxyDerivativeSpec>& proxy_specs();
const ProxyDerivativeSpec* find_proxy(std::string_view op);

inline constexpr double kProxyAlpha = 0.01;
inline constexpr double kLeakyReluSlope = 0.01;

// Bookkeeping for proxy usage during one backward pass.
struct ProxyCounter {
  std::int64_t fired = 0;
  std::int64_t outside_region = 0;  // must stay zero
};

struct VjpArgs {
  std::span<const Tensor* const> inputs;
  const Tensor& output;
  std::span<const double> grad_out;
  const Attrs& attrs;
  bool use_proxy;
  ProxyCounter* counter;
};

// One gradient buffer per input; an empty buffer means "no gradient flows".
using Grads = std::vector<std::vector<double>>;

struct Kernel {
  std::string name;
  int arity;  // fixed number of inputs
  bool elementwise_unary = false;
  std::function<TensorType(std::span<const TensorType>, const Attrs&)> infer;
  std::function<Tensor(std::span<const Tensor* const>, const Attrs&)> compute;
  // Null when the op is not differentiable (integer/bool outputs).
  std::function<Grads(const VjpArgs&)> vjp;
};

const Kernel& kernel(std::string_view name);
bool has_kernel(std::string_view name);
std::vector<std::string> kernel_names();

// Right-aligned NumPy broadcasting of two shapes; throws ShapeMismatch.
Shape broadcast_shapes(const Shape& a, const Shape& b);

// Flat index into a tensor of shape `in` for every element of the broadcast
// shape `out`.
std::vector<std::int64_t> broadcast_index_map(const Shape& out, const Shape& in);

// Leaf ops carry no computation; the interpreter binds them.
bool is_leaf_op(std::string_view op);

}  // namespace graphsmith

#endif  // GRAPHSMITH_KERNELS_H_
