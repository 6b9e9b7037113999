// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GRAPHSMITH_TENSOR_H_
#define GRAPHSMITH_TENSOR_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphsmith/dtype.h"

namespace graphsmith {

using Shape = std::vector<std::int64_t>;

std::int64_t num_elements(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Row-major strides for `shape`.
std::vector<std::int64_t> strides_of(const Shape& shape);

// Dense n-dimensional value. Elements of every dtype are held as doubles whose
// values are exactly representable in the tensor's dtype (f32 values are
// pre-rounded, integers are integral, bools are 0 or 1). Tensors are
// immutable once handed out; the mutable accessors exist for construction.
class Tensor {
 public:
  Tensor() : dtype_(DType::kF32), data_(1, 0.0) {}
  Tensor(DType dtype, Shape shape);
  Tensor(DType dtype, Shape shape, std::vector<double> data);

  static Tensor scalar(DType dtype, double v);
  static Tensor filled(DType dtype, Shape shape, double v);

  DType dtype() const { return dtype_; }
  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::span<const double> values() const { return data_; }
  std::span<double> mutable_values() { return data_; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  void set(std::int64_t i, double v);

  bool has_nonfinite() const;

  // Bit-exact equality of dtype, shape and values (NaN payload-insensitive).
  bool identical(const Tensor& other) const;

  // Raw little-endian bytes in the tensor's dtype encoding.
  std::string to_bytes() const;
  static Tensor from_bytes(DType dtype, Shape shape, std::string_view bytes);

 private:
  DType dtype_;
  Shape shape_;
  std::vector<double> data_;
};

class ShapeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace graphsmith

#endif  // GRAPHSMITH_TENSOR_H_
