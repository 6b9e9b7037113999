// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/tensor.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace graphsmith {

std::string_view dtype_name(DType dt) {
  switch (dt) {
    case DType::kF32: return "f32";
    case DType::kF64: return "f64";
    case DType::kI32: return "i32";
    case DType::kI64: return "i64";
    case DType::kBool: return "bool";
  }
  return "?";
}

std::optional<DType> parse_dtype(std::string_view name) {
  for (DType dt : kAllDTypes) {
    if (dtype_name(dt) == name) return dt;
  }
  return std::nullopt;
}

std::size_t dtype_size(DType dt) {
  switch (dt) {
    case DType::kF32: return 4;
    case DType::kF64: return 8;
    case DType::kI32: return 4;
    case DType::kI64: return 8;
    case DType::kBool: return 1;
  }
  return 0;
}

namespace {

std::int64_t to_i64_wrapping(double v) {
  if (!std::isfinite(v)) return 0;
  v = std::trunc(v);
  constexpr double kTwo63 = 9223372036854775808.0;
  if (v >= -kTwo63 && v < kTwo63) return static_cast<std::int64_t>(v);
  // Reduce modulo 2^64 so that out-of-range values wrap deterministically.
  const double m = std::fmod(v, 18446744073709551616.0);  // exact, |m| < 2^64
  std::uint64_t u;
  if (m < 0) {
    const double a = -m;
    u = a >= kTwo63 ? static_cast<std::uint64_t>(a - kTwo63) + (std::uint64_t{1} << 63) : static_cast<std::uint64_t>(a);
    u = std::uint64_t{0} - u;
  } else {
    u = m >= kTwo63 ? static_cast<std::uint64_t>(m - kTwo63) + (std::uint64_t{1} << 63) : static_cast<std::uint64_t>(m);
  }
  return static_cast<std::int64_t>(u);
}

}  // namespace

double cast_value(double v, DType dt) {
  switch (dt) {
    case DType::kF32: return static_cast<double>(static_cast<float>(v));
    case DType::kF64: return v;
    case DType::kI32:
      return static_cast<double>(static_cast<std::int32_t>(
          static_cast<std::uint32_t>(static_cast<std::uint64_t>(to_i64_wrapping(v)))));
    case DType::kI64: return static_cast<double>(to_i64_wrapping(v));
    case DType::kBool: return (v != 0.0 && !std::isnan(v)) ? 1.0 : 0.0;
  }
  return v;
}

std::int64_t num_elements(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::vector<std::int64_t> strides_of(const Shape& shape) {
  std::vector<std::int64_t> strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) {
    strides[i] = strides[i + 1] * shape[i + 1];
  }
  return strides;
}

Tensor::Tensor(DType dtype, Shape shape)
    : dtype_(dtype), shape_(std::move(shape)) {
  for (auto d : shape_) {
    if (d < 0) throw ShapeMismatch("negative dimension in " + shape_to_string(shape_));
  }
  data_.assign(static_cast<std::size_t>(num_elements(shape_)), 0.0);
}

Tensor::Tensor(DType dtype, Shape shape, std::vector<double> data)
    : dtype_(dtype), shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != num_elements(shape_)) {
    throw ShapeMismatch("buffer of " + std::to_string(data_.size()) +
                        " elements does not fit shape " + shape_to_string(shape_));
  }
  for (auto& v : data_) v = cast_value(v, dtype_);
}

Tensor Tensor::scalar(DType dtype, double v) { return Tensor(dtype, {}, {v}); }

Tensor Tensor::filled(DType dtype, Shape shape, double v) {
  std::vector<double> data(static_cast<std::size_t>(num_elements(shape)), v);
  return Tensor(dtype, std::move(shape), std::move(data));
}

void Tensor::set(std::int64_t i, double v) {
  data_[static_cast<std::size_t>(i)] = cast_value(v, dtype_);
}

bool Tensor::has_nonfinite() const {
  if (!is_float(dtype_)) return false;
  for (double v : data_) {
    if (!std::isfinite(v)) return true;
  }
  return false;
}

bool Tensor::identical(const Tensor& other) const {
  if (dtype_ != other.dtype_ || shape_ != other.shape_) return false;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double a = data_[i], b = other.data_[i];
    if (std::isnan(a) && std::isnan(b)) continue;
    if (std::bit_cast<std::uint64_t>(a) != std::bit_cast<std::uint64_t>(b)) return false;
  }
  return true;
}

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little ||
                std::endian::native == std::endian::big);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  out.append(buf, sizeof(T));
}

template <typename T>
T get_le(const char* p) {
  char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

std::string Tensor::to_bytes() const {
  std::string out;
  out.reserve(data_.size() * dtype_size(dtype_));
  for (double v : data_) {
    switch (dtype_) {
      case DType::kF32: put_le(out, static_cast<float>(v)); break;
      case DType::kF64: put_le(out, v); break;
      case DType::kI32: put_le(out, static_cast<std::int32_t>(v)); break;
      case DType::kI64: put_le(out, static_cast<std::int64_t>(v)); break;
      case DType::kBool: put_le(out, static_cast<std::uint8_t>(v != 0.0)); break;
    }
  }
  return out;
}

Tensor Tensor::from_bytes(DType dtype, Shape shape, std::string_view bytes) {
  const std::size_t width = dtype_size(dtype);
  const auto n = static_cast<std::size_t>(num_elements(shape));
  if (bytes.size() != n * width) {
    throw ShapeMismatch("byte buffer of " + std::to_string(bytes.size()) +
                        " does not fit " + std::to_string(n) + " x " +
                        std::string(dtype_name(dtype)));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const char* p = bytes.data() + i * width;
    switch (dtype) {
      case DType::kF32: data[i] = get_le<float>(p); break;
      case DType::kF64: data[i] = get_le<double>(p); break;
      case DType::kI32: data[i] = get_le<std::int32_t>(p); break;
      case DType::kI64: data[i] = static_cast<double>(get_le<std::int64_t>(p)); break;
      case DType::kBool: data[i] = get_le<std::uint8_t>(p) ? 1.0 : 0.0; break;
    }
  }
  return Tensor(dtype, std::move(shape), std::move(data));
}

}  // namespace graphsmith
