// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GRAPHSMITH_DTYPE_H_
#define GRAPHSMITH_DTYPE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace graphsmith {

enum class DType : std::uint8_t { kF32, kF64, kI32, kI64, kBool };

inline constexpr DType kAllDTypes[] = {DType::kF32, DType::kF64, DType::kI32,
                                       DType::kI64, DType::kBool};

std::string_view dtype_name(DType dt);
std::optional<DType> parse_dtype(std::string_view name);

inline bool is_float(DType dt) {
  return dt == DType::kF32 || dt == DType::kF64;
}
inline bool is_int(DType dt) {
  return dt == DType::kI32 || dt == DType::kI64;
}

// Size in bytes of one element in the raw little-endian encoding.
std::size_t dtype_size(DType dt);

// Rounds `v` to a value representable in `dt` (f32 rounding, integer
// truncation with two's-complement wraparound, bool normalisation).
double cast_value(double v, DType dt);

}  // namespace graphsmith

#endif  // GRAPHSMITH_DTYPE_H_
