// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Canonical JSON interchange for graphs and tensor maps.

#ifndef GRAPHSMITH_SERIALIZE_H_
#define GRAPHSMITH_SERIALIZE_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "graphsmith/graph.h"
#include "graphsmith/interpreter.h"

namespace graphsmith {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

inline constexpr int kFormatVersion = 1;

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);  // throws std::invalid_argument

nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

nlohmann::json tensors_to_json(const TensorMap& m);
TensorMap tensors_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const Graph& g);
// Throws ParseError (positions are reported as line 1, column 1 when the
// problem is structural rather than syntactic).
Graph graph_from_json(const nlohmann::json& j);

// Compact JSON with sorted keys; byte-identical for structurally equal graphs.
std::string serialize_graph(const Graph& g);
Graph parse_graph(std::string_view text);

// Parses JSON text, converting syntax errors into ParseError with position.
nlohmann::json parse_json(std::string_view text);

}  // namespace graphsmith

#endif  // GRAPHSMITH_SERIALIZE_H_
