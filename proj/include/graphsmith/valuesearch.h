// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Searches for graph inputs and weights under which no operator produces
// NaN or Inf, guided by gradients of vulnerable-operator losses.

#ifndef GRAPHSMITH_VALUESEARCH_H_
#define GRAPHSMITH_VALUESEARCH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphsmith/graph.h"
#include "graphsmith/interpreter.h"
#include "graphsmith/opspec.h"
#include "graphsmith/rng.h"

namespace graphsmith {

inline constexpr double kStrictSlack = 1e-10;

// Loss of a tensor inequality over the op inputs `args` (indexed by the
// inequality's operand slots): sum of max(f, 0), or max(f + eps, 0) for the
// strict form. When `grads` is set it receives d(loss)/d(arg) per operand
// slot listed in the inequality (empty buffers for others).
double loss_from_inequality(const TensorInequality& pred, std::span<const Tensor* const> args,
                            std::vector<std::vector<double>>* grads = nullptr);

enum class SearchMode { kGrad, kGradNoProxy, kSample };

std::string_view search_mode_name(SearchMode m);
std::optional<SearchMode> parse_search_mode(std::string_view s);

struct SearchOptions {
  SearchMode mode = SearchMode::kGrad;
  double budget_ms = 64.0;
  // When set, the search also stops after this many iterations. Used for
  // reproducible runs where wall-clock budgets would vary.
  std::optional<int> max_steps;
  double learning_rate = 0.5;
  double init_lo = 1.0;
  double init_hi = 9.0;
};

struct SearchResult {
  bool success = false;
  TensorMap inputs;
  TensorMap weights;
  int steps = 0;  // descent steps, or draws for the sampling mode
  double elapsed_ms = 0.0;
};

// Vulnerable-operator predicates for an interpreter op (empty if none).
const std::vector<TensorInequality>& vulnerabilities_of(std::string_view op);

// Random leaf values in [init_lo, init_hi] for every Input and Weight.
void random_leaves(const Graph& graph, double lo, double hi, Rng& rng, TensorMap& inputs, TensorMap& weights);

// True when executing the graph on the given leaves yields no NaN/Inf at any node.
bool numerically_valid(const Graph& graph, const TensorMap& inputs, const TensorMap& weights);

SearchResult search_values(const Graph& graph, const SearchOptions& options, Rng& rng);

// Same, starting from the given leaves instead of a random draw.
SearchResult search_values_from(const Graph& graph, const SearchOptions& options, Rng& rng, TensorMap inputs,
                                TensorMap weights);

// Rejection sampling from [1, 9]; succeeds on the first NaN/Inf-free draw.
SearchResult sample_baseline(const Graph& graph, Rng& rng, int tries);

}  // namespace graphsmith

#endif  // GRAPHSMITH_VALUESEARCH_H_
