// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Incremental generation of valid computation graphs by forward and backward
// operator insertion, and concretization into executable graphs.

#ifndef GRAPHSMITH_GRAPHGEN_H_
#define GRAPHSMITH_GRAPHGEN_H_

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphsmith/graph.h"
#include "graphsmith/opspec.h"
#include "graphsmith/solver.h"

namespace graphsmith {

class GenerationStalled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Upper bound on elements per generated tensor.
inline constexpr std::int64_t kElementCap = std::int64_t{1} << 12;

struct SymNode {
  int id = 0;
  bool placeholder = true;
  const OpSpec* spec = nullptr;
  OpInstance inst;
  std::vector<int> inputs;
  AbsTensor type;
};

class GraphModel {
 public:
  explicit GraphModel(std::uint64_t seed = 0) : store(seed) {}

  ConstraintStore store;
  std::vector<SymNode> nodes;  // indexed by id; insertion order, not topological

  int add_placeholder(AbsTensor type);
  std::vector<int> placeholders() const;
  // Ids of every node output (all nodes are single-output).
  std::vector<int> intermediates() const;
  int num_ops() const;

  std::vector<int> consumers(int id) const;
  std::vector<int> topo_order() const;  // throws std::logic_error on a cycle
  bool connected() const;
  bool acyclic() const;
  std::string describe() const;
};

struct Combination {
  std::size_t row = 0;
  std::vector<int> picks;  // indices into the pool, one per menu slot
};

// Every (row, picks) whose (dtype, rank) pairs match a menu row.
std::vector<Combination> type_match(const std::vector<TypeSig>& pool, const std::vector<Signature>& menu,
                                    std::size_t limit = 100000);

// Adds requires(v), output dims >= 1, element caps and `extra` to the store.
bool solve_insertion(GraphModel& m, const std::vector<sym::Predicate>& extra, const OpSpec& spec,
                     const OpInstance& inst, const std::vector<AbsTensor>& v, std::vector<AbsTensor>* outputs);

// (spec name, dtype) pairs a backend cannot run; see row_dtype.
using OpExclusions = std::set<std::pair<std::string, DType>>;

// The dtype that identifies a menu row: first input, or first output for
// nullary rows.
DType row_dtype(const Signature& row);

struct GenOptions {
  int bins = 7;  // 0 disables binning
  OpExclusions excluded;
};

bool forward_insert(GraphModel& m, const OpSpec& spec, Rng& rng, const GenOptions& opts = {});
bool backward_insert(GraphModel& m, const OpSpec& spec, Rng& rng, const GenOptions& opts = {});

struct GenResult {
  GraphModel model;
  bool short_generation = false;
  int attempts = 0;
};

GenResult generate(const Registry& registry, int target_nodes, std::uint64_t seed, const GenOptions& opts = {});

// Substitutes the model and turns placeholders into Inputs or Weights (at
// least one Input). Weight payloads are filled with values in [-1, 1].
Graph concretize(const GraphModel& m, Rng& rng);

// A graph holding one instance of spec using the given menu row, fed by
// fresh placeholders. Nullopt when the row cannot be instantiated.
std::optional<Graph> single_op_graph(const OpSpec& spec, std::size_t row, std::uint64_t seed);

// Convenience: generate then concretize.
Graph generate_graph(const Registry& registry, int target_nodes, std::uint64_t seed, const GenOptions& opts = {},
                     bool* short_generation = nullptr);

}  // namespace graphsmith

#endif  // GRAPHSMITH_GRAPHGEN_H_
