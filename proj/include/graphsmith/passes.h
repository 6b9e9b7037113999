// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// A small graph optimizer used as the system under test, with a registry of
// deliberately buggy rewrites that can be switched on per campaign.

#ifndef GRAPHSMITH_PASSES_H_
#define GRAPHSMITH_PASSES_H_

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphsmith/graph.h"

namespace graphsmith {

class DuplicateFaultId : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownFault : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A pass threw, or left the graph ill-typed.
class PassCrash : public std::runtime_error {
 public:
  PassCrash(std::string pass, const std::string& what)
      : std::runtime_error(pass + ": " + what), pass_(std::move(pass)) {}
  const std::string& pass() const { return pass_; }

 private:
  std::string pass_;
};

struct Fault {
  std::string id;
  std::string pass;
  std::string description;
};

class FaultRegistry {
 public:
  void register_fault(Fault f);
  const Fault* find(std::string_view id) const;
  const std::vector<Fault>& all() const { return faults_; }

 private:
  std::vector<Fault> faults_;
};

// F1, F2 and F3.
const FaultRegistry& standard_faults();

using FaultSet = std::set<std::string>;

// Parses "F1,F3" (empty string = none). Throws UnknownFault.
FaultSet parse_faults(std::string_view list);

enum class OptLevel { kO0 = 0, kO1 = 1 };

inline constexpr int kMaxPipelineRounds = 10;

// Individual passes; each returns true when it changed the graph.
bool constant_fold(Graph& g, const FaultSet& faults);
bool algebraic_simplify(Graph& g, const FaultSet& faults);
bool elementwise_fuse(Graph& g, const FaultSet& faults);
bool dead_node_elim(Graph& g, const FaultSet& faults);

struct PipelineStats {
  int rounds = 0;
  std::vector<std::string> applied;  // pass names that changed the graph, in order
};

// O0 returns the graph unchanged. O1 runs the passes to a fixpoint, type
// checking after every pass. Throws PassCrash.
Graph optimize(const Graph& g, OptLevel level, const FaultSet& faults = {}, PipelineStats* stats = nullptr);

}  // namespace graphsmith

#endif  // GRAPHSMITH_PASSES_H_
