// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Differential testing of a backend against the reference interpreter, with
// O0 fallback localization, false-alarm filtering and report dedup.

#ifndef GRAPHSMITH_DIFFTEST_H_
#define GRAPHSMITH_DIFFTEST_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsmith/graph.h"
#include "graphsmith/graphgen.h"
#include "graphsmith/interpreter.h"
#include "graphsmith/opspec.h"
#include "graphsmith/passes.h"

namespace graphsmith {

struct ComparisonPolicy {
  double rtol = 1e-2;
  double atol = 1e-3;
  bool equal_nan = false;
};

// |a - b| <= atol + rtol * max(|a|, |b|) elementwise. Throws ShapeMismatch
// when dtype or shape differ.
bool allclose(const Tensor& a, const Tensor& b, const ComparisonPolicy& policy = {});

// max |a - b| / max(|a|, |b|) over elements; 0 where both are 0.
double max_relative_error(const Tensor& a, const Tensor& b);

// Backend failed to compile or run a graph. The message is the error signature.
class BackendCrash : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The backend could not be started at all.
class BackendUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackendRun {
  std::vector<Tensor> outputs;
  // Per-node values of the graph the backend actually ran, when it exposes
  // them. Used to find the first mismatching node.
  std::map<std::string, Tensor> node_values;
  // Op of each node in the executed graph, aligned with node_values.
  std::map<std::string, std::string> node_ops;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  virtual std::string version() const { return "1"; }
  // Throws BackendCrash or BackendUnreachable.
  virtual BackendRun run(const Graph& g, const TensorMap& inputs, const TensorMap& weights, OptLevel level) const = 0;
};

// optimize() followed by the reference interpreter.
class PipelineBackend : public Backend {
 public:
  explicit PipelineBackend(FaultSet faults = {}) : faults_(std::move(faults)) {}
  std::string id() const override;
  BackendRun run(const Graph& g, const TensorMap& inputs, const TensorMap& weights, OptLevel level) const override;
  const FaultSet& faults() const { return faults_; }

 private:
  FaultSet faults_;
};

// Subprocess backend: `<command> run <graph.json> <inputs.json> <outputs.json>`
// with GRAPHSMITH_OPT_LEVEL set in the environment. inputs.json holds
// {"inputs": {...}, "weights": {...}}; outputs.json holds {"outputs": [...]}.
// A nonzero exit or a timeout is a crash whose signature is the last stderr
// line; exit status 126/127 (command not runnable) is BackendUnreachable.
class ExternalBackend : public Backend {
 public:
  explicit ExternalBackend(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : command_(std::move(command)), timeout_(timeout) {}
  std::string id() const override { return "external:" + command_; }
  BackendRun run(const Graph& g, const TensorMap& inputs, const TensorMap& weights, OptLevel level) const override;

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
};

nlohmann::json run_request_to_json(const TensorMap& inputs, const TensorMap& weights);
nlohmann::json outputs_to_json(const std::vector<Tensor>& outputs);
std::vector<Tensor> outputs_from_json(const nlohmann::json& j);

enum class VerdictKind { kPass, kCrash, kSemantic, kSkippedNumeric };
std::string_view verdict_name(VerdictKind k);
std::optional<VerdictKind> parse_verdict(std::string_view s);

struct BugReport {
  VerdictKind kind = VerdictKind::kCrash;
  Graph graph;
  TensorMap inputs;
  TensorMap weights;
  std::string backend;
  FaultSet faults;
  // "optimization" when O0 agrees with the reference, else "backend".
  std::string localization;
  // Crash message, or a description of the first mismatching node.
  std::string signature;
  std::string first_mismatch;  // node id, semantic only
  double max_rel_error = 0.0;  // semantic only
  std::string dedup_key;
  nlohmann::json config;  // campaign configuration, filled by the driver
};

nlohmann::json report_to_json(const BugReport& r);
BugReport report_from_json(const nlohmann::json& j);  // throws ParseError

struct Verdict {
  VerdictKind kind = VerdictKind::kPass;
  std::optional<BugReport> report;
  // Semantic mismatches matching a known false-alarm pattern keep their
  // report here with kind kPass.
  bool suppressed = false;
  std::string suppression_reason;
};

// Replaces graph node ids with <node>, hex addresses with <addr>, numbers of
// more than 4 digits with <num> and filesystem paths with <path>.
std::string normalize_signature(std::string_view text, const Graph* graph = nullptr);

// Reason to suppress a mismatch observed at node `site`, if any: the path
// into `site` crosses a saturated Sigmoid/Tanh (|pre-activation| > 8) and
// then a discretizing op (Floor, Ceil, Equal, ArgMax), or an ArgMax on it
// sees a near tie.
std::optional<std::string> filter_false_alarm(const Graph& g, const std::map<std::string, Tensor>& reference,
                                              const std::string& site, const ComparisonPolicy& policy = {});

// Backend crashes are reported whatever the values. Otherwise a reference
// run holding NaN/Inf at any node, or a backend output holding NaN/Inf,
// gives kSkippedNumeric. `level` is the level under test; mismatches at O1
// are re-checked at O0.
Verdict test_one(const Graph& g, const TensorMap& inputs, const TensorMap& weights, const Backend& backend,
                 const ComparisonPolicy& policy = {}, OptLevel level = OptLevel::kO1);

struct ProbeResult {
  std::set<std::pair<std::string, DType>> supported;
  OpExclusions unsupported;
};

// Runs one single-op graph per (spec, dtype) pair. Results are cached per
// backend id and version for the life of the process.
ProbeResult probe_backend_ops(const Backend& backend, const Registry& registry, std::uint64_t seed = 0);

// Thread-safe dedup of reports by key.
class ReportSink {
 public:
  // True iff the key was not seen before.
  bool add(const BugReport& r);
  std::size_t size() const;
  std::vector<std::string> keys() const;

 private:
  mutable std::mutex mu_;
  std::set<std::string> keys_;
};

}  // namespace graphsmith

#endif  // GRAPHSMITH_DIFFTEST_H_
