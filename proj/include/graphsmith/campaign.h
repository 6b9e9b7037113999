// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Fuzzing campaigns: generate, search values, difftest, dedup and record.

#ifndef GRAPHSMITH_CAMPAIGN_H_
#define GRAPHSMITH_CAMPAIGN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsmith/difftest.h"
#include "graphsmith/passes.h"
#include "graphsmith/valuesearch.h"

namespace graphsmith {

class CorruptReport : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CampaignConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  // The campaign stops at whichever limit comes first. With neither set it
  // runs for 60 s.
  std::optional<double> time_budget_s;
  std::optional<std::int64_t> max_models;
  // Stop once this many unique reports exist; 0 never stops early.
  int stop_after_reports = 0;
  // Stop at the first unique report this accepts. Not serialized.
  std::function<bool(const BugReport&)> stop_when;
  int max_nodes = 10;
  int bins = 7;
  SearchMode search_mode = SearchMode::kGrad;
  double search_budget_ms = 64.0;
  // Step cap for reproducible searches; disables the wall-clock budget.
  std::optional<int> search_max_steps;
  OptLevel opt_level = OptLevel::kO1;
  FaultSet faults;
  // Empty selects the built-in pipeline, otherwise an external runner command.
  std::string runner;
  std::filesystem::path out_dir;  // empty writes nothing
};

nlohmann::json config_to_json(const CampaignConfig& c);
CampaignConfig config_from_json(const nlohmann::json& j);

// Backend named by the config.
std::unique_ptr<Backend> make_backend(const CampaignConfig& c);

struct CampaignStats {
  std::int64_t models = 0;
  std::int64_t generation_failures = 0;  // GenerationStalled
  std::int64_t short_generations = 0;
  std::int64_t search_success = 0;
  std::map<std::string, std::int64_t> verdicts;  // pass, crash, semantic, skipped_numeric, suppressed
  std::int64_t unique_op_instances = 0;
  std::int64_t unique_reports = 0;
  std::map<std::string, double> phase_ms;  // generate, search, difftest, total

  // Fraction of generation attempts that stalled.
  double stall_rate() const;
};

// Everything but phase_ms is deterministic for a fixed config with one worker
// and search_max_steps set.
nlohmann::json stats_to_json(const CampaignStats& s);

struct CampaignResult {
  CampaignStats stats;
  std::vector<BugReport> reports;     // unique, in discovery order
  std::vector<BugReport> suppressed;  // unique by key
};

// Op type, input types and attributes of a node.
std::string operator_instance_key(const Graph& g, const Node& n);

// Runs the campaign; writes stats.json, reports/ and suppressed/ under
// out_dir when it is set. Throws BackendUnreachable.
CampaignResult run_campaign(const CampaignConfig& config);

// File name used for a report: <kind>-<16 hex digits of the key hash>.json.
std::string report_file_name(const BugReport& r);

// Replays a stored report with the backend named in its config. Throws
// CorruptReport for unreadable files.
struct ReplayResult {
  BugReport stored;
  Verdict verdict;
  bool matches = false;  // same verdict kind and dedup key
};
ReplayResult replay_report(const std::filesystem::path& path);

// Writes text to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace graphsmith

#endif  // GRAPHSMITH_CAMPAIGN_H_
