// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// graphsmith: fuzz, replay, gen, run, probe.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "graphsmith/campaign.h"
#include "graphsmith/graphgen.h"
#include "graphsmith/interpreter.h"
#include "graphsmith/serialize.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace graphsmith;

namespace {

// "90", "90s", "10m", "1h", "250ms".
double parse_duration_s(const std::string& text) {
  static const std::regex re(R"(^\s*([0-9]*\.?[0-9]+)\s*(ms|s|m|h)?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw CLI::ValidationError("--time", "bad duration '" + text + "'");
  const double v = std::stod(m[1]);
  const std::string unit = m[2];
  if (unit == "ms") return v / 1000.0;
  if (unit == "m") return v * 60.0;
  if (unit == "h") return v * 3600.0;
  return v;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Common {
  std::uint64_t seed = 0;
  fs::path out_dir;
  std::string format = "text";
  int opt_level = 1;
  std::string faults;
  int max_nodes = 10;
  int bins = 7;
  std::string runner;
};

std::uint64_t effective_seed(const Common& c) {
  if (const char* env = std::getenv("GRAPHSMITH_SEED")) return std::stoull(env);
  return c.seed;
}

int cmd_fuzz(const Common& c, int workers, const std::string& time, std::optional<std::int64_t> models,
             const std::string& mode, double budget_ms, std::optional<int> max_steps, int stop_after) {
  CampaignConfig cfg;
  cfg.seed = effective_seed(c);
  cfg.workers = workers;
  if (!time.empty()) cfg.time_budget_s = parse_duration_s(time);
  cfg.max_models = models;
  cfg.stop_after_reports = stop_after;
  cfg.max_nodes = c.max_nodes;
  cfg.bins = c.bins;
  cfg.search_mode = *parse_search_mode(mode);
  cfg.search_budget_ms = budget_ms;
  cfg.search_max_steps = max_steps;
  cfg.opt_level = c.opt_level == 0 ? OptLevel::kO0 : OptLevel::kO1;
  cfg.faults = parse_faults(c.faults);
  cfg.runner = c.runner;
  cfg.out_dir = c.out_dir.empty() ? fs::path("graphsmith-out") : c.out_dir;

  const CampaignResult res = run_campaign(cfg);
  const CampaignStats& s = res.stats;
  if (c.format == "json") {
    std::cout << stats_to_json(s).dump(2) << "\n";
  } else {
    std::cout << "models " << s.models << ", generation failures " << s.generation_failures << ", search success "
              << s.search_success << ", unique reports " << s.unique_reports << "\n";
    for (const auto& [k, n] : s.verdicts) std::cout << "  " << k << " " << n << "\n";
    for (const BugReport& r : res.reports) {
      std::cout << verdict_name(r.kind) << " [" << r.localization << "] " << r.signature << "\n";
    }
    std::cout << "output in " << cfg.out_dir.string() << "\n";
  }
  if (s.stall_rate() > 0.5) {
    std::cerr << "error: " << s.generation_failures << " of " << s.models + s.generation_failures
              << " generation attempts stalled\n";
    return 3;
  }
  return 0;
}

int cmd_replay(const Common& c, const std::string& path) {
  const ReplayResult r = replay_report(path);
  const std::string kind(verdict_name(r.verdict.kind));
  if (c.format == "json") {
    json j{{"stored", verdict_name(r.stored.kind)},
           {"verdict", kind},
           {"matches", r.matches},
           {"signature", r.verdict.report ? r.verdict.report->signature : ""}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << kind;
    if (r.verdict.report) std::cout << ": " << r.verdict.report->signature;
    std::cout << "\n" << (r.matches ? "reproduced" : "NOT reproduced") << "\n";
  }
  return r.matches ? 0 : 1;
}

int cmd_gen(const Common& c, int count) {
  const fs::path dir = c.out_dir.empty() ? fs::path("graphsmith-graphs") : c.out_dir;
  fs::create_directories(dir);
  GenOptions opts;
  opts.bins = c.bins;
  Rng stream(splitmix64(effective_seed(c)));
  for (int i = 0; i < count; ++i) {
    const Graph g = generate_graph(standard_registry(), c.max_nodes, stream.next(), opts);
    char name[32];
    std::snprintf(name, sizeof name, "graph-%05d.json", i);
    write_file_atomic(dir / name, serialize_graph(g) + "\n");
  }
  if (c.format == "json") {
    std::cout << json{{"count", count}, {"out_dir", dir.string()}}.dump() << "\n";
  } else {
    std::cout << "wrote " << count << " graphs to " << dir.string() << "\n";
  }
  return 0;
}

// Also serves as an external runner: `graphsmith [--inject-fault F] run g i o`.
int cmd_run(const Common& c, bool level_given, const std::string& graph_path, const std::string& inputs_path,
            const std::string& outputs_path) {
  OptLevel level = c.opt_level == 0 ? OptLevel::kO0 : OptLevel::kO1;
  if (!level_given) {
    if (const char* env = std::getenv("GRAPHSMITH_OPT_LEVEL")) level = std::string(env) == "0" ? OptLevel::kO0 : OptLevel::kO1;
  }
  const Graph g = parse_graph(read_text(graph_path));
  TensorMap inputs, weights;
  if (!inputs_path.empty()) {
    const json req = parse_json(read_text(inputs_path));
    inputs = tensors_from_json(req.at("inputs"));
    weights = tensors_from_json(req.value("weights", json::object()));
  }
  const PipelineBackend backend(parse_faults(c.faults));
  BackendRun out;
  try {
    out = backend.run(g, inputs, weights, level);
  } catch (const BackendCrash& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  const std::string text = outputs_to_json(out.outputs).dump() + "\n";
  if (outputs_path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(outputs_path, text);
  }
  return 0;
}

int cmd_probe(const Common& c) {
  CampaignConfig cfg;
  cfg.faults = parse_faults(c.faults);
  cfg.runner = c.runner;
  const auto backend = make_backend(cfg);
  const ProbeResult p = probe_backend_ops(*backend, standard_registry(), effective_seed(c));
  if (c.format == "json") {
    json sup = json::array(), uns = json::array();
    for (const auto& [op, dt] : p.supported) sup.push_back({op, dtype_name(dt)});
    for (const auto& [op, dt] : p.unsupported) uns.push_back({op, dtype_name(dt)});
    std::cout << json{{"backend", backend->id()}, {"supported", sup}, {"unsupported", uns}}.dump(2) << "\n";
  } else {
    std::cout << backend->id() << ": " << p.supported.size() << " supported, " << p.unsupported.size()
              << " unsupported\n";
    for (const auto& [op, dt] : p.unsupported) std::cout << "  unsupported " << op << " " << dtype_name(dt) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-level fuzzer for tensor compilers"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--seed", c.seed, "Campaign seed (GRAPHSMITH_SEED overrides)");
  app.add_option("--out-dir", c.out_dir, "Output directory");
  app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  auto* level_opt = app.add_option("--opt-level", c.opt_level, "Optimization level")->check(CLI::IsMember({0, 1}));
  app.add_option("--inject-fault", c.faults, "Comma-separated fault ids, e.g. F1,F3");
  app.add_option("--max-nodes", c.max_nodes, "Operators per generated graph")->check(CLI::Range(1, 1000));
  app.add_option("--bins", c.bins, "Attribute bins (0 disables binning)")->check(CLI::Range(0, 64));
  app.add_option("--runner", c.runner, "External runner command (default: built-in pipeline)");

  auto* fuzz = app.add_subcommand("fuzz", "Run a fuzzing campaign")->fallthrough();
  int workers = 1;
  std::string time;
  std::optional<std::int64_t> models;
  std::string mode = "grad";
  double budget_ms = 64.0;
  std::optional<int> max_steps;
  int stop_after = 0;
  fuzz->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
  fuzz->add_option("--time", time, "Time budget, e.g. 60s or 10m");
  fuzz->add_option("--models", models, "Stop after this many models");
  fuzz->add_option("--search-mode", mode, "Value search")->check(CLI::IsMember({"grad", "grad-noproxy", "sample"}));
  fuzz->add_option("--search-budget-ms", budget_ms, "Value-search budget per model");
  fuzz->add_option("--search-max-steps", max_steps, "Step cap per model; replaces the wall-clock budget");
  fuzz->add_option("--stop-after-reports", stop_after, "Stop once this many unique reports exist");

  auto* replay = app.add_subcommand("replay", "Re-run a stored report")->fallthrough();
  std::string report_path;
  replay->add_option("report", report_path, "Report file")->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen", "Generate graphs only")->fallthrough();
  int count = 10;
  gen->add_option("--count", count, "Number of graphs")->check(CLI::Range(1, 10000000));

  auto* run = app.add_subcommand("run", "Execute a graph file")->fallthrough();
  std::string graph_path, inputs_path, outputs_path;
  run->add_option("graph", graph_path, "Graph JSON")->required()->check(CLI::ExistingFile);
  run->add_option("inputs", inputs_path, "Inputs JSON ({\"inputs\":..., \"weights\":...})")->check(CLI::ExistingFile);
  run->add_option("outputs", outputs_path, "Where to write outputs (default stdout)");

  auto* probe = app.add_subcommand("probe", "Probe backend operator support")->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*fuzz) return cmd_fuzz(c, workers, time, models, mode, budget_ms, max_steps, stop_after);
    if (*replay) return cmd_replay(c, report_path);
    if (*gen) return cmd_gen(c, count);
    if (*run) return cmd_run(c, level_opt->count() > 0, graph_path, inputs_path, outputs_path);
    if (*probe) return cmd_probe(c);
  } catch (const CorruptReport& e) {
    std::cerr << "corrupt report: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
