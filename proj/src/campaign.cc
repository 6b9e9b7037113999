// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/campaign.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "graphsmith/graphgen.h"
#include "graphsmith/rng.h"
#include "graphsmith/serialize.h"

namespace graphsmith {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

json config_to_json(const CampaignConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["time_budget_s"] = opt_json(c.time_budget_s);
  j["max_models"] = opt_json(c.max_models);
  j["stop_after_reports"] = c.stop_after_reports;
  j["max_nodes"] = c.max_nodes;
  j["bins"] = c.bins;
  j["search_mode"] = search_mode_name(c.search_mode);
  j["search_budget_ms"] = c.search_budget_ms;
  j["search_max_steps"] = opt_json(c.search_max_steps);
  j["opt_level"] = static_cast<int>(c.opt_level);
  j["faults"] = std::vector<std::string>(c.faults.begin(), c.faults.end());
  j["runner"] = c.runner;
  return j;
}

CampaignConfig config_from_json(const json& j) {
  CampaignConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.workers = j.at("workers").get<int>();
  c.time_budget_s = opt_from<double>(j, "time_budget_s");
  c.max_models = opt_from<std::int64_t>(j, "max_models");
  c.stop_after_reports = j.value("stop_after_reports", 0);
  c.max_nodes = j.at("max_nodes").get<int>();
  c.bins = j.at("bins").get<int>();
  const auto mode = parse_search_mode(j.at("search_mode").get<std::string>());
  if (!mode) throw std::invalid_argument("unknown search mode");
  c.search_mode = *mode;
  c.search_budget_ms = j.at("search_budget_ms").get<double>();
  c.search_max_steps = opt_from<int>(j, "search_max_steps");
  c.opt_level = j.at("opt_level").get<int>() == 0 ? OptLevel::kO0 : OptLevel::kO1;
  for (const json& f : j.at("faults")) c.faults.insert(f.get<std::string>());
  c.runner = j.value("runner", "");
  return c;
}

std::unique_ptr<Backend> make_backend(const CampaignConfig& c) {
  if (c.runner.empty()) return std::make_unique<PipelineBackend>(c.faults);
  return std::make_unique<ExternalBackend>(c.runner);
}

double CampaignStats::stall_rate() const {
  const std::int64_t attempts = models + generation_failures;
  return attempts == 0 ? 0.0 : static_cast<double>(generation_failures) / static_cast<double>(attempts);
}

json stats_to_json(const CampaignStats& s) {
  json j;
  j["models"] = s.models;
  j["generation_failures"] = s.generation_failures;
  j["short_generations"] = s.short_generations;
  j["search_success"] = s.search_success;
  j["verdicts"] = s.verdicts;
  j["unique_op_instances"] = s.unique_op_instances;
  j["unique_reports"] = s.unique_reports;
  j["phase_ms"] = s.phase_ms;
  return j;
}

std::string operator_instance_key(const Graph& g, const Node& n) {
  std::ostringstream os;
  os << n.op << '(';
  for (std::size_t i = 0; i < n.inputs.size(); ++i) {
    const Node* src = g.find(n.inputs[i].node);
    if (i) os << ',';
    if (src) os << dtype_name(src->type.dtype) << shape_to_string(src->type.shape);
  }
  os << ')';
  for (const auto& [k, v] : n.attrs) os << ' ' << k << '=' << v;
  return os.str();
}

std::string report_file_name(const BugReport& r) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(r.dedup_key)));
  return std::string(verdict_name(r.kind)) + "-" + hex + ".json";
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

class Campaign {
 public:
  explicit Campaign(const CampaignConfig& c) : cfg_(c), backend_(make_backend(c)), config_json_(config_to_json(c)) {}

  CampaignResult run() {
    if (!cfg_.out_dir.empty()) {
      fs::create_directories(cfg_.out_dir / "reports");
      fs::create_directories(cfg_.out_dir / "suppressed");
    }
    start_ = Clock::now();
    const ProbeResult probe = probe_backend_ops(*backend_, standard_registry(), cfg_.seed);
    gen_opts_.bins = cfg_.bins;
    gen_opts_.excluded = probe.unsupported;
    if (!cfg_.out_dir.empty()) {
      json unsupported = json::array();
      for (const auto& [op, dt] : probe.unsupported) unsupported.push_back({op, dtype_name(dt)});
      write_file_atomic(cfg_.out_dir / "probe.json",
                        json{{"backend", backend_->id()}, {"unsupported", unsupported}}.dump(2) + "\n");
    }

    const int workers = std::max(1, cfg_.workers);
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back([this, w] { work(w); });
      for (std::thread& t : pool) t.join();
    }
    if (first_error_) std::rethrow_exception(first_error_);

    std::lock_guard lock(mu_);
    result_.stats.unique_op_instances = static_cast<std::int64_t>(instances_.size());
    result_.stats.unique_reports = static_cast<std::int64_t>(result_.reports.size());
    result_.stats.phase_ms["total"] = ms_since(start_);
    write_stats_locked();
    return result_;
  }

 private:
  bool out_of_time() const {
    const double budget = cfg_.time_budget_s.value_or(cfg_.max_models ? 0.0 : 60.0);
    return budget > 0.0 && ms_since(start_) >= budget * 1000.0;
  }

  void work(int w) {
    try {
      Rng stream(splitmix64(cfg_.seed ^ splitmix64(static_cast<std::uint64_t>(w) + 1)));
      while (!stop_.load()) {
        if (out_of_time()) break;
        if (cfg_.max_models && claimed_.fetch_add(1) >= *cfg_.max_models) break;
        one_model(stream.next());
      }
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!first_error_) first_error_ = std::current_exception();
      stop_ = true;
    }
  }

  void one_model(std::uint64_t model_seed) {
    auto t0 = Clock::now();
    std::optional<GenResult> gen;
    try {
      gen.emplace(generate(standard_registry(), cfg_.max_nodes, model_seed, gen_opts_));
    } catch (const GenerationStalled&) {
      std::lock_guard lock(mu_);
      ++result_.stats.generation_failures;
      result_.stats.phase_ms["generate"] += ms_since(t0);
      return;
    }
    Rng crng(splitmix64(model_seed ^ 0xC0C0A5EULL));
    const Graph g = concretize(gen->model, crng);
    const double gen_ms = ms_since(t0);

    t0 = Clock::now();
    SearchOptions so;
    so.mode = cfg_.search_mode;
    so.budget_ms = cfg_.search_max_steps ? 1e12 : cfg_.search_budget_ms;
    so.max_steps = cfg_.search_max_steps;
    Rng srng(splitmix64(model_seed ^ 0x5EA4C4ULL));
    const SearchResult sr = search_values(g, so, srng);
    const double search_ms = ms_since(t0);

    t0 = Clock::now();
    Verdict v = test_one(g, sr.inputs, sr.weights, *backend_, {}, cfg_.opt_level);
    const double diff_ms = ms_since(t0);

    std::lock_guard lock(mu_);
    CampaignStats& st = result_.stats;
    ++st.models;
    st.short_generations += gen->short_generation;
    st.search_success += sr.success;
    ++st.verdicts[v.suppressed ? "suppressed" : std::string(verdict_name(v.kind))];
    st.phase_ms["generate"] += gen_ms;
    st.phase_ms["search"] += search_ms;
    st.phase_ms["difftest"] += diff_ms;
    for (const Node& n : g.nodes) {
      if (!n.inputs.empty()) instances_.insert(operator_instance_key(g, n));
    }
    if (v.report) {
      BugReport& r = *v.report;
      r.config = config_json_;
      if (v.suppressed) {
        if (suppressed_.add(r)) {
          if (!cfg_.out_dir.empty()) {
            json j = report_to_json(r);
            j["suppression_reason"] = v.suppression_reason;
            write_file_atomic(cfg_.out_dir / "suppressed" / report_file_name(r), j.dump(2) + "\n");
          }
          result_.suppressed.push_back(std::move(r));
        }
      } else if (sink_.add(r)) {
        if (!cfg_.out_dir.empty()) {
          write_file_atomic(cfg_.out_dir / "reports" / report_file_name(r), report_to_json(r).dump(2) + "\n");
        }
        if (cfg_.stop_when && cfg_.stop_when(r)) stop_ = true;
        result_.reports.push_back(std::move(r));
        if (cfg_.stop_after_reports > 0 && static_cast<int>(result_.reports.size()) >= cfg_.stop_after_reports) {
          stop_ = true;
        }
      }
    }
    st.unique_op_instances = static_cast<std::int64_t>(instances_.size());
    st.unique_reports = static_cast<std::int64_t>(result_.reports.size());
    if (ms_since(last_stats_) > 1000.0) write_stats_locked();
  }

  void write_stats_locked() {
    last_stats_ = Clock::now();
    if (cfg_.out_dir.empty()) return;
    write_file_atomic(cfg_.out_dir / "stats.json", stats_to_json(result_.stats).dump(2) + "\n");
  }

  const CampaignConfig& cfg_;
  std::unique_ptr<Backend> backend_;
  json config_json_;
  GenOptions gen_opts_;
  Clock::time_point start_;
  Clock::time_point last_stats_ = Clock::now();
  std::atomic<bool> stop_{false};
  std::atomic<std::int64_t> claimed_{0};
  std::mutex mu_;
  std::exception_ptr first_error_;
  CampaignResult result_;
  std::set<std::string> instances_;
  ReportSink sink_;
  ReportSink suppressed_;
};

}  // namespace

CampaignResult run_campaign(const CampaignConfig& config) { return Campaign(config).run(); }

ReplayResult replay_report(const fs::path& path) {
  ReplayResult res;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptReport("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  CampaignConfig cfg;
  try {
    res.stored = report_from_json(parse_json(text.str()));
    if (!res.stored.config.empty()) cfg = config_from_json(res.stored.config);
  } catch (const std::exception& e) {
    throw CorruptReport(path.string() + ": " + e.what());
  }
  cfg.faults = res.stored.faults;
  const std::unique_ptr<Backend> backend = make_backend(cfg);
  res.verdict = test_one(res.stored.graph, res.stored.inputs, res.stored.weights, *backend, {}, cfg.opt_level);
  res.matches = res.verdict.kind == res.stored.kind && res.verdict.report &&
                res.verdict.report->dedup_key == res.stored.dedup_key;
  return res;
}

}  // namespace graphsmith
