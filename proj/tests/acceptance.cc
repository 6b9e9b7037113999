// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "graphsmith/campaign.h"
#include "graphsmith/graphgen.h"
#include "graphsmith/interpreter.h"
#include "graphsmith/serialize.h"
#include "graphsmith/solver.h"
#include "graphsmith/valuesearch.h"

using namespace graphsmith;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::uint64_t fnv_seed(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Generated graphs type-check and execute.
Outcome validity(int graphs) {
  const Registry& reg = standard_registry();
  int failures = 0;
  std::string first;
  for (int seed = 0; seed < graphs; ++seed) {
    try {
      const Graph g = generate_graph(reg, 10, static_cast<std::uint64_t>(seed));
      check_types(g);
      Rng rng(static_cast<std::uint64_t>(seed));
      TensorMap in, w;
      random_leaves(g, 1, 9, rng, in, w);
      execute(g, in, w);
    } catch (const std::exception& e) {
      if (!failures++) first = fmt("seed %d: %s", seed, e.what());
    }
  }
  return {failures == 0, fmt("%d/%d graphs failed", failures, graphs) + (first.empty() ? "" : "; " + first)};
}

bool has_vulnerable_op(const Graph& g) {
  return std::any_of(g.nodes.begin(), g.nodes.end(), [](const Node& n) { return !vulnerabilities_of(n.op).empty(); });
}

// Lower bootstrap bound of sum(a) / sum(b) over paired indicators.
double ratio_lower_bound(const std::vector<int>& a, const std::vector<int>& b, double quantile) {
  Rng rng(2024);
  std::vector<double> ratios;
  const std::size_t n = a.size();
  for (int rep = 0; rep < 10000; ++rep) {
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rng.index(n);
      sa += a[k];
      sb += b[k];
    }
    ratios.push_back(sb == 0 ? INFINITY : sa / sb);
  }
  std::sort(ratios.begin(), ratios.end());
  return ratios[static_cast<std::size_t>(quantile * static_cast<double>(ratios.size()))];
}

// 2. Value search success and ordering at a 64 ms budget.
Outcome value_search(int graphs, double budget_ms) {
  const Registry& reg = standard_registry();
  std::vector<Graph> pool;
  for (std::uint64_t seed = 0; static_cast<int>(pool.size()) < graphs; ++seed) {
    Graph g = generate_graph(reg, 10, seed);
    if (has_vulnerable_op(g)) pool.push_back(std::move(g));
  }
  const SearchMode modes[] = {SearchMode::kGrad, SearchMode::kGradNoProxy, SearchMode::kSample};
  std::vector<int> ok[3];
  for (int m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      Rng rng(splitmix64(i * 3 + 17));
      SearchOptions opts;
      opts.mode = modes[m];
      opts.budget_ms = budget_ms;
      ok[m].push_back(search_values(pool[i], opts, rng).success ? 1 : 0);
    }
  }
  auto total = [](const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); };
  const int g = total(ok[0]), np = total(ok[1]), s = total(ok[2]);
  const double rate = static_cast<double>(g) / graphs;
  const double lo = ratio_lower_bound(ok[0], ok[2], 0.05);
  const bool pass = rate >= 0.9 && g >= np && np >= s && lo > 1.0;
  return {pass, fmt("grad %d, grad-noproxy %d, sample %d of %d (grad %.1f%%); grad/sample %.3f, 95%% lower bound %.3f",
                    g, np, s, graphs, 100 * rate, s ? static_cast<double>(g) / s : INFINITY, lo)};
}

// 3. Share of 20-node graphs with NaN/Inf under random [1, 9] leaves.
Outcome prevalence(int graphs) {
  const Registry& reg = standard_registry();
  int bad = 0;
  for (int seed = 0; seed < graphs; ++seed) {
    const Graph g = generate_graph(reg, 20, static_cast<std::uint64_t>(seed) + 100000);
    Rng rng(static_cast<std::uint64_t>(seed));
    TensorMap in, w;
    random_leaves(g, 1, 9, rng, in, w);
    bad += first_nonfinite(g, execute(g, in, w)).has_value();
  }
  const double share = static_cast<double>(bad) / graphs;
  return {share >= 0.3, fmt("%d/%d graphs (%.1f%%) hit NaN/Inf", bad, graphs, 100 * share)};
}

CampaignConfig campaign_config(const FaultSet& faults, double seconds, const fs::path& dir) {
  CampaignConfig c;
  c.seed = 1;
  c.workers = 1;
  c.time_budget_s = seconds;
  c.faults = faults;
  c.out_dir = dir;
  return c;
}

// 4. Each fault found by a single-worker campaign, and the report replays.
Outcome bug_finding(double seconds, const fs::path& root) {
  struct Case {
    std::string fault;
    std::set<VerdictKind> kinds;
  };
  const Case cases[] = {{"F1", {VerdictKind::kSemantic}},
                        {"F2", {VerdictKind::kCrash}},
                        {"F3", {VerdictKind::kSemantic, VerdictKind::kCrash}}};
  int found = 0;
  std::string detail;
  for (const Case& c : cases) {
    CampaignConfig cfg = campaign_config({c.fault}, seconds, root / c.fault);
    cfg.stop_when = [&](const BugReport& r) { return c.kinds.contains(r.kind); };
    const auto t0 = Clock::now();
    const CampaignResult res = run_campaign(cfg);
    const double took = seconds_since(t0);
    bool hit = false;
    std::string what = "none";
    for (const BugReport& r : res.reports) {
      if (!c.kinds.contains(r.kind)) continue;
      const ReplayResult rep = replay_report(root / c.fault / "reports" / report_file_name(r));
      hit = rep.matches;
      what = std::string(verdict_name(r.kind)) + (rep.matches ? ", replayed" : ", REPLAY MISMATCH");
      break;
    }
    found += hit;
    detail += fmt("%s: %s after %lld models/%.0fs; ", c.fault.c_str(), what.c_str(),
                  static_cast<long long>(res.stats.models), took);
  }
  return {found == 3, fmt("%d/3 faults found. ", found) + detail};
}

// 5. Fault-free campaign reports nothing.
Outcome zero_false_alarms(double seconds, const fs::path& root) {
  const CampaignResult res = run_campaign(campaign_config({}, seconds, root / "none"));
  std::string detail = fmt("%zu reports, %zu suppressed, %lld models", res.reports.size(), res.suppressed.size(),
                           static_cast<long long>(res.stats.models));
  if (!res.reports.empty()) detail += "; first: " + res.reports.front().signature;
  return {res.reports.empty(), detail};
}

// Mod jumps where x / y is an integer; the finite-difference stencil must not
// straddle one. With |y| >= 0.1 and h = 1e-6 a step moves x / y by < 1e-3.
bool near_jump(const std::string& op, const std::vector<Tensor>& point) {
  if (op != "Mod") return false;
  for (double y : point[1].values()) {
    if (std::abs(y) < 0.1) return true;
  }
  const Tensor* args[] = {&point[0], &point[1]};
  const Tensor q = kernel("Div").compute(args, {});
  for (double v : q.values()) {
    if (std::abs(v - std::round(v)) < 1e-3) return true;
  }
  return false;
}

// 6. Autodiff against central finite differences at random non-proxy points.
Outcome autodiff(int points) {
  const Registry& reg = standard_registry();
  int ops = 0, violations = 0, checked = 0;
  double worst = 0.0;
  std::string first, skipped;
  for (const OpSpec* spec : reg.generatable()) {
    const Kernel& k = kernel(spec->kernel);
    if (!k.vjp) continue;
    std::size_t row = spec->menu.size();
    for (std::size_t r = 0; r < spec->menu.size(); ++r) {
      const Signature& s = spec->menu[r];
      if (!s.inputs.empty() && s.inputs[0].dtype == DType::kF64 && s.outputs[0].dtype == DType::kF64) {
        row = r;
        break;
      }
    }
    if (row == spec->menu.size()) continue;
    Rng rng(fnv_seed(spec->name));
    int got = 0;
    for (int attempt = 0; got < points && attempt < points * 50; ++attempt) {
      const auto g = single_op_graph(*spec, row, rng.next());
      if (!g) continue;
      const Node& op = g->nodes.back();
      TensorMap in, w;
      random_leaves(*g, -3, 3, rng, in, w);
      std::vector<Tensor> point;
      for (const NodeRef& ref : op.inputs) {
        point.push_back(in.contains(ref.node) ? in.at(ref.node) : w.at(ref.node));
      }
      for (Tensor& t : point) t = Tensor(DType::kF64, t.shape(), {t.values().begin(), t.values().end()});
      if (!numerically_valid(*g, in, w) || near_jump(spec->kernel, point)) continue;
      double err;
      try {
        err = check_gradient(spec->kernel, op.attrs, point, 1e-6);
      } catch (const RegionExcluded&) {
        continue;
      }
      ++got;
      ++checked;
      worst = std::max(worst, err);
      if (!(err < 1e-4) && !violations++) first = fmt("%s err %.3g", spec->name.c_str(), err);
    }
    if (got == 0) {
      skipped += (skipped.empty() ? "" : ",") + spec->name;
    } else {
      ++ops;
    }
  }
  std::string detail = fmt("%d ops, %d points, %d violations, worst %.3g", ops, checked, violations, worst);
  if (!first.empty()) detail += "; first: " + first;
  if (!skipped.empty()) detail += "; proxy everywhere: " + skipped;
  return {violations == 0 && ops > 0, detail};
}

// 7. Binning increases unique operator instances.
Outcome binning(int graphs) {
  const Registry& reg = standard_registry();
  auto count = [&](int bins) {
    std::set<std::string> keys;
    GenOptions opts;
    opts.bins = bins;
    for (int seed = 0; seed < graphs; ++seed) {
      const Graph g = generate_graph(reg, 10, static_cast<std::uint64_t>(seed), opts);
      for (const Node& n : g.nodes) {
        if (!n.inputs.empty()) keys.insert(operator_instance_key(g, n));
      }
    }
    return keys.size();
  };
  const std::size_t with = count(7), without = count(0);
  const double ratio = static_cast<double>(with) / static_cast<double>(without);
  return {ratio >= 1.5, fmt("%zu instances with k=7, %zu without, ratio %.2f", with, without, ratio)};
}

// 8. Solver soundness over randomized try-add/rollback sequences.
Outcome solver(int sequences) {
  int violations = 0, accepted = 0, rejected = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (!violations++) first = what;
  };
  for (int seq = 0; seq < sequences; ++seq) {
    Rng rng(splitmix64(static_cast<std::uint64_t>(seq)));
    ConstraintStore store(static_cast<std::uint64_t>(seq));
    std::vector<sym::Expr> vars;
    const int nvars = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < nvars; ++i) {
      vars.push_back(sym::Expr::var(rng.coin(0.5) ? store.new_dim("d" + std::to_string(i))
                                                  : store.new_attr("a" + std::to_string(i))));
    }
    auto term = [&]() -> sym::Expr {
      const sym::Expr& v = vars[rng.index(vars.size())];
      const sym::Expr c(rng.uniform_int(-20, 40));
      switch (rng.uniform_int(0, 5)) {
        case 0: return v;
        case 1: return v + c;
        case 2: return v * vars[rng.index(vars.size())];
        case 3: return sym::floordiv(v, sym::Expr(rng.uniform_int(1, 5)));
        case 4: return sym::mod(v, sym::Expr(rng.uniform_int(1, 7)));
        default: return sym::Expr(rng.uniform_int(2, 4)) * v - vars[rng.index(vars.size())];
      }
    };
    auto predicate = [&]() {
      const sym::Expr a = term(), b = rng.coin(0.5) ? term() : sym::Expr(rng.uniform_int(-10, 200));
      sym::Predicate p;
      switch (rng.uniform_int(0, 5)) {
        case 0: p = a < b; break;
        case 1: p = a <= b; break;
        case 2: p = a > b; break;
        case 3: p = a >= b; break;
        case 4: p = sym::eq(a, b); break;
        default: p = sym::ne(a, b); break;
      }
      if (rng.coin(0.15)) p = p || (term() <= sym::Expr(rng.uniform_int(0, 50)));
      return p;
    };
    const int steps = static_cast<int>(rng.uniform_int(1, 8));
    for (int s = 0; s < steps; ++s) {
      std::vector<sym::Predicate> batch;
      const int n = static_cast<int>(rng.uniform_int(1, 3));
      for (int i = 0; i < n; ++i) batch.push_back(predicate());
      const auto model_before = store.model();
      const std::size_t committed_before = store.committed().size();
      const std::size_t symbols_before = store.symbols().size();
      if (store.try_add_constraints(batch)) {
        ++accepted;
        for (const sym::Predicate& p : store.committed()) {
          if (!sym::holds(p, store.model())) {
            fail(fmt("sequence %d step %d: model violates a committed predicate", seq, s));
          }
        }
      } else {
        ++rejected;
        if (store.model() != model_before || store.committed().size() != committed_before ||
            store.symbols().size() != symbols_before) {
          fail(fmt("sequence %d step %d: rejected try-add changed the store", seq, s));
        }
      }
    }
  }
  std::string detail = fmt("%d sequences, %d accepted, %d rejected, %d violations", sequences, accepted, rejected,
                           violations);
  if (!first.empty()) detail += "; first: " + first;
  return {violations == 0 && accepted > 0 && rejected > 0, detail};
}

// 9. Serialization round trip on generated graphs.
Outcome serialization(int graphs) {
  const Registry& reg = standard_registry();
  int failures = 0;
  std::string first;
  for (int seed = 0; seed < graphs; ++seed) {
    const Graph g = generate_graph(reg, 10, static_cast<std::uint64_t>(seed) + 500000);
    const std::string text = serialize_graph(g);
    const Graph back = parse_graph(text);
    if (!back.structurally_equal(g) || serialize_graph(back) != text) {
      if (!failures++) first = fmt("seed %d", seed);
    }
  }
  return {failures == 0, fmt("%d/%d graphs failed", failures, graphs) + (first.empty() ? "" : "; " + first)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  double campaign_s = 600.0;
  fs::path dir = fs::temp_directory_path() / "graphsmith-acceptance";
  app.add_option("--only", only, "Criteria to run (default all)")->check(CLI::Range(1, 9));
  app.add_option("--campaign-seconds", campaign_s, "Time budget of the criterion 4 and 5 campaigns");
  app.add_option("--dir", dir, "Scratch directory for campaign output");
  CLI11_PARSE(app, argc, argv);
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"validity by construction", [] { return validity(1000); }},
      {"numeric-validity search", [] { return value_search(200, 64.0); }},
      {"exceptional-value prevalence", [] { return prevalence(500); }},
      {"bug-finding oracle", [&] { return bug_finding(campaign_s, dir); }},
      {"zero false alarms", [&] { return zero_false_alarms(campaign_s, dir); }},
      {"autodiff fidelity", [] { return autodiff(100); }},
      {"binning diversity", [] { return binning(1000); }},
      {"solver soundness", [] { return solver(10000); }},
      {"serialization round trip", [] { return serialization(1000); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " (" << criteria[i].first << ", "
              << fmt("%.1fs", seconds_since(t0)) << "): " << o.detail << std::endl;
  }
  return failed;
}
