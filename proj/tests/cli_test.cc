// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the graphsmith binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "graph_builder.h"
#include "graphsmith/campaign.h"
#include "graphsmith/serialize.h"

using namespace graphsmith;
using graphsmith::testing::Builder;
using graphsmith::testing::f32;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GRAPHSMITH_CLI;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("graphsmith-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int sh(const std::string& cmd, bool quiet = true) {
  const int rc = std::system((quiet ? cmd + " > /dev/null 2>&1" : cmd).c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json stats_without_timing(const fs::path& dir) {
  nlohmann::json j = parse_json(slurp(dir / "stats.json"));
  j.erase("phase_ms");
  return j;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

const std::string kFuzzArgs = " --inject-fault F3 fuzz --models 150 --search-max-steps 64";

}  // namespace

TEST_CASE("fuzz is deterministic with one worker") {
  const fs::path a = scratch("det-a"), b = scratch("det-b"), c = scratch("det-c");
  REQUIRE(sh(kCli + " --seed 7 --out-dir " + a.string() + kFuzzArgs) == 0);
  REQUIRE(sh(kCli + " --seed 7 --out-dir " + b.string() + kFuzzArgs) == 0);
  REQUIRE(sh("GRAPHSMITH_SEED=7 " + kCli + " --seed 99 --out-dir " + c.string() + kFuzzArgs) == 0);
  const auto sa = stats_without_timing(a);
  CHECK(sa.at("models") == 150);
  CHECK(sa == stats_without_timing(b));
  CHECK(sa == stats_without_timing(c));
  const auto ra = dir_contents(a / "reports");
  CHECK_FALSE(ra.empty());
  CHECK(ra == dir_contents(b / "reports"));
  CHECK(ra == dir_contents(c / "reports"));

  // Every report replays to the same verdict.
  for (const auto& [name, text] : ra) {
    CHECK_MESSAGE(sh(kCli + " replay " + (a / "reports" / name).string()) == 0, name);
  }
}

TEST_CASE("replay rejects corrupt reports") {
  const fs::path d = scratch("corrupt");
  std::ofstream(d / "bad.json") << "{\"kind\": \"semantic\"";
  CHECK(sh(kCli + " replay " + (d / "bad.json").string()) == 2);
}

TEST_CASE("gen with one node per graph") {
  const fs::path d = scratch("gen");
  REQUIRE(sh(kCli + " --seed 3 --max-nodes 1 --out-dir " + d.string() + " gen --count 25") == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(d)) {
    const Graph g = parse_graph(slurp(e.path()));
    int ops = 0;
    for (const Node& n : g.nodes) ops += !n.inputs.empty();
    CHECK(ops == 1);
    ++files;
  }
  CHECK(files == 25);
}

TEST_CASE("run serves as an external runner") {
  const fs::path d = scratch("run");
  Builder b;
  auto x = b.input("x", DType::kF32, {});
  auto y = b.input("y", DType::kF32, {});
  auto i = b.input("i", DType::kF32, {});
  auto z = b.input("z", DType::kF32, {});
  auto m = b.op("m", "Mod", {x, y});
  auto dv = b.op("d", "Div", {m, i});
  auto f = b.op("f", "Floor", {dv});
  auto p = b.op("p", "Mul", {f, i});
  b.output(b.op("r", "Mod", {p, z}));
  const TensorMap in{{"x", f32({8})}, {"y", f32({5})}, {"i", f32({2})}, {"z", f32({3})}};
  std::ofstream(d / "graph.json") << serialize_graph(b.g);
  std::ofstream(d / "inputs.json") << run_request_to_json(in, {}).dump();

  const std::string args = (d / "graph.json").string() + " " + (d / "inputs.json").string() + " ";
  REQUIRE(sh(kCli + " --inject-fault F1 run " + args + (d / "o1.json").string()) == 0);
  REQUIRE(sh("GRAPHSMITH_OPT_LEVEL=0 " + kCli + " --inject-fault F1 run " + args + (d / "o0.json").string()) == 0);
  CHECK(outputs_from_json(parse_json(slurp(d / "o1.json"))).at(0)[0] == 0.0);
  CHECK(outputs_from_json(parse_json(slurp(d / "o0.json"))).at(0)[0] == 2.0);

  const ExternalBackend runner(kCli + " --inject-fault F1");
  const Verdict v = test_one(b.g, in, {}, runner);
  REQUIRE(v.kind == VerdictKind::kSemantic);
  CHECK(v.report->localization == "optimization");
  CHECK(test_one(b.g, in, {}, ExternalBackend(kCli)).kind == VerdictKind::kPass);
}

TEST_CASE("probe of the built-in pipeline") {
  const fs::path d = scratch("probe");
  REQUIRE(sh(kCli + " --format json probe > " + (d / "probe.json").string(), false) == 0);
  const auto j = parse_json(slurp(d / "probe.json"));
  CHECK(j.at("unsupported").empty());
  CHECK(j.at("supported").size() > 40);
}

TEST_CASE("bad arguments") {
  CHECK(sh(kCli + " fuzz --search-mode nope") != 0);
  CHECK(sh(kCli + " --inject-fault F9 fuzz --models 1") == 2);
  CHECK(sh(kCli) != 0);
}
