// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/difftest.h"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>
#include <thread>

#include "graphsmith/kernels.h"
#include "graphsmith/rng.h"
#include "graphsmith/serialize.h"
#include "graphsmith/valuesearch.h"

extern char** environ;

namespace graphsmith {

namespace fs = std::filesystem;
using nlohmann::json;

bool allclose(const Tensor& a, const Tensor& b, const ComparisonPolicy& policy) {
  if (a.dtype() != b.dtype() || a.shape() != b.shape()) {
    throw ShapeMismatch("allclose: " + std::string(dtype_name(a.dtype())) + shape_to_string(a.shape()) + " vs " +
                        std::string(dtype_name(b.dtype())) + shape_to_string(b.shape()));
  }
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    if (std::isnan(x) || std::isnan(y)) {
      if (policy.equal_nan && std::isnan(x) && std::isnan(y)) continue;
      return false;
    }
    if (x == y) continue;  // covers equal infinities
    if (!(std::abs(x - y) <= policy.atol + policy.rtol * std::max(std::abs(x), std::abs(y)))) return false;
  }
  return true;
}

double max_relative_error(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  const std::int64_t n = std::min(a.size(), b.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = a[i], y = b[i];
    if (x == y) continue;
    const double denom = std::max(std::abs(x), std::abs(y));
    const double e = std::abs(x - y) / denom;
    if (std::isnan(e)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, e);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Backends

std::string PipelineBackend::id() const {
  std::string s = "pipeline";
  for (const std::string& f : faults_) s += (s.size() == 8 ? "+" : ",") + f;
  return s;
}

BackendRun PipelineBackend::run(const Graph& g, const TensorMap& inputs, const TensorMap& weights,
                                OptLevel level) const {
  Graph opt;
  try {
    opt = optimize(g, level, faults_);
  } catch (const PassCrash& e) {
    throw BackendCrash(e.what());
  }
  BackendRun out;
  try {
    ExecResult r = execute(opt, inputs, weights);
    out.outputs = r.outputs(opt);
    out.node_values = std::move(r.values);
  } catch (const std::exception& e) {
    throw BackendCrash(std::string("execute: ") + e.what());
  }
  for (const Node& n : opt.nodes) out.node_ops[n.id] = n.op;
  return out;
}

json run_request_to_json(const TensorMap& inputs, const TensorMap& weights) {
  return json{{"inputs", tensors_to_json(inputs)}, {"weights", tensors_to_json(weights)}};
}

json outputs_to_json(const std::vector<Tensor>& outputs) {
  json arr = json::array();
  for (const Tensor& t : outputs) arr.push_back(tensor_to_json(t));
  return json{{"outputs", arr}};
}

std::vector<Tensor> outputs_from_json(const json& j) {
  std::vector<Tensor> out;
  for (const json& t : j.at("outputs")) out.push_back(tensor_from_json(t));
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string last_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
  }
  return last;
}

// Removes the directory on scope exit.
struct ScratchDir {
  fs::path path;
  ScratchDir() {
    static std::atomic<std::uint64_t> counter{0};
    const std::uint64_t tag = splitmix64(static_cast<std::uint64_t>(::getpid()) * 0x9E3779B97F4A7C15ULL + counter++);
    path = fs::temp_directory_path() / ("graphsmith-run-" + std::to_string(::getpid()) + "-" + std::to_string(tag));
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

BackendRun ExternalBackend::run(const Graph& g, const TensorMap& inputs, const TensorMap& weights,
                                OptLevel level) const {
  ScratchDir dir;
  const fs::path graph_path = dir.path / "graph.json";
  const fs::path inputs_path = dir.path / "inputs.json";
  const fs::path outputs_path = dir.path / "outputs.json";
  const fs::path stderr_path = dir.path / "stderr.txt";
  write_file(graph_path, serialize_graph(g));
  write_file(inputs_path, run_request_to_json(inputs, weights).dump());

  const std::string script = command_ + " run \"$1\" \"$2\" \"$3\"";
  const std::string gp = graph_path.string(), ip = inputs_path.string(), op = outputs_path.string();
  std::vector<char*> argv = {const_cast<char*>("/bin/sh"), const_cast<char*>("-c"), const_cast<char*>(script.c_str()),
                             const_cast<char*>("sh"),      const_cast<char*>(gp.c_str()), const_cast<char*>(ip.c_str()),
                             const_cast<char*>(op.c_str()), nullptr};
  std::vector<std::string> env_store;
  for (char** e = environ; e && *e; ++e) {
    if (std::string_view(*e).starts_with("GRAPHSMITH_OPT_LEVEL=")) continue;
    env_store.emplace_back(*e);
  }
  env_store.push_back("GRAPHSMITH_OPT_LEVEL=" + std::to_string(static_cast<int>(level)));
  std::vector<char*> envp;
  for (std::string& s : env_store) envp.push_back(s.data());
  envp.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw BackendUnreachable("cannot spawn /bin/sh: " + std::string(std::strerror(rc)));

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  int status = 0;
  bool timed_out = false;
  for (auto wait = std::chrono::microseconds(200);; wait = std::min(wait * 2, std::chrono::microseconds(20000))) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw BackendUnreachable("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(wait);
  }
  if (timed_out) throw BackendCrash("timeout after " + std::to_string(timeout_.count()) + " ms");
  const std::string err = read_file(stderr_path);
  if (WIFSIGNALED(status)) {
    throw BackendCrash("killed by signal " + std::to_string(WTERMSIG(status)) +
                       (err.empty() ? "" : ": " + last_line(err)));
  }
  const int code = WEXITSTATUS(status);
  if (code == 126 || code == 127) throw BackendUnreachable("runner not executable: " + last_line(err));
  if (code != 0) {
    const std::string line = last_line(err);
    throw BackendCrash(line.empty() ? "exit status " + std::to_string(code) : line);
  }
  BackendRun out;
  try {
    out.outputs = outputs_from_json(parse_json(read_file(outputs_path)));
  } catch (const std::exception& e) {
    throw BackendCrash(std::string("malformed outputs.json: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string_view verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::kPass: return "pass";
    case VerdictKind::kCrash: return "crash";
    case VerdictKind::kSemantic: return "semantic";
    case VerdictKind::kSkippedNumeric: return "skipped_numeric";
  }
  return "?";
}

std::optional<VerdictKind> parse_verdict(std::string_view s) {
  for (VerdictKind k : {VerdictKind::kPass, VerdictKind::kCrash, VerdictKind::kSemantic, VerdictKind::kSkippedNumeric}) {
    if (verdict_name(k) == s) return k;
  }
  return std::nullopt;
}

json report_to_json(const BugReport& r) {
  json j;
  j["version"] = kFormatVersion;
  j["kind"] = verdict_name(r.kind);
  j["graph"] = graph_to_json(r.graph);
  j["inputs"] = tensors_to_json(r.inputs);
  j["weights"] = tensors_to_json(r.weights);
  j["backend"] = r.backend;
  j["faults"] = std::vector<std::string>(r.faults.begin(), r.faults.end());
  j["localization"] = r.localization;
  j["signature"] = r.signature;
  j["first_mismatch"] = r.first_mismatch;
  j["max_rel_error"] = std::isfinite(r.max_rel_error) ? json(r.max_rel_error) : json(nullptr);
  j["dedup_key"] = r.dedup_key;
  j["config"] = r.config.is_null() ? json::object() : r.config;
  return j;
}

BugReport report_from_json(const json& j) {
  try {
    BugReport r;
    const auto kind = parse_verdict(j.at("kind").get<std::string>());
    if (!kind || (*kind != VerdictKind::kCrash && *kind != VerdictKind::kSemantic)) {
      throw ParseError("bad report kind", 0, 0);
    }
    r.kind = *kind;
    r.graph = graph_from_json(j.at("graph"));
    r.inputs = tensors_from_json(j.at("inputs"));
    r.weights = tensors_from_json(j.at("weights"));
    r.backend = j.at("backend").get<std::string>();
    for (const json& f : j.at("faults")) r.faults.insert(f.get<std::string>());
    r.localization = j.at("localization").get<std::string>();
    r.signature = j.at("signature").get<std::string>();
    r.first_mismatch = j.at("first_mismatch").get<std::string>();
    const json& e = j.at("max_rel_error");
    r.max_rel_error = e.is_null() ? std::numeric_limits<double>::infinity() : e.get<double>();
    r.dedup_key = j.at("dedup_key").get<std::string>();
    r.config = j.value("config", json::object());
    return r;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), 0, 0);
  }
}

std::string normalize_signature(std::string_view text, const Graph* graph) {
  std::string s(text);
  static const std::regex kAddr(R"(0x[0-9a-fA-F]+)");
  static const std::regex kPath(R"((?:\.{0,2}/)?(?:[\w.-]+/)+[\w.-]+)");
  static const std::regex kLong(R"(\d{5,}(?:\.\d+)?)");
  s = std::regex_replace(s, kAddr, "<addr>");
  s = std::regex_replace(s, kPath, "<path>");
  s = std::regex_replace(s, kLong, "<num>");
  if (graph) {
    // Longest ids first so "n1" does not eat the prefix of "n12".
    std::vector<std::string> ids;
    for (const Node& n : graph->nodes) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    for (const std::string& id : ids) {
      const std::regex word("(^|[^\\w.])" + std::regex_replace(id, std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)") +
                            "(?![\\w])");
      s = std::regex_replace(s, word, "$1<node>");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// False-alarm filter

namespace {

bool is_saturating(const std::string& op) { return op == "Sigmoid" || op == "Tanh"; }

bool is_discretizing(const std::string& op) {
  return op == "Floor" || op == "Ceil" || op == "Equal" || op == "ArgMax";
}

constexpr double kSaturationThreshold = 8.0;

std::set<std::string> ancestors_of(const Graph& g, const std::string& id) {
  std::set<std::string> seen;
  std::vector<std::string> stack = {id};
  while (!stack.empty()) {
    const std::string cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    if (const Node* n = g.find(cur)) {
      for (const NodeRef& r : n->inputs) stack.push_back(r.node);
    }
  }
  return seen;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

// True when some ArgMax slice has two entries within tolerance of its max.
bool argmax_near_tie(const Tensor& x, const Attrs& attrs, const ComparisonPolicy& policy) {
  if (x.rank() == 0) return false;
  const auto a = attrs.find("axis");
  std::int64_t axis = a == attrs.end() ? 0 : a->second;
  if (axis < 0) axis += x.rank();
  const Shape& sh = x.shape();
  std::int64_t outer = 1, inner = 1;
  for (std::int64_t i = 0; i < axis; ++i) outer *= sh[static_cast<std::size_t>(i)];
  for (std::int64_t i = axis + 1; i < x.rank(); ++i) inner *= sh[static_cast<std::size_t>(i)];
  const std::int64_t len = sh[static_cast<std::size_t>(axis)];
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t in = 0; in < inner; ++in) {
      double best = -std::numeric_limits<double>::infinity(), second = best;
      for (std::int64_t k = 0; k < len; ++k) {
        const double v = x[(o * len + k) * inner + in];
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
      if (len > 1 && best - second <= policy.atol + policy.rtol * std::max(std::abs(best), std::abs(second))) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

std::optional<std::string> filter_false_alarm(const Graph& g, const std::map<std::string, Tensor>& reference,
                                              const std::string& site, const ComparisonPolicy& policy) {
  for (const std::string& d : ancestors_of(g, site)) {
    const Node* dn = g.find(d);
    if (!dn || !is_discretizing(dn->op)) continue;
    if (dn->op == "ArgMax") {
      const auto it = reference.find(dn->inputs.at(0).node);
      if (it != reference.end() && argmax_near_tie(it->second, dn->attrs, policy)) {
        return "near tie at ArgMax " + dn->id;
      }
    }
    for (const std::string& s : ancestors_of(g, d)) {
      const Node* sn = g.find(s);
      if (!sn || !is_saturating(sn->op)) continue;
      const auto it = reference.find(sn->inputs.at(0).node);
      if (it != reference.end() && max_abs(it->second) > kSaturationThreshold) {
        return "saturated " + sn->op + " " + sn->id + " feeds " + dn->op + " " + dn->id;
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// test_one

namespace {

bool any_nonfinite(const std::vector<Tensor>& ts) {
  return std::any_of(ts.begin(), ts.end(), [](const Tensor& t) { return t.has_nonfinite(); });
}

// Index of the first output that differs, with a description when the
// outputs are not even comparable.
std::optional<std::size_t> first_bad_output(const std::vector<Tensor>& ref, const std::vector<Tensor>& got,
                                            const ComparisonPolicy& policy, std::string* why) {
  if (ref.size() != got.size()) {
    *why = "output count " + std::to_string(got.size()) + " vs " + std::to_string(ref.size());
    return 0;
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    try {
      if (!allclose(ref[i], got[i], policy)) return i;
    } catch (const ShapeMismatch&) {
      *why = "output type " + std::string(dtype_name(got[i].dtype())) + shape_to_string(got[i].shape()) + " vs " +
             std::string(dtype_name(ref[i].dtype())) + shape_to_string(ref[i].shape());
      return i;
    }
  }
  return std::nullopt;
}

bool agrees(const std::vector<Tensor>& ref, const std::vector<Tensor>& got, const ComparisonPolicy& policy) {
  std::string why;
  return !first_bad_output(ref, got, policy, &why).has_value();
}

BugReport base_report(VerdictKind kind, const Graph& g, const TensorMap& inputs, const TensorMap& weights,
                      const Backend& backend) {
  BugReport r;
  r.kind = kind;
  r.graph = g;
  r.inputs = inputs;
  r.weights = weights;
  r.backend = backend.id();
  if (const auto* p = dynamic_cast<const PipelineBackend*>(&backend)) r.faults = p->faults();
  return r;
}

}  // namespace

Verdict test_one(const Graph& g, const TensorMap& inputs, const TensorMap& weights, const Backend& backend,
                 const ComparisonPolicy& policy, OptLevel level) {
  Verdict v;
  BackendRun got;
  try {
    got = backend.run(g, inputs, weights, level);
  } catch (const BackendCrash& e) {
    BugReport r = base_report(VerdictKind::kCrash, g, inputs, weights, backend);
    r.signature = e.what();
    r.localization = "backend";
    if (level != OptLevel::kO0) {
      try {
        backend.run(g, inputs, weights, OptLevel::kO0);
        r.localization = "optimization";
      } catch (const BackendCrash&) {
      }
    }
    r.dedup_key = "crash|" + r.localization + "|" + normalize_signature(r.signature, &g);
    v.kind = VerdictKind::kCrash;
    v.report = std::move(r);
    return v;
  }
  const ExecResult ref_run = execute(g, inputs, weights);
  if (first_nonfinite(g, ref_run) || any_nonfinite(got.outputs)) {
    v.kind = VerdictKind::kSkippedNumeric;
    return v;
  }
  const std::vector<Tensor> ref = ref_run.outputs(g);
  std::string why;
  const auto bad = first_bad_output(ref, got.outputs, policy, &why);
  if (!bad) return v;

  BugReport r = base_report(VerdictKind::kSemantic, g, inputs, weights, backend);
  r.localization = "backend";
  if (level != OptLevel::kO0) {
    try {
      const BackendRun o0 = backend.run(g, inputs, weights, OptLevel::kO0);
      if (!any_nonfinite(o0.outputs) && agrees(ref, o0.outputs, policy)) r.localization = "optimization";
    } catch (const BackendCrash&) {
    }
  }

  // Site: first node (reference order) whose value the backend reproduces
  // incorrectly; falls back to the mismatching output.
  std::string site = g.outputs.at(*bad).node;
  for (const Node& n : g.nodes) {
    const auto it = got.node_values.find(n.id);
    if (it == got.node_values.end() || it->second.has_nonfinite()) continue;
    const Tensor& want = ref_run.values.at(n.id);
    if (want.dtype() != it->second.dtype() || want.shape() != it->second.shape()) continue;
    if (!allclose(want, it->second, policy)) {
      site = n.id;
      break;
    }
  }
  const Node& site_node = *g.find(site);
  std::string shape;
  if (const auto it = got.node_ops.find(site); it != got.node_ops.end() && it->second != site_node.op) {
    shape = site_node.op + " rewritten as " + it->second;
  } else {
    shape = site_node.op;
  }
  r.first_mismatch = site;
  if (!why.empty()) {
    r.max_rel_error = std::numeric_limits<double>::infinity();
    r.signature = "mismatch: " + why;
    r.dedup_key = "semantic|" + r.localization + "|" + normalize_signature(why, &g);
  } else {
    r.max_rel_error = max_relative_error(ref[*bad], got.outputs[*bad]);
    std::ostringstream sig;
    sig << "first mismatch at " << site << " (" << shape << "); max relative error " << r.max_rel_error;
    r.signature = sig.str();
    r.dedup_key = "semantic|" + r.localization + "|" + normalize_signature(shape, &g);
  }

  if (auto reason = filter_false_alarm(g, ref_run.values, site, policy)) {
    v.kind = VerdictKind::kPass;
    v.suppressed = true;
    v.suppression_reason = std::move(*reason);
    v.report = std::move(r);
    return v;
  }
  v.kind = VerdictKind::kSemantic;
  v.report = std::move(r);
  return v;
}

// ---------------------------------------------------------------------------
// Probing

ProbeResult probe_backend_ops(const Backend& backend, const Registry& registry, std::uint64_t seed) {
  static std::mutex cache_mu;
  static std::map<std::string, ProbeResult> cache;
  const std::string key = backend.id() + "@" + backend.version();
  {
    std::lock_guard lock(cache_mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  ProbeResult res;
  Rng rng(seed);
  for (const OpSpec* spec : registry.generatable()) {
    std::map<DType, std::vector<std::size_t>> rows;
    for (std::size_t r = 0; r < spec->menu.size(); ++r) rows[row_dtype(spec->menu[r])].push_back(r);
    for (const auto& [dt, candidates] : rows) {
      std::optional<Graph> g;
      for (std::size_t r : candidates) {
        g = single_op_graph(*spec, r, rng.next());
        if (g) break;
      }
      if (!g) continue;
      TensorMap inputs, weights;
      random_leaves(*g, 1, 9, rng, inputs, weights);
      try {
        backend.run(*g, inputs, weights, OptLevel::kO1);
        res.supported.insert({spec->name, dt});
      } catch (const BackendCrash&) {
        res.unsupported.insert({spec->name, dt});
      }
    }
  }
  std::lock_guard lock(cache_mu);
  cache.emplace(key, res);
  return res;
}

bool ReportSink::add(const BugReport& r) {
  std::lock_guard lock(mu_);
  return keys_.insert(r.dedup_key).second;
}

std::size_t ReportSink::size() const {
  std::lock_guard lock(mu_);
  return keys_.size();
}

std::vector<std::string> ReportSink::keys() const {
  std::lock_guard lock(mu_);
  return {keys_.begin(), keys_.end()};
}

}  // namespace graphsmith
