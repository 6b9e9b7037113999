// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "graphsmith/graphgen.h"
#include "graphsmith/valuesearch.h"

using namespace graphsmith;

namespace {

const TensorInequality& vuln(const std::string& op, std::size_t i = 0) { return vulnerabilities_of(op).at(i); }

double loss1(const TensorInequality& p, const std::vector<Tensor>& args) {
  std::vector<const Tensor*> ptrs;
  for (const Tensor& t : args) ptrs.push_back(&t);
  return loss_from_inequality(p, ptrs);
}

Tensor vec(std::vector<double> v, DType dtype = DType::kF32) {
  const auto n = static_cast<std::int64_t>(v.size());
  return Tensor(dtype, {n}, std::move(v));
}

Node input(const std::string& id, Shape shape) {
  return Node{.id = id, .op = "Input", .type = {DType::kF32, std::move(shape)}};
}

Node apply(const std::string& id, const std::string& op, std::vector<std::string> ins, Shape shape) {
  Node n{.id = id, .op = op, .type = {DType::kF32, std::move(shape)}};
  for (auto& i : ins) n.inputs.push_back({i, 0});
  return n;
}

Graph chain(const std::string& op, int arity) {
  Graph g;
  std::vector<std::string> ins;
  for (int i = 0; i < arity; ++i) {
    ins.push_back("in" + std::to_string(i));
    g.nodes.push_back(input(ins.back(), {3}));
  }
  g.nodes.push_back(apply("y", op, ins, {3}));
  g.outputs = {{"y", 0}};
  return g;
}

}  // namespace

TEST_CASE("loss conversions") {
  CHECK(loss1(vuln("Asin"), {vec({1.5})}) == doctest::Approx(0.5));
  CHECK(loss1(vuln("Asin"), {vec({0.3})}) == 0.0);
  CHECK(loss1(vuln("Asin"), {vec({-2.0, 0.0, 1.25})}) == doctest::Approx(1.25));
  // Strict form: max(-|y| + eps, 0) at y = 0.
  CHECK(loss1(vuln("Div"), {vec({1.0}), vec({0.0})}) == doctest::Approx(kStrictSlack).epsilon(1e-9));
  CHECK(loss1(vuln("Div"), {vec({1.0}), vec({0.5})}) == 0.0);
  CHECK(loss1(vuln("Sqrt"), {vec({-4.0})}) == doctest::Approx(4.0));
  CHECK(loss1(vuln("Log2"), {vec({0.0})}) > 0.0);
}

TEST_CASE("loss gradients match finite differences") {
  const TensorInequality& p = vuln("Pow", 1);
  Tensor x = vec({3.0, 5.0}, DType::kF64), y = vec({40.0, 30.0}, DType::kF64);
  std::vector<const Tensor*> args{&x, &y};
  std::vector<std::vector<double>> g;
  const double l = loss_from_inequality(p, args, &g);
  REQUIRE(l > 0.0);
  const double h = 1e-6;
  for (int slot = 0; slot < 2; ++slot) {
    for (std::size_t e = 0; e < 2; ++e) {
      Tensor a = x, b = y;
      Tensor& t = slot == 0 ? a : b;
      std::vector<double> d(t.values().begin(), t.values().end());
      d[e] += h;
      t = vec(d, DType::kF64);
      std::vector<const Tensor*> shifted{&a, &b};
      const double fd = (loss_from_inequality(p, shifted) - l) / h;
      CHECK(g[static_cast<std::size_t>(slot)][e] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("loss sign agrees with predicate violation") {
  Rng rng(7);
  for (const char* op : {"Sqrt", "Log2", "Asin", "Div", "Pow", "Mod"}) {
    for (const TensorInequality& p : vulnerabilities_of(op)) {
      for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Tensor> args;
        for (int i = 0; i < 2; ++i) args.push_back(vec({rng.uniform_real(-10, 10), rng.coin(0.1) ? 0.0 : rng.uniform_real(-3, 3)}));
        bool violated = false;
        for (std::size_t e = 0; e < 2; ++e) {
          std::vector<double> v;
          for (int slot : p.operands) v.push_back(args[static_cast<std::size_t>(slot)][static_cast<std::int64_t>(e)]);
          const double f = p.f(v);
          violated = violated || (p.strict ? !(f < 0) : !(f <= 0));
        }
        CHECK((loss1(p, args) > 0) == violated);
      }
    }
  }
}

TEST_CASE("search repairs a square root input") {
  Graph g = chain("Sqrt", 1);
  Rng rng(1);
  SearchOptions o;
  o.max_steps = 200;
  o.budget_ms = 1e9;
  auto r = search_values_from(g, o, rng, {{"in0", vec({-4.0, -1.0, 2.0})}}, {});
  REQUIRE(r.success);
  CHECK(r.steps > 0);
  for (double v : r.inputs.at("in0").values()) CHECK(v >= 0.0);
}

TEST_CASE("search on a graph without vulnerable operators takes no steps") {
  Graph g = chain("Add", 2);
  Rng rng(2);
  auto r = search_values(g, {}, rng);
  CHECK(r.success);
  CHECK(r.steps == 0);
}

TEST_CASE("search satisfies both power predicates") {
  Graph g = chain("Pow", 2);
  Rng rng(3);
  SearchOptions o;
  o.max_steps = 500;
  o.budget_ms = 1e9;
  auto r = search_values_from(g, o, rng, {{"in0", vec({-2.0, -3.0, 4.0})}, {"in1", vec({2.5, 30.5, 100.5})}}, {});
  REQUIRE(r.success);
  const auto& x = r.inputs.at("in0");
  const auto& y = r.inputs.at("in1");
  for (std::int64_t i = 0; i < 3; ++i) {
    CHECK(x[i] > 0.0);
    // Descent stops once the output is finite, so the bound is f32 overflow.
    CHECK(y[i] * std::log(x[i]) <= std::log(3.4028234e38));
  }
}

TEST_CASE("asin needs more than sampling") {
  Graph g = chain("Asin", 1);
  Rng rng(4);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) failures += !sample_baseline(g, rng, 1).success;
  CHECK(failures >= 990);
  CHECK(sample_baseline(chain("Sqrt", 1), rng, 1).success);
  SearchOptions o;
  o.max_steps = 500;
  o.budget_ms = 1e9;
  CHECK(search_values(g, o, rng).success);
}

TEST_CASE("floor chain needs proxy derivatives") {
  // Log2(Floor(x)) with x in [1,9) is already valid; shift it negative.
  Graph g;
  g.nodes.push_back(input("in0", {4}));
  g.nodes.push_back(apply("f", "Floor", {"in0"}, {4}));
  g.nodes.push_back(apply("y", "Log2", {"f"}, {4}));
  g.outputs = {{"y", 0}};
  SearchOptions o;
  o.max_steps = 300;
  o.budget_ms = 1e9;
  TensorMap start{{"in0", Tensor(DType::kF32, {4}, {-3.5, -0.5, -7.2, 0.5})}};
  Rng a(5), b(5);
  auto with_proxy = search_values_from(g, o, a, start, {});
  CHECK(with_proxy.success);
  for (double v : with_proxy.inputs.at("in0").values()) CHECK(std::floor(v) > 0.0);
  o.mode = SearchMode::kGradNoProxy;
  auto plain = search_values_from(g, o, b, start, {});
  // Without proxies the gradient vanishes and only re-initialisation can help.
  if (plain.success) CHECK(plain.steps == 0);
}

TEST_CASE("search results are verified on generated graphs") {
  const Registry& reg = standard_registry();
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Graph g = generate_graph(reg, 10, seed);
    Rng rng(seed);
    SearchOptions o;
    o.max_steps = 200;
    o.budget_ms = 1e9;
    auto r = search_values(g, o, rng);
    if (!r.success) continue;
    ++ok;
    CHECK(numerically_valid(g, r.inputs, r.weights));
  }
  CHECK(ok > 20);
}

TEST_CASE("search mode names round trip") {
  for (auto m : {SearchMode::kGrad, SearchMode::kGradNoProxy, SearchMode::kSample}) {
    CHECK(parse_search_mode(search_mode_name(m)) == m);
  }
  CHECK_FALSE(parse_search_mode("adam").has_value());
}
