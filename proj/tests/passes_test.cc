// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "graph_builder.h"
#include "graphsmith/graphgen.h"
#include "graphsmith/interpreter.h"
#include "graphsmith/passes.h"
#include "graphsmith/valuesearch.h"

using namespace graphsmith;
using graphsmith::testing::Builder;
using graphsmith::testing::f32;

namespace {

Tensor out0(const Graph& g, const TensorMap& inputs, const TensorMap& weights = {}) {
  return execute(g, inputs, weights).outputs(g).at(0);
}

// mod(floor(mod(x, y) / i) * i, z)
Builder mod_chain() {
  Builder b;
  auto x = b.input("x", DType::kF32, {});
  auto y = b.input("y", DType::kF32, {});
  auto i = b.input("i", DType::kF32, {});
  auto z = b.input("z", DType::kF32, {});
  auto m = b.op("m", "Mod", {x, y});
  auto d = b.op("d", "Div", {m, i});
  auto f = b.op("f", "Floor", {d});
  auto p = b.op("p", "Mul", {f, i});
  b.output(b.op("r", "Mod", {p, z}));
  return b;
}

const TensorMap kModInputs{{"x", f32({8})}, {"y", f32({5})}, {"i", f32({2})}, {"z", f32({3})}};

}  // namespace

TEST_CASE("fault registry") {
  const auto& reg = standard_faults();
  CHECK(reg.all().size() == 3);
  REQUIRE(reg.find("F2"));
  CHECK(reg.find("F2")->pass == "AlgebraicSimplify");
  FaultRegistry r;
  r.register_fault({"X", "p", ""});
  CHECK_THROWS_AS(r.register_fault({"X", "q", ""}), DuplicateFaultId);
  CHECK(parse_faults("F1,F3") == FaultSet{"F1", "F3"});
  CHECK(parse_faults("").empty());
  CHECK_THROWS_AS(parse_faults("F9"), UnknownFault);
}

TEST_CASE("constant folding") {
  Builder b;
  auto two = b.constant("a", Tensor::scalar(DType::kF32, 2));
  auto three = b.constant("b", Tensor::scalar(DType::kF32, 3));
  b.output(b.op("s", "Add", {two, three}));
  Graph o = optimize(b.g, OptLevel::kO1);
  const Node* s = o.find("s");
  REQUIRE(s);
  CHECK(s->op == "Constant");
  CHECK((*s->value)[0] == 5.0);
  CHECK(o.nodes.size() == 1);
}

TEST_CASE("O0 is the identity") {
  Graph g = mod_chain().g;
  CHECK(optimize(g, OptLevel::kO0, {"F1", "F2", "F3"}).structurally_equal(g));
}

TEST_CASE("F1 reorders floor(a / b) * c") {
  Graph g = mod_chain().g;
  CHECK(out0(g, kModInputs)[0] == 2.0);
  CHECK(out0(optimize(g, OptLevel::kO1), kModInputs)[0] == 2.0);
  Graph bad = optimize(g, OptLevel::kO1, {"F1"});
  CHECK(out0(bad, kModInputs)[0] == 0.0);
  CHECK(bad.find("p")->op == "Floor");
}

TEST_CASE("F1 leaves graphs without the pattern alone") {
  Builder b;
  auto x = b.input("x", DType::kF32, {3});
  auto y = b.input("y", DType::kF32, {3});
  auto d = b.op("d", "Div", {x, y});
  auto f = b.op("f", "Floor", {d});
  b.output(b.op("p", "Add", {f, x}));
  CHECK(optimize(b.g, OptLevel::kO1, {"F1"}).structurally_equal(optimize(b.g, OptLevel::kO1)));
}

TEST_CASE("scale hoisting out of MatMul") {
  Builder b;
  auto sa = b.input("sa", DType::kF32, {});
  auto a = b.input("a", DType::kF32, {3, 1});
  auto sb = b.input("sb", DType::kF32, {});
  auto bm = b.input("b", DType::kF32, {1, 1});
  auto l = b.op("l", "Mul", {sa, a});
  auto r = b.op("r", "Mul", {sb, bm});
  b.output(b.op("mm", "MatMul", {l, r}));
  const TensorMap in{{"sa", Tensor::scalar(DType::kF32, 2)},
                     {"a", f32({1, 2, 3}, {3, 1})},
                     {"sb", Tensor::scalar(DType::kF32, -1)},
                     {"b", f32({4}, {1, 1})}};

  PipelineStats stats;
  Graph ok = optimize(b.g, OptLevel::kO1, {}, &stats);
  CHECK(ok.find("mm")->op == "Mul");
  CHECK(out0(ok, in).identical(out0(b.g, in)));

  try {
    optimize(b.g, OptLevel::kO1, {"F2"});
    FAIL("expected a pass crash");
  } catch (const PassCrash& e) {
    CHECK(e.pass() == "AlgebraicSimplify");
    CHECK(std::string(e.what()).find("matmul-scalar-operand") != std::string::npos);
  }
}

TEST_CASE("elementwise fusion and F3") {
  Builder b;
  auto x = b.input("x", DType::kF32, {4});
  auto c1 = b.op("c1", "Cast", {x}, {{"to", static_cast<std::int64_t>(DType::kI32)}});
  auto ab = b.op("ab", "Abs", {c1});
  auto c2 = b.op("c2", "Cast", {ab}, {{"to", static_cast<std::int64_t>(DType::kF32)}});
  auto t = b.op("t", "Tanh", {c2});
  b.output(b.op("s", "Sigmoid", {t}));
  const TensorMap in{{"x", f32({2.7, -1.2, 0.4, 3.0})}};

  Graph ok = optimize(b.g, OptLevel::kO1);
  const Node* s = ok.find("s");
  REQUIRE(s);
  CHECK(s->op == "Fused");
  CHECK(s->fused.size() == 2);  // Tanh, Sigmoid; the casts stay separate
  CHECK(out0(ok, in).identical(out0(b.g, in)));

  Graph bad = optimize(b.g, OptLevel::kO1, {"F3"});
  CHECK(bad.find("c1") == nullptr);
  const Tensor want = out0(b.g, in), got = out0(bad, in);
  CHECK(got[0] != want[0]);
  CHECK(got[3] == want[3]);
}

TEST_CASE("F3 crash when the head dtype cannot run the chain") {
  Builder b;
  auto x = b.input("x", DType::kI32, {4});
  auto c = b.op("c", "Cast", {x}, {{"to", static_cast<std::int64_t>(DType::kF32)}});
  b.output(b.op("s", "Sigmoid", {c}));
  CHECK_NOTHROW(optimize(b.g, OptLevel::kO1));
  CHECK_THROWS_AS(optimize(b.g, OptLevel::kO1, {"F3"}), PassCrash);
}

TEST_CASE("algebraic identities") {
  Builder b;
  auto x = b.input("x", DType::kF32, {2});
  auto one = b.constant("one", f32({1, 1}));
  auto zero = b.constant("zero", Tensor::scalar(DType::kF32, 0));
  auto m = b.op("m", "Mul", {one, x});
  auto a = b.op("a", "Add", {m, zero});
  auto n1 = b.op("n1", "Neg", {a});
  b.output(b.op("n2", "Neg", {n1}));
  Graph o = optimize(b.g, OptLevel::kO1);
  REQUIRE(o.outputs.size() == 1);
  CHECK(o.outputs[0].node == "x");
  CHECK(o.nodes.size() == 1);
}

TEST_CASE("pipeline is sound on generated graphs") {
  const Registry& reg = standard_registry();
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Graph g = generate_graph(reg, 10, seed);
    PipelineStats stats;
    Graph o = optimize(g, OptLevel::kO1, {}, &stats);
    CHECK(stats.rounds <= kMaxPipelineRounds);
    CHECK_NOTHROW(check_types(o));
    Rng rng(seed);
    SearchOptions so;
    so.max_steps = 100;
    so.budget_ms = 1e9;
    auto found = search_values(g, so, rng);
    if (!found.success) continue;
    ++compared;
    auto ref = execute(g, found.inputs, found.weights).outputs(g);
    auto got = execute(o, found.inputs, found.weights).outputs(o);
    REQUIRE(ref.size() == got.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      REQUIRE(ref[i].shape() == got[i].shape());
      for (std::int64_t e = 0; e < ref[i].size(); ++e) {
        const double a = ref[i][e], c = got[i][e];
        CHECK(std::abs(a - c) <= 1e-3 + 1e-2 * std::max(std::abs(a), std::abs(c)));
      }
    }
  }
  CHECK(compared > 100);
}
