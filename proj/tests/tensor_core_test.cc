// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "doctest.h"
#include "graphsmith/interpreter.h"
#include "graphsmith/rng.h"

using namespace graphsmith;

namespace {

Node leaf(const std::string& id, const std::string& op, TensorType t) {
  Node n;
  n.id = id;
  n.op = op;
  n.type = std::move(t);
  return n;
}

Node apply(const std::string& id, const std::string& op, std::vector<std::string> ins, TensorType t,
           Attrs attrs = {}) {
  Node n;
  n.id = id;
  n.op = op;
  n.attrs = std::move(attrs);
  for (auto& s : ins) n.inputs.push_back({s, 0});
  n.type = std::move(t);
  return n;
}

double scalar_grad(const std::string& op, double x) {
  Tape tape;
  int in = tape.add_leaf("x", Tensor::scalar(DType::kF64, x));
  int out = tape.apply(op, {}, {in});
  return tape.backward(out).at("x")[0];
}

}  // namespace

TEST_CASE("integer casts keep sign and wrap out of range") {
  CHECK(cast_value(-6, DType::kI32) == -6);
  CHECK(cast_value(-6.7, DType::kI64) == -6);
  CHECK(cast_value(2147483648.0, DType::kI32) == -2147483648.0);
  CHECK(cast_value(-2147483649.0, DType::kI32) == 2147483647.0);
  CHECK(cast_value(std::ldexp(1.0, 64) + 4096, DType::kI64) == 4096);
  CHECK(cast_value(-std::ldexp(1.0, 64) - 4096, DType::kI64) == -4096);
  CHECK(cast_value(std::ldexp(1.0, 63), DType::kI64) == -std::ldexp(1.0, 63));
  Tensor x(DType::kI32, {3}, {1, -2, 3});
  const Tensor* in[] = {&x};
  const Tensor y = kernel("Neg").compute(in, {});
  CHECK(y[0] == -1);
  CHECK(y[1] == 2);
  CHECK(y[2] == -3);
}

TEST_CASE("elementwise add") {
  Graph g;
  g.nodes.push_back(leaf("a", "Input", {DType::kF32, {1, 2}}));
  g.nodes.push_back(leaf("b", "Input", {DType::kF32, {1, 2}}));
  g.nodes.push_back(apply("c", "Add", {"a", "b"}, {DType::kF32, {1, 2}}));
  g.outputs = {{"c", 0}};
  auto r = execute(g, {{"a", Tensor(DType::kF32, {1, 2}, {1, 2})}, {"b", Tensor(DType::kF32, {1, 2}, {3, 4})}}, {});
  auto out = r.outputs(g)[0];
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 6.0);
}

TEST_CASE("pooling output geometry") {
  Graph g;
  g.nodes.push_back(leaf("x", "Input", {DType::kF32, {1, 3, 32, 32}}));
  g.nodes.push_back(apply("p", "MaxPool2d", {"x"}, {DType::kF32, {1, 3, 16, 16}},
                          {{"kh", 2}, {"kw", 2}, {"stride", 2}, {"pad", 0}}));
  g.outputs = {{"p", 0}};
  auto r = execute(g, {{"x", Tensor::filled(DType::kF32, {1, 3, 32, 32}, 1.0)}}, {});
  CHECK(r.values.at("p").shape() == Shape{1, 3, 16, 16});
}

TEST_CASE("division by zero propagates infinity") {
  Graph g;
  g.nodes.push_back(leaf("x", "Input", {DType::kF32, {1}}));
  g.nodes.push_back(leaf("y", "Input", {DType::kF32, {1}}));
  g.nodes.push_back(apply("d", "Div", {"x", "y"}, {DType::kF32, {1}}));
  g.outputs = {{"d", 0}};
  auto r = execute(g, {{"x", Tensor(DType::kF32, {1}, {1.0})}, {"y", Tensor(DType::kF32, {1}, {0.0})}}, {});
  CHECK(std::isinf(r.values.at("d")[0]));
  CHECK(first_nonfinite(g, r) == std::optional<std::string>("d"));
}

TEST_CASE("declared type mismatch is reported") {
  Graph g;
  g.nodes.push_back(leaf("x", "Input", {DType::kF32, {2}}));
  g.nodes.push_back(apply("r", "ReLU", {"x"}, {DType::kF32, {3}}));
  g.outputs = {{"r", 0}};
  CHECK_THROWS_AS(execute(g, {{"x", Tensor(DType::kF32, {2})}}, {}), ShapeMismatch);
  CHECK_THROWS_AS(kernel("NoSuchOp"), UnknownOp);
}

TEST_CASE("derivatives and proxies") {
  CHECK(scalar_grad("Sigmoid", 0.0) == doctest::Approx(0.25));
  CHECK(scalar_grad("ReLU", -1.0) == doctest::Approx(kProxyAlpha));
  CHECK(scalar_grad("ReLU", 2.0) == doctest::Approx(1.0));
  CHECK(scalar_grad("Floor", 3.0) == doctest::Approx(kProxyAlpha));
  CHECK(scalar_grad("Abs", 0.0) == doctest::Approx(-1.0));

  Tape tape;
  int x = tape.add_leaf("x", Tensor::scalar(DType::kF64, 3.0));
  int y = tape.add_leaf("y", Tensor::scalar(DType::kF64, 5.0));
  int p = tape.apply("Mul", {}, {x, y});
  auto grads = tape.backward(p);
  CHECK(grads.at("x")[0] == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(grads.at("y")[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(tape.replay_matches());

  ProxyCounter without;
  Tape t2;
  int a = t2.add_leaf("a", Tensor::scalar(DType::kF64, -1.0));
  int r = t2.apply("ReLU", {}, {a});
  CHECK(t2.backward(r, false, &without).at("a")[0] == 0.0);
  CHECK(without.fired == 0);
}

TEST_CASE("proxy specs are small and trend-aligned") {
  for (const auto& p : proxy_specs()) {
    CHECK(std::fabs(p.alpha) <= 0.1);
    CHECK(p.alpha > 0);
  }
}

TEST_CASE("backward preconditions") {
  Tape tape;
  int x = tape.add_leaf("x", Tensor(DType::kF64, {2}, {1, 2}));
  int r = tape.apply("ReLU", {}, {x});
  CHECK_THROWS_AS(tape.backward(r), NonScalarLoss);
  int c = tape.add_constant(Tensor::scalar(DType::kF64, 1.0));
  CHECK_THROWS_AS(tape.backward(c), DetachedLoss);
}

TEST_CASE("finite difference agreement") {
  CHECK(check_gradient("Tanh", {}, {Tensor::scalar(DType::kF64, 0.5)}, 1e-4) < 1e-4);
  CHECK(check_gradient("Add", {}, {Tensor(DType::kF64, {3}, {1, -2, 0.5}), Tensor(DType::kF64, {3}, {4, 5, 6})},
                       1e-4) < 1e-7);
  CHECK(check_gradient("Pow", {}, {Tensor::scalar(DType::kF64, 2.0), Tensor::scalar(DType::kF64, 3.0)}, 1e-4) <
        1e-4);
  CHECK_THROWS_AS(check_gradient("ReLU", {}, {Tensor::scalar(DType::kF64, -1.0)}, 1e-4), RegionExcluded);
}

TEST_CASE("execution is deterministic") {
  Graph g;
  g.nodes.push_back(leaf("x", "Input", {DType::kF32, {4, 4}}));
  g.nodes.push_back(leaf("w", "Input", {DType::kF32, {4, 4}}));
  g.nodes.push_back(apply("m", "MatMul", {"x", "w"}, {DType::kF32, {4, 4}}));
  g.nodes.push_back(apply("s", "Softmax", {"m"}, {DType::kF32, {4, 4}}, {{"axis", 1}}));
  g.outputs = {{"s", 0}};
  Rng rng(7);
  std::vector<double> xs(16), ws(16);
  for (auto& v : xs) v = rng.uniform_real(-1, 1);
  for (auto& v : ws) v = rng.uniform_real(-1, 1);
  TensorMap in{{"x", Tensor(DType::kF32, {4, 4}, xs)}, {"w", Tensor(DType::kF32, {4, 4}, ws)}};
  auto a = execute(g, in, {}, {.record = true});
  auto b = execute(g, in, {});
  CHECK(a.values.at("s").identical(b.values.at("s")));
  CHECK(a.tape->replay_matches());
}

TEST_CASE("byte encoding round trip") {
  Tensor t(DType::kI32, {2, 2}, {1, -2, 3, 2147483647});
  auto back = Tensor::from_bytes(DType::kI32, {2, 2}, t.to_bytes());
  CHECK(back.identical(t));
  Tensor f(DType::kF32, {3}, {1.5, -0.0, std::numeric_limits<double>::infinity()});
  CHECK(Tensor::from_bytes(DType::kF32, {3}, f.to_bytes()).identical(f));
}
