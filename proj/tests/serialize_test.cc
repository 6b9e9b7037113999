// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>

#include "doctest.h"
#include "graph_builder.h"
#include "graphsmith/graphgen.h"
#include "graphsmith/passes.h"
#include "graphsmith/serialize.h"

using namespace graphsmith;
using graphsmith::testing::Builder;

TEST_CASE("base64 round trip") {
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(base64_encode("foo") == "Zm9v");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
  Rng rng(3);
  for (int n = 0; n < 64; ++n) {
    std::string s;
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(rng.uniform_int(0, 255)));
    CHECK(base64_decode(base64_encode(s)) == s);
  }
  CHECK_THROWS_AS(base64_decode("Zm9"), std::invalid_argument);
}

TEST_CASE("one-node graph round trips byte for byte") {
  Builder b;
  b.output(b.input("x", DType::kF32, {2, 3}));
  const std::string text = serialize_graph(b.g);
  CHECK(text ==
        R"({"graph_inputs":[{"dtype":"f32","name":"x","shape":[2,3]}],"graph_outputs":[["x",0]],)"
        R"("nodes":[{"attrs":{},"id":"x","inputs":[],"op":"Input"}],"version":1,"weights":[]})");
  CHECK(serialize_graph(parse_graph(text)) == text);
  CHECK(parse_graph(text).structurally_equal(b.g));
}

TEST_CASE("f64 weights are raw little-endian bytes") {
  Builder b;
  b.output(b.weight("w", Tensor(DType::kF64, {2}, {1.5, -2.0})));
  const auto j = nlohmann::json::parse(serialize_graph(b.g));
  const std::string bytes = base64_decode(j["weights"][0]["data_b64"].get<std::string>());
  REQUIRE(bytes.size() == 16);
  double v[2];
  std::memcpy(v, bytes.data(), 16);
  CHECK(v[0] == 1.5);
  CHECK(v[1] == -2.0);
}

TEST_CASE("parse errors carry positions and names") {
  try {
    parse_graph("{\n  \"version\": 1,\n  oops\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  Builder b;
  auto x = b.input("x", DType::kF32, {2});
  b.output(b.op("y", "Tanh", {x}));
  std::string text = serialize_graph(b.g);
  text.replace(text.find("Tanh"), 4, "Frobnicate");
  try {
    parse_graph(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("Frobnicate") != std::string::npos);
    CHECK(e.column() > 1);
  }
  CHECK_THROWS_AS(parse_graph(R"({"version":2})"), ParseError);
  CHECK_THROWS_AS(parse_graph(R"({"version":1,"nodes":[]})"), ParseError);
}

TEST_CASE("generated and optimized graphs round trip") {
  const Registry& reg = standard_registry();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Graph g = generate_graph(reg, 10, seed);
    std::vector<Graph> variants{g, optimize(g, OptLevel::kO1)};
    try {
      variants.push_back(optimize(g, OptLevel::kO1, {"F3"}));
    } catch (const PassCrash&) {
    }
    for (const Graph& h : variants) {
      const std::string text = serialize_graph(h);
      Graph back = parse_graph(text);
      CHECK(back.structurally_equal(h));
      CHECK(serialize_graph(back) == text);
    }
  }
}

TEST_CASE("tensor maps") {
  TensorMap m{{"a", Tensor(DType::kI64, {3}, {1, -2, 3})}, {"b", Tensor::scalar(DType::kBool, 1)}};
  TensorMap back = tensors_from_json(tensors_to_json(m));
  REQUIRE(back.size() == 2);
  CHECK(back.at("a").identical(m.at("a")));
  CHECK(back.at("b").identical(m.at("b")));
}
