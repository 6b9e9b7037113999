// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "doctest.h"
#include "graphsmith/interpreter.h"
#include "graphsmith/opspec.h"

using namespace graphsmith;
using sym::Expr;

namespace {

std::vector<AbsTensor> fresh_for(const OpInstance& inst, ConstraintStore& store) {
  std::vector<AbsTensor> ins;
  for (std::size_t i = 0; i < inst.sig.inputs.size(); ++i) {
    ins.push_back(fresh_tensor(store, inst.sig.inputs[i].dtype, inst.sig.inputs[i].rank, "x" + std::to_string(i)));
  }
  return ins;
}

std::string pretty(const sym::Predicate& p, const ConstraintStore& s) {
  return p.to_string([&](sym::SymId id) { return s.name(id); });
}

Shape concrete(const AbsTensor& t, const sym::Assignment& m) {
  Shape s;
  for (const auto& d : t.shape) s.push_back(sym::evaluate_i64(d, m));
  return s;
}

}  // namespace

TEST_CASE("registry contents") {
  const Registry& r = standard_registry();
  const OpSpec& pool = r.get("MaxPool2d");
  REQUIRE(pool.menu.size() == 2);
  CHECK(pool.menu[0].inputs[0] == TypeSig{DType::kF32, 4});
  CHECK(pool.menu[1].inputs[0] == TypeSig{DType::kF64, 4});
  CHECK(r.find("MatMul") != nullptr);
  CHECK(r.find("Add") != nullptr);
  CHECK(r.find("Add.bcast") != nullptr);
  CHECK(r.get("Add.bcast").kernel == "Add");
  CHECK_FALSE(r.get("Input").generatable());
  CHECK(r.by_meta(MetaKind::kReduce).size() == 4);
  for (const char* name : {"Constant", "Input", "Add", "Sub", "Mul", "Div", "Pow", "Sqrt", "Log2", "Asin",
                           "Sigmoid", "Tanh", "ReLU", "LeakyReLU", "Floor", "Ceil", "Clip", "Abs", "Neg",
                           "MatMul", "Conv2d", "MaxPool2d", "AvgPool2d", "Softmax", "Reshape", "Slice", "Concat",
                           "Transpose", "BroadcastTo", "ConstPad", "ReflectPad", "ReplicatePad", "Where",
                           "ReduceSum", "ReduceMax", "ReduceMean", "ArgMax", "Cast", "Equal"}) {
    CHECK_MESSAGE(r.find(name) != nullptr, name);
  }
}

TEST_CASE("registration errors") {
  Registry r;
  register_standard_ops(r);
  OpSpec dup = r.get("ReLU");
  CHECK_THROWS_AS(r.add(dup), DuplicateName);

  OpSpec zero;
  zero.name = "Zero";
  zero.kernel = "ReLU";
  zero.menu = {{{{DType::kF32, 1}}, {{DType::kF32, 1}}}};
  zero.transfer_fn = [](const OpInstance&, std::span<const AbsTensor> in) {
    return std::vector<AbsTensor>{{in[0].dtype, {Expr(0)}}};
  };
  CHECK_THROWS_AS(r.add(zero), IllFormedSpec);

  OpSpec arity = r.get("ReLU");
  arity.name = "BadArity";
  arity.arity = 2;
  CHECK_THROWS_AS(r.add(arity), IllFormedSpec);

  OpSpec unguarded = r.get("ReLU");
  unguarded.name = "Unguarded";
  unguarded.instantiate_attrs = [](OpInstance& inst, ConstraintStore& s, Rng&) {
    inst.add_attr(s, "k", "k", 0, 10);
  };
  unguarded.transfer_fn = [](const OpInstance& inst, std::span<const AbsTensor> in) {
    AbsTensor t = in[0];
    for (auto& d : t.shape) d = sym::floordiv(d, inst.a("k"));
    return std::vector<AbsTensor>{t};
  };
  CHECK_THROWS_AS(r.add(unguarded), IllFormedSpec);
}

TEST_CASE("pooling requires and type transfer") {
  const OpSpec& pool = standard_registry().get("AvgPool2d");
  ConstraintStore s;
  Rng rng(1);
  OpInstance inst = pool.instantiate(0, s, rng);
  auto ins = fresh_for(inst, s);
  auto preds = pool.requires_of(inst, ins);
  std::vector<std::string> text;
  for (const auto& p : preds) text.push_back(pretty(p, s));
  const std::string kh = s.name(inst.a("kh").id()), kw = s.name(inst.a("kw").id());
  const std::string pad = s.name(inst.a("pad").id()), stride = s.name(inst.a("stride").id());
  const std::string ih = s.name(ins[0].shape[2].id()), iw = s.name(ins[0].shape[3].id());
  for (const std::string& want : {kw + " > 0", kh + " > 0", stride + " > 0", pad + " >= 0",
                                  kw + " <= ((2 * " + pad + ") + " + iw + ")",
                                  kh + " <= ((2 * " + pad + ") + " + ih + ")"}) {
    CHECK_MESSAGE(std::find(text.begin(), text.end(), want) != text.end(), want);
  }
  auto out = pool.type_transfer(inst, ins);
  REQUIRE(out.size() == 1);
  CHECK(out[0].rank() == 4);
  CHECK(out[0].shape[0].id() == ins[0].shape[0].id());
  // Concrete check against the geometry formula.
  s.try_add_constraints(preds);
  s.try_add_constraints({sym::eq(ins[0].shape[2], 32), sym::eq(ins[0].shape[3], 32), sym::eq(inst.a("kh"), 2),
                         sym::eq(inst.a("kw"), 2), sym::eq(inst.a("stride"), 2), sym::eq(inst.a("pad"), 0)});
  CHECK(s.eval(out[0].shape[2]) == 16);
  CHECK(s.eval(out[0].shape[3]) == 16);

  auto back = pool.infer_input_type(inst, out, s);
  REQUIRE(back.size() == 1);
  CHECK(back[0].rank() == 4);
  CHECK(back[0].dtype == DType::kF32);
}

TEST_CASE("same-shape add and reshape predicates") {
  const Registry& r = standard_registry();
  ConstraintStore s;
  Rng rng(1);
  const OpSpec& add = r.get("Add");
  auto row = std::find_if(add.menu.begin(), add.menu.end(), [](const Signature& g) { return g.inputs[0].rank == 2; });
  OpInstance inst = add.instantiate(static_cast<std::size_t>(row - add.menu.begin()), s, rng);
  auto ins = fresh_for(inst, s);
  auto preds = add.requires_of(inst, ins);
  REQUIRE(preds.size() == 2);
  CHECK(pretty(preds[0], s) == s.name(ins[0].shape[0].id()) + " = " + s.name(ins[1].shape[0].id()));
  CHECK_THROWS_AS(add.requires_of(inst, std::span<const AbsTensor>(ins.data(), 1)), ArityMismatch);

  const OpSpec& reshape = r.get("Reshape");
  auto rrow = std::find_if(reshape.menu.begin(), reshape.menu.end(),
                           [](const Signature& g) { return g.inputs[0].rank == 4 && g.outputs[0].rank == 3; });
  OpInstance ri = reshape.instantiate(static_cast<std::size_t>(rrow - reshape.menu.begin()), s, rng);
  auto rin = fresh_for(ri, s);
  auto rp = reshape.requires_of(ri, rin);
  CHECK(rp.size() == 4);
  CHECK(s.try_add_constraints(rp));
  CHECK(s.eval(ri.a("dim0")) * s.eval(ri.a("dim1")) * s.eval(ri.a("dim2")) ==
        s.eval(rin[0].shape[0]) * s.eval(rin[0].shape[1]) * s.eval(rin[0].shape[2]) * s.eval(rin[0].shape[3]));
}

TEST_CASE("where broadcasts three operands") {
  const OpSpec& where = standard_registry().get("Where");
  ConstraintStore s;
  Rng rng(3);
  auto row = std::find_if(where.menu.begin(), where.menu.end(), [](const Signature& g) {
    return g.inputs[0].rank == 2 && g.inputs[1].rank == 2 && g.inputs[2].rank == 1 && g.inputs[1].dtype == DType::kF32;
  });
  OpInstance inst = where.instantiate(static_cast<std::size_t>(row - where.menu.begin()), s, rng);
  std::vector<AbsTensor> ins{{DType::kBool, {Expr(1), Expr(1)}}, {DType::kF32, {Expr(3), Expr(1)}},
                             {DType::kF32, {Expr(2)}}};
  auto preds = where.requires_of(inst, ins);
  for (const auto& p : preds) CHECK(sym::holds(p, s.model()));
  auto out = where.type_transfer(inst, ins);
  CHECK(concrete(out[0], s.model()) == Shape{3, 2});
}

TEST_CASE("reduce to scalar and concat inversion") {
  const Registry& r = standard_registry();
  ConstraintStore s;
  Rng rng(5);
  const OpSpec& sum = r.get("ReduceSum");
  OpInstance inst = sum.instantiate(0, s, rng);  // f32 rank 1
  auto ins = fresh_for(inst, s);
  auto out = sum.type_transfer(inst, ins);
  CHECK(out[0].rank() == 0);

  const OpSpec& cat = r.get("Concat");
  auto row = std::find_if(cat.menu.begin(), cat.menu.end(), [](const Signature& g) {
    return g.inputs[0].rank == 2 && g.inputs[0].dtype == DType::kF32;
  });
  for (int trial = 0; trial < 20; ++trial) {
    ConstraintStore st(trial);
    Rng rr(trial);
    OpInstance ci = cat.instantiate(static_cast<std::size_t>(row - cat.menu.begin()), st, rr);
    AbsTensor placeholder = fresh_tensor(st, DType::kF32, 2, "p");
    REQUIRE(st.try_add_constraints({sym::eq(placeholder.shape[1], 8)}));
    auto back = cat.infer_input_type(ci, {&placeholder, 1}, st);
    REQUIRE(back.size() == 2);
    auto preds = cat.requires_of(ci, back);
    auto fwd = cat.type_transfer(ci, back);
    for (int i = 0; i < 2; ++i) preds.push_back(sym::eq(fwd[0].shape[i], placeholder.shape[i]));
    REQUIRE(st.try_add_constraints(preds));
    const auto axis = ci.fixed("axis");
    CHECK(st.eval(back[0].shape[axis]) + st.eval(back[1].shape[axis]) == st.eval(placeholder.shape[axis]));
    CHECK(st.eval(fwd[0].shape[1]) == 8);
  }
}

TEST_CASE("elementwise inversion is identity") {
  const OpSpec& relu = standard_registry().get("ReLU");
  ConstraintStore s;
  Rng rng(2);
  OpInstance inst = relu.instantiate(3, s, rng);
  AbsTensor t = fresh_tensor(s, inst.sig.outputs[0].dtype, inst.sig.outputs[0].rank, "t");
  auto back = relu.infer_input_type(inst, {&t, 1}, s);
  REQUIRE(back.size() == 1);
  CHECK(back[0].dtype == t.dtype);
  for (int i = 0; i < t.rank(); ++i) CHECK(back[0].shape[i].id() == t.shape[i].id());
}

// Every model of requires with positive output dims must execute with the
// predicted shapes.
TEST_CASE("shape soundness over random draws") {
  const Registry& r = standard_registry();
  for (const OpSpec* spec : r.generatable()) {
    int solved = 0;
    for (int draw = 0; draw < 1000; ++draw) {
      ConstraintStore s(static_cast<std::uint64_t>(draw) * 7919 + 13);
      Rng rng(static_cast<std::uint64_t>(draw) + 1);
      OpInstance inst = spec->instantiate(rng.index(spec->menu.size()), s, rng);
      auto ins = fresh_for(inst, s);
      auto preds = spec->requires_of(inst, ins);
      auto outs = spec->type_transfer(inst, ins);
      for (const auto& d : outs[0].shape) preds.push_back(d >= 1);
      for (const auto& t : ins) {
        Expr p(1);
        for (const auto& d : t.shape) p = p * d;
        preds.push_back(p <= 4096);
      }
      Expr po(1);
      for (const auto& d : outs[0].shape) po = po * d;
      preds.push_back(po <= 4096);
      if (!s.try_add_constraints(preds)) continue;
      ++solved;
      const auto& m = s.model();
      std::vector<TensorType> types;
      for (std::size_t i = 0; i < ins.size(); ++i) types.push_back({ins[i].dtype, concrete(ins[i], m)});
      const Attrs attrs = inst.concrete_attrs(m);
      TensorType predicted{outs[0].dtype, concrete(outs[0], m)};
      const Kernel& k = kernel(spec->kernel);
      TensorType inferred;
      REQUIRE_NOTHROW(inferred = k.infer(types, attrs));
      CHECK_MESSAGE(inferred == predicted, spec->name);
      if (draw % 50 == 0) {
        std::vector<Tensor> vals;
        std::vector<const Tensor*> ptrs;
        for (const auto& t : types) vals.push_back(Tensor::filled(t.dtype, t.shape, 1.0));
        for (const auto& v : vals) ptrs.push_back(&v);
        Tensor out = k.compute(ptrs, attrs);
        CHECK(out.shape() == predicted.shape);
        CHECK(out.dtype() == predicted.dtype);
      }
    }
    CHECK_MESSAGE(solved > 500, spec->name << " solved only " << solved);
  }
}
