// Copyright 2026 The GraphSmith Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphsmith/serialize.h"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "graphsmith/kernels.h"

namespace graphsmith {

using nlohmann::json;

namespace {

namespace it = boost::archive::iterators;

std::pair<std::size_t, std::size_t> position_of(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] void structural(const std::string& what) { throw ParseError(what, 1, 1); }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) structural(where + ": missing \"" + key + "\"");
  return j.at(key);
}

DType dtype_of(const json& j, const std::string& where) {
  const json& d = field(j, "dtype", where);
  if (!d.is_string()) structural(where + ": dtype must be a string");
  auto dt = parse_dtype(d.get<std::string>());
  if (!dt) structural(where + ": unknown dtype '" + d.get<std::string>() + "'");
  return *dt;
}

Shape shape_of(const json& j, const std::string& where) {
  const json& s = field(j, "shape", where);
  if (!s.is_array()) structural(where + ": shape must be an array");
  Shape out;
  for (const auto& d : s) {
    if (!d.is_number_integer() || d.get<std::int64_t>() < 0) structural(where + ": bad dimension");
    out.push_back(d.get<std::int64_t>());
  }
  return out;
}

json ref_json(const NodeRef& r) { return json::array({r.node, r.slot}); }

NodeRef ref_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_number_integer()) {
    structural(where + ": node reference must be [\"id\", slot]");
  }
  return {j[0].get<std::string>(), j[1].get<int>()};
}

json attrs_json(const Attrs& a) {
  json out = json::object();
  for (const auto& [k, v] : a) out[k] = v;
  return out;
}

Attrs attrs_from(const json& j, const std::string& where) {
  if (!j.is_object()) structural(where + ": attrs must be an object");
  Attrs out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number_integer()) structural(where + ": attribute '" + k + "' must be an integer");
    out[k] = v.get<std::int64_t>();
  }
  return out;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  using Enc = it::base64_from_binary<it::transform_width<std::string_view::const_iterator, 6, 8>>;
  std::string out(Enc(bytes.begin()), Enc(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::string base64_decode(std::string_view text) {
  std::size_t pad = 0;
  while (!text.empty() && text.back() == '=') {
    text.remove_suffix(1);
    ++pad;
  }
  if (pad > 2 || (text.size() + pad) % 4 != 0) throw std::invalid_argument("malformed base64 payload");
  using Dec = it::transform_width<it::binary_from_base64<std::string_view::const_iterator>, 8, 6>;
  try {
    std::string out(Dec(text.begin()), Dec(text.end()));
    // The decoder emits the partial trailing byte implied by the padding.
    if (pad > 0 && !out.empty() && out.size() > (text.size() * 6) / 8) out.pop_back();
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed base64 payload");
  }
}

json tensor_to_json(const Tensor& t) {
  json shape = json::array();
  for (auto d : t.shape()) shape.push_back(d);
  return {{"dtype", std::string(dtype_name(t.dtype()))}, {"shape", shape}, {"data_b64", base64_encode(t.to_bytes())}};
}

Tensor tensor_from_json(const json& j) {
  const DType dt = dtype_of(j, "tensor");
  Shape shape = shape_of(j, "tensor");
  const json& data = field(j, "data_b64", "tensor");
  if (!data.is_string()) structural("tensor: data_b64 must be a string");
  std::string bytes;
  try {
    bytes = base64_decode(data.get<std::string>());
  } catch (const std::invalid_argument& e) {
    structural(std::string("tensor: ") + e.what());
  }
  if (bytes.size() != static_cast<std::size_t>(num_elements(shape)) * dtype_size(dt)) {
    structural("tensor: payload size does not match shape");
  }
  return Tensor::from_bytes(dt, std::move(shape), bytes);
}

json tensors_to_json(const TensorMap& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = tensor_to_json(v);
  return out;
}

TensorMap tensors_from_json(const json& j) {
  if (!j.is_object()) structural("tensor map must be an object");
  TensorMap out;
  for (const auto& [k, v] : j.items()) out.emplace(k, tensor_from_json(v));
  return out;
}

json graph_to_json(const Graph& g) {
  json nodes = json::array(), inputs = json::array(), weights = json::array(), outputs = json::array();
  for (const auto& n : g.nodes) {
    json jn = {{"id", n.id}, {"op", n.op}, {"attrs", attrs_json(n.attrs)}};
    json ins = json::array();
    for (const auto& r : n.inputs) ins.push_back(ref_json(r));
    jn["inputs"] = ins;
    if (n.op == "Input") {
      json shape = json::array();
      for (auto d : n.type.shape) shape.push_back(d);
      inputs.push_back({{"name", n.id}, {"dtype", std::string(dtype_name(n.type.dtype))}, {"shape", shape}});
    } else if (n.op == "Weight") {
      if (!n.value) throw std::invalid_argument("weight '" + n.id + "' has no payload");
      json w = tensor_to_json(*n.value);
      w["name"] = n.id;
      weights.push_back(w);
    } else if (n.op == "Constant") {
      if (!n.value) throw std::invalid_argument("constant '" + n.id + "' has no payload");
      jn["value"] = tensor_to_json(*n.value);
    } else if (n.op == "Fused") {
      json steps = json::array();
      for (const auto& s : n.fused) steps.push_back({{"op", s.op}, {"attrs", attrs_json(s.attrs)}});
      jn["fused"] = steps;
    }
    nodes.push_back(jn);
  }
  for (const auto& r : g.outputs) outputs.push_back(ref_json(r));
  return {{"version", kFormatVersion}, {"nodes", nodes}, {"graph_inputs", inputs}, {"weights", weights}, {"graph_outputs", outputs}};
}

Graph graph_from_json(const json& j) {
  const json& version = field(j, "version", "graph");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    structural("graph: unsupported format version");
  }
  std::map<std::string, TensorType> input_types;
  for (const auto& ji : field(j, "graph_inputs", "graph")) {
    const std::string name = field(ji, "name", "graph_inputs").get<std::string>();
    input_types[name] = TensorType{dtype_of(ji, "input " + name), shape_of(ji, "input " + name)};
  }
  std::map<std::string, Tensor> weight_values;
  for (const auto& jw : field(j, "weights", "graph")) {
    const std::string name = field(jw, "name", "weights").get<std::string>();
    weight_values.emplace(name, tensor_from_json(jw));
  }

  Graph g;
  std::map<std::string, TensorType> types;
  for (const auto& jn : field(j, "nodes", "graph")) {
    Node n;
    const json& id = field(jn, "id", "node");
    const json& op = field(jn, "op", "node");
    if (!id.is_string() || !op.is_string()) structural("node: id and op must be strings");
    n.id = id.get<std::string>();
    n.op = op.get<std::string>();
    const std::string where = "node '" + n.id + "'";
    if (types.count(n.id)) structural(where + ": duplicate id");
    n.attrs = attrs_from(field(jn, "attrs", where), where);
    for (const auto& r : field(jn, "inputs", where)) n.inputs.push_back(ref_from(r, where));
    std::vector<TensorType> in;
    for (const auto& r : n.inputs) {
      auto t = types.find(r.node);
      if (t == types.end()) structural(where + ": input '" + r.node + "' is not defined earlier");
      in.push_back(t->second);
    }
    try {
      if (n.op == "Input") {
        auto t = input_types.find(n.id);
        if (t == input_types.end()) structural(where + ": missing from graph_inputs");
        n.type = t->second;
      } else if (n.op == "Weight") {
        auto w = weight_values.find(n.id);
        if (w == weight_values.end()) structural(where + ": missing from weights");
        n.value = w->second;
        n.type = {w->second.dtype(), w->second.shape()};
      } else if (n.op == "Constant") {
        n.value = tensor_from_json(field(jn, "value", where));
        n.type = {n.value->dtype(), n.value->shape()};
      } else if (n.op == "Fused") {
        if (in.size() != 1) structural(where + ": fused node needs one input");
        for (const auto& s : field(jn, "fused", where)) {
          const std::string sop = field(s, "op", where).get<std::string>();
          if (!has_kernel(sop)) structural(where + ": unknown op '" + sop + "'");
          n.fused.push_back(FusedStep{sop, attrs_from(field(s, "attrs", where), where), {}});
        }
        if (n.fused.empty()) structural(where + ": empty fused chain");
        TensorType t = in[0];
        for (auto& s : n.fused) {
          const TensorType one[] = {t};
          s.type = t = kernel(s.op).infer(one, s.attrs);
        }
        n.type = t;
      } else {
        if (!has_kernel(n.op)) structural(where + ": unknown op '" + n.op + "'");
        n.type = kernel(n.op).infer(in, n.attrs);
      }
    } catch (const ShapeMismatch& e) {
      structural(where + ": " + e.what());
    }
    types[n.id] = n.type;
    g.nodes.push_back(std::move(n));
  }
  for (const auto& r : field(j, "graph_outputs", "graph")) {
    NodeRef ref = ref_from(r, "graph_outputs");
    if (!types.count(ref.node)) structural("graph_outputs: unknown node '" + ref.node + "'");
    g.outputs.push_back(ref);
  }
  return g;
}

std::string serialize_graph(const Graph& g) { return graph_to_json(g).dump(); }

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = position_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(e.what(), line, col);
  }
}

Graph parse_graph(std::string_view text) {
  const json j = parse_json(text);
  try {
    return graph_from_json(j);
  } catch (const ParseError& e) {
    // Point at the offending op name when the text contains it.
    const std::string msg = e.what();
    const auto q = msg.find("unknown op '");
    if (q != std::string::npos) {
      const std::string name = msg.substr(q + 12, msg.find('\'', q + 12) - q - 12);
      const auto at = text.find("\"" + name + "\"");
      if (at != std::string_view::npos) {
        const auto [line, col] = position_of(text, at);
        throw ParseError(msg.substr(0, msg.rfind(" (line")), line, col);
      }
    }
    throw;
  } catch (const json::exception& e) {
    structural(std::string("graph: ") + e.what());
  }
}

}  // namespace graphsmith
