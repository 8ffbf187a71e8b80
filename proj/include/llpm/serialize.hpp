#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "llpm/ir.hpp"
#include "llpm/pipeline.hpp"
#include "llpm/sim.hpp"

namespace llpm {

using Json = nlohmann::json;

// Violation of a documented JSON schema. The path is a $-rooted selector
// into the offending document.
class SchemaError : public Error {
public:
  SchemaError(const std::string& path, const std::string& msg)
      : Error("at " + path + ": " + msg) {}
};

inline constexpr int kSchemaVersion = 1;

// On-disk unit of composition: one module plus the metadata the system
// layer needs (clocking, area, deadlock conservatism).
struct Package {
  Module module;
  std::string version = "0.1.0";
  std::string clock_domain = "clk0";
  double area = 0.0;
  bool registered = false; // extern promises a registered in-to-out path
};

namespace jdetail {

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!head(s[0])) return false;
  for (char c : s)
    if (!head(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

inline void check_semver(const std::string& v, const std::string& path) {
  size_t i = 0;
  for (int part = 0; part < 3; ++part) {
    size_t start = i;
    while (i < v.size() && v[i] >= '0' && v[i] <= '9') ++i;
    if (i == start) throw SchemaError(path, "version '" + v + "' is not semver");
    if (part < 2) {
      if (i >= v.size() || v[i] != '.') throw SchemaError(path, "version '" + v + "' is not semver");
      ++i;
    }
  }
  if (i < v.size() && v[i] != '-' && v[i] != '+')
    throw SchemaError(path, "version '" + v + "' is not semver");
}

inline const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path, "missing required key '" + std::string(key) + "'");
  return *it;
}

inline void only_keys(const Json& j, std::initializer_list<const char*> keys,
                      const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* want : keys) known = known || k == want;
    if (!known) throw SchemaError(path, "unknown key '" + k + "'");
  }
}

inline std::string get_string(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline std::string get_string_or(const Json& j, const char* key, const std::string& path,
                                 const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_string(j, key, path);
}

inline uint64_t get_uint(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0))
    throw SchemaError(path, "expected a nonnegative integer");
  return v.get<uint64_t>();
}

inline uint64_t get_uint(const Json& j, const char* key, const std::string& path) {
  return get_uint(field(j, key, path), path + "." + key);
}

inline bool get_bool_or(const Json& j, const char* key, const std::string& path, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_boolean()) throw SchemaError(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

inline HWType get_type(const Json& j, const char* key, const std::string& path) {
  std::string text = get_string(j, key, path);
  try {
    return parse_type(text);
  } catch (const Error& e) {
    throw SchemaError(path + "." + key, std::string("bad type '") + text + "': " + e.what());
  }
}

} // namespace jdetail

// ---- envelope ----

inline Json make_doc(const char* kind) {
  Json j = Json::object();
  j["llpm_schema"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

// Accepts exactly the documented kind at the documented major version.
inline void check_doc(const Json& j, std::string_view kind) {
  if (!j.is_object()) throw SchemaError("$", "document must be a JSON object");
  uint64_t v = jdetail::get_uint(j, "llpm_schema", "$");
  if (v != kSchemaVersion)
    throw SchemaError("$.llpm_schema", "unsupported schema version " + std::to_string(v) +
                                           " (this tool reads version 1)");
  std::string k = jdetail::get_string(j, "kind", "$");
  if (k != kind)
    throw SchemaError("$.kind", "expected '" + std::string(kind) + "', found '" + k + "'");
}

// ---- values ----

// Scalars are JSON integers, arrays are JSON arrays, structs are objects
// keyed by field, unions are {"tag": variant, "value": payload}, void is
// null. Reading requires the type; unions and structs are ambiguous as
// bare value trees.
inline Json value_to_json(const Value& v, const HWType& t) {
  switch (t.kind()) {
    case TypeKind::Void: return nullptr;
    case TypeKind::Bits:
    case TypeKind::UInt: return v.as_uint();
    case TypeKind::SInt: return v.as_sint();
    case TypeKind::Array: {
      Json a = Json::array();
      for (const Value& e : v.elems()) a.push_back(value_to_json(e, t.elem()));
      return a;
    }
    case TypeKind::Struct: {
      Json o = Json::object();
      for (size_t i = 0; i < t.fields().size(); ++i)
        o[t.fields()[i].name] = value_to_json(v.elems()[i], t.fields()[i].type);
      return o;
    }
    case TypeKind::Union: {
      const auto& var = t.variants()[v.tag()];
      Json o = Json::object();
      o["tag"] = var.name;
      o["value"] = value_to_json(v.payload(), var.type);
      return o;
    }
  }
  throw Error("unknown type kind");
}

inline Value value_from_json(const Json& j, const HWType& t, const std::string& path) {
  switch (t.kind()) {
    case TypeKind::Void:
      if (!j.is_null()) throw SchemaError(path, "void value must be null");
      return Value();
    case TypeKind::Bits:
    case TypeKind::UInt: {
      uint64_t raw = jdetail::get_uint(j, path);
      Value v = Value::of_uint(raw);
      try {
        check_value(v, t);
      } catch (const Error& e) {
        throw SchemaError(path, e.what());
      }
      return v;
    }
    case TypeKind::SInt: {
      if (!j.is_number_integer() && !j.is_number_unsigned())
        throw SchemaError(path, "expected an integer");
      if (j.is_number_unsigned() && j.get<uint64_t>() > uint64_t{INT64_MAX})
        throw SchemaError(path, "integer out of range for " + print_type(t));
      Value v = Value::of_sint(j.get<int64_t>());
      try {
        check_value(v, t);
      } catch (const Error& e) {
        throw SchemaError(path, e.what());
      }
      return v;
    }
    case TypeKind::Array: {
      if (!j.is_array()) throw SchemaError(path, "expected an array");
      if (j.size() != t.count())
        throw SchemaError(path, "array needs " + std::to_string(t.count()) + " elements, found " +
                                    std::to_string(j.size()));
      std::vector<Value> elems;
      for (size_t i = 0; i < j.size(); ++i)
        elems.push_back(value_from_json(j[i], t.elem(), path + "[" + std::to_string(i) + "]"));
      return Value::of_list(std::move(elems));
    }
    case TypeKind::Struct: {
      if (!j.is_object()) throw SchemaError(path, "expected an object");
      if (j.size() != t.fields().size())
        throw SchemaError(path, "struct " + print_type(t) + " needs exactly its declared fields");
      std::vector<Value> elems;
      for (const auto& f : t.fields()) {
        if (!j.contains(f.name)) throw SchemaError(path, "missing field '" + f.name + "'");
        elems.push_back(value_from_json(j.at(f.name), f.type, path + "." + f.name));
      }
      return Value::of_list(std::move(elems));
    }
    case TypeKind::Union: {
      if (!j.is_object()) throw SchemaError(path, "expected {\"tag\": ..., \"value\": ...}");
      jdetail::only_keys(j, {"tag", "value"}, path);
      std::string tag = jdetail::get_string(j, "tag", path);
      int idx = t.entry_index(tag);
      if (idx < 0) throw SchemaError(path + ".tag", "no variant '" + tag + "' in " + print_type(t));
      Value payload = value_from_json(jdetail::field(j, "value", path),
                                      t.variants()[static_cast<size_t>(idx)].type, path + ".value");
      return Value::of_union(static_cast<uint32_t>(idx), std::move(payload));
    }
  }
  throw Error("unknown type kind");
}

// ---- ports and graphs ----

inline Json port_to_json(const Port& p) {
  Json j = Json::object();
  j["name"] = p.name;
  j["dir"] = p.dir == Direction::In ? "in" : "out";
  j["type"] = print_type(p.type);
  return j;
}

inline Port port_from_json(const Json& j, const std::string& path) {
  jdetail::only_keys(j, {"name", "dir", "type"}, path);
  Port p;
  p.name = jdetail::get_string(j, "name", path);
  std::string dir = jdetail::get_string(j, "dir", path);
  if (dir == "in")
    p.dir = Direction::In;
  else if (dir == "out")
    p.dir = Direction::Out;
  else
    throw SchemaError(path + ".dir", "expected 'in' or 'out', found '" + dir + "'");
  p.type = jdetail::get_type(j, "type", path);
  return p;
}

namespace jdetail {

inline bool op_takes_type(OpKind k) {
  return k == OpKind::InputPort || k == OpKind::Const || k == OpKind::StructPack ||
         k == OpKind::ArrayPack || k == OpKind::UnionPack || k == OpKind::Delay;
}

inline bool op_takes_name(OpKind k) {
  return k == OpKind::InputPort || k == OpKind::OutputPort || k == OpKind::FieldExtract ||
         k == OpKind::UnionPack || k == OpKind::UnwrapVariant;
}

inline bool op_takes_value(OpKind k) { return k == OpKind::Const || k == OpKind::Delay; }

} // namespace jdetail

inline Json node_to_json(const Node& n) {
  Json j = Json::object();
  j["id"] = n.id;
  j["op"] = op_name(n.kind);
  if (jdetail::op_takes_name(n.kind)) j["name"] = n.name;
  if (jdetail::op_takes_type(n.kind)) j["type"] = print_type(n.type);
  if (jdetail::op_takes_value(n.kind)) j["value"] = value_to_json(n.value, n.type);
  j["inputs"] = n.inputs;
  return j;
}

inline Json graph_to_json(const DataflowGraph& g) {
  Json nodes = Json::array();
  for (const Node& n : g.nodes()) nodes.push_back(node_to_json(n));
  Json j = Json::object();
  j["nodes"] = std::move(nodes);
  return j;
}

inline DataflowGraph graph_from_json(const Json& j, const std::string& path) {
  jdetail::only_keys(j, {"nodes"}, path);
  const Json& nodes = jdetail::field(j, "nodes", path);
  if (!nodes.is_array()) throw SchemaError(path + ".nodes", "expected an array");
  DataflowGraph g;
  for (size_t i = 0; i < nodes.size(); ++i) {
    std::string npath = path + ".nodes[" + std::to_string(i) + "]";
    const Json& nj = nodes[i];
    jdetail::only_keys(nj, {"id", "op", "name", "type", "value", "inputs"}, npath);
    Node n;
    n.id = static_cast<NodeId>(jdetail::get_uint(nj, "id", npath));
    if (n.id != i)
      throw SchemaError(npath + ".id", "node ids must equal their index; expected " +
                                           std::to_string(i));
    std::string op = jdetail::get_string(nj, "op", npath);
    auto kind = op_from_name(op);
    if (!kind) throw SchemaError(npath + ".op", "unknown op '" + op + "'");
    n.kind = *kind;
    if (jdetail::op_takes_name(n.kind))
      n.name = jdetail::get_string(nj, "name", npath);
    else if (nj.contains("name"))
      throw SchemaError(npath, std::string("op '") + op_name(n.kind) + "' takes no name");
    if (jdetail::op_takes_type(n.kind))
      n.type = jdetail::get_type(nj, "type", npath);
    else if (nj.contains("type"))
      throw SchemaError(npath, std::string("op '") + op_name(n.kind) + "' takes no type");
    if (nj.contains("inputs")) {
      const Json& in = nj.at("inputs");
      if (!in.is_array()) throw SchemaError(npath + ".inputs", "expected an array");
      for (size_t k = 0; k < in.size(); ++k)
        n.inputs.push_back(static_cast<NodeId>(
            jdetail::get_uint(in[k], npath + ".inputs[" + std::to_string(k) + "]")));
    }
    if (jdetail::op_takes_value(n.kind))
      n.value = value_from_json(jdetail::field(nj, "value", npath), n.type, npath + ".value");
    else if (nj.contains("value"))
      throw SchemaError(npath, std::string("op '") + op_name(n.kind) + "' takes no value");
    g.add_node(std::move(n));
  }
  return g;
}

// ---- package manifests ----

inline Json package_to_json(const Package& p) {
  Json j = make_doc("package");
  j["name"] = p.module.name;
  j["version"] = p.version;
  j["clock_domain"] = p.clock_domain;
  j["area"] = p.area;
  if (p.registered) j["registered"] = true;
  Json ports = Json::array();
  for (const Port& port : p.module.ports) ports.push_back(port_to_json(port));
  j["ports"] = std::move(ports);
  Json body = Json::object();
  if (p.module.is_extern()) {
    const ExternBody& e = p.module.extern_body();
    Json ext = Json::object();
    ext["files"] = e.files;
    ext["top"] = e.top;
    Json mapping = Json::object();
    for (const auto& [port, sig] : e.mapping) {
      Json m = Json::object();
      m["data"] = sig.data;
      m["valid"] = sig.valid;
      m["ready"] = sig.ready;
      mapping[port] = std::move(m);
    }
    ext["mapping"] = std::move(mapping);
    if (e.model) ext["model"] = graph_to_json(*e.model);
    body["extern"] = std::move(ext);
  } else {
    body["ir"] = graph_to_json(p.module.graph());
  }
  j["body"] = std::move(body);
  return j;
}

inline Package package_from_json(const Json& j) {
  check_doc(j, "package");
  jdetail::only_keys(j, {"llpm_schema", "kind", "name", "version", "clock_domain", "area",
                         "registered", "ports", "body"},
                     "$");
  Package p;
  p.module.name = jdetail::get_string(j, "name", "$");
  if (!jdetail::is_identifier(p.module.name))
    throw SchemaError("$.name", "'" + p.module.name + "' is not an identifier");
  p.version = jdetail::get_string_or(j, "version", "$", "0.1.0");
  jdetail::check_semver(p.version, "$.version");
  p.clock_domain = jdetail::get_string_or(j, "clock_domain", "$", "clk0");
  if (!jdetail::is_identifier(p.clock_domain))
    throw SchemaError("$.clock_domain", "'" + p.clock_domain + "' is not an identifier");
  if (j.contains("area")) {
    const Json& a = j.at("area");
    if (!a.is_number() || a.get<double>() < 0.0)
      throw SchemaError("$.area", "expected a nonnegative number");
    p.area = a.get<double>();
  }
  p.registered = jdetail::get_bool_or(j, "registered", "$", false);

  const Json& ports = jdetail::field(j, "ports", "$");
  if (!ports.is_array()) throw SchemaError("$.ports", "expected an array");
  for (size_t i = 0; i < ports.size(); ++i)
    p.module.ports.push_back(port_from_json(ports[i], "$.ports[" + std::to_string(i) + "]"));

  const Json& body = jdetail::field(j, "body", "$");
  jdetail::only_keys(body, {"ir", "extern"}, "$.body");
  if (body.contains("ir") == body.contains("extern"))
    throw SchemaError("$.body", "body must hold exactly one of 'ir' or 'extern'");
  if (body.contains("ir")) {
    p.module.body = graph_from_json(body.at("ir"), "$.body.ir");
  } else {
    const Json& ej = body.at("extern");
    jdetail::only_keys(ej, {"files", "top", "mapping", "model"}, "$.body.extern");
    ExternBody e;
    const Json& files = jdetail::field(ej, "files", "$.body.extern");
    if (!files.is_array()) throw SchemaError("$.body.extern.files", "expected an array");
    for (size_t i = 0; i < files.size(); ++i) {
      if (!files[i].is_string())
        throw SchemaError("$.body.extern.files[" + std::to_string(i) + "]", "expected a string");
      e.files.push_back(files[i].get<std::string>());
    }
    e.top = jdetail::get_string(ej, "top", "$.body.extern");
    if (ej.contains("mapping")) {
      const Json& mj = ej.at("mapping");
      if (!mj.is_object()) throw SchemaError("$.body.extern.mapping", "expected an object");
      for (const auto& [port, sj] : mj.items()) {
        std::string mpath = "$.body.extern.mapping." + port;
        if (!p.module.find_port(port)) throw SchemaError(mpath, "no port named '" + port + "'");
        jdetail::only_keys(sj, {"data", "valid", "ready"}, mpath);
        SignalMap sm;
        sm.data = jdetail::get_string(sj, "data", mpath);
        sm.valid = jdetail::get_string(sj, "valid", mpath);
        sm.ready = jdetail::get_string(sj, "ready", mpath);
        e.mapping[port] = std::move(sm);
      }
      for (const Port& port : p.module.ports)
        if (!e.mapping.count(port.name))
          throw SchemaError("$.body.extern.mapping",
                            "mapping does not cover port '" + port.name + "'");
    } else {
      for (const Port& port : p.module.ports)
        e.mapping[port.name] = {port.name + "_data", port.name + "_valid", port.name + "_ready"};
    }
    if (ej.contains("model")) e.model = graph_from_json(ej.at("model"), "$.body.extern.model");
    p.module.body = std::move(e);
  }
  return p;
}

// ---- latency tables ----

inline Json latency_to_json(const LatencyTable& t) {
  Json ops = Json::object();
  for (OpKind k :
       {OpKind::InputPort, OpKind::OutputPort, OpKind::Const, OpKind::Add, OpKind::Sub,
        OpKind::Mul, OpKind::Eq, OpKind::Lt, OpKind::And, OpKind::Or, OpKind::Xor, OpKind::Not,
        OpKind::Mux, OpKind::StructPack, OpKind::FieldExtract, OpKind::ArrayPack,
        OpKind::ArrayIndex, OpKind::UnionPack, OpKind::TagOf, OpKind::UnwrapVariant,
        OpKind::Delay})
    ops[op_name(k)] = t.of(k);
  Json j = make_doc("latency");
  j["ops"] = std::move(ops);
  return j;
}

inline LatencyTable latency_from_json(const Json& j) {
  check_doc(j, "latency");
  jdetail::only_keys(j, {"llpm_schema", "kind", "ops"}, "$");
  LatencyTable t;
  const Json& ops = jdetail::field(j, "ops", "$");
  if (!ops.is_object()) throw SchemaError("$.ops", "expected an object");
  for (const auto& [name, v] : ops.items()) {
    std::string path = "$.ops." + name;
    auto k = op_from_name(name);
    if (!k) throw SchemaError(path, "unknown op '" + name + "'");
    uint32_t cycles = static_cast<uint32_t>(jdetail::get_uint(v, path));
    try {
      t.set(*k, cycles);
    } catch (const Error& e) {
      throw SchemaError(path, e.what());
    }
  }
  return t;
}

// ---- pipelined netlists ----

inline Json netlist_to_json(const PipelinedNetlist& n) {
  Json j = make_doc("netlist");
  j["name"] = n.name;
  Json ports = Json::array();
  for (const Port& p : n.ports) ports.push_back(port_to_json(p));
  j["ports"] = std::move(ports);
  j["graph"] = graph_to_json(n.graph);
  j["latency"] = latency_to_json(n.sched.table)["ops"];
  Json sched = Json::object();
  sched["stages"] = n.sched.stages;
  sched["total_latency"] = n.sched.total_latency;
  j["schedule"] = std::move(sched);
  j["depth"] = n.depth;
  Json chains = Json::array();
  for (const RegChain& c : n.chains) {
    Json cj = Json::object();
    cj["producer"] = c.producer;
    cj["consumer"] = c.consumer;
    cj["input"] = c.input_index;
    cj["from"] = c.from_slot;
    cj["to"] = c.to_slot;
    chains.push_back(std::move(cj));
  }
  j["chains"] = std::move(chains);
  Json delays = Json::array();
  for (const DelaySlot& d : n.delays) {
    Json dj = Json::object();
    dj["node"] = d.node;
    dj["slot"] = d.write_slot;
    delays.push_back(std::move(dj));
  }
  j["delays"] = std::move(delays);
  return j;
}

inline PipelinedNetlist netlist_from_json(const Json& j) {
  check_doc(j, "netlist");
  jdetail::only_keys(
      j, {"llpm_schema", "kind", "name", "ports", "graph", "latency", "schedule", "depth",
          "chains", "delays"},
      "$");
  PipelinedNetlist n;
  n.name = jdetail::get_string(j, "name", "$");
  const Json& ports = jdetail::field(j, "ports", "$");
  if (!ports.is_array()) throw SchemaError("$.ports", "expected an array");
  for (size_t i = 0; i < ports.size(); ++i)
    n.ports.push_back(port_from_json(ports[i], "$.ports[" + std::to_string(i) + "]"));
  n.graph = graph_from_json(jdetail::field(j, "graph", "$"), "$.graph");

  Json lat = make_doc("latency");
  lat["ops"] = jdetail::field(j, "latency", "$");
  n.sched.table = latency_from_json(lat);

  const Json& sj = jdetail::field(j, "schedule", "$");
  jdetail::only_keys(sj, {"stages", "total_latency"}, "$.schedule");
  const Json& stages = jdetail::field(sj, "stages", "$.schedule");
  if (!stages.is_array()) throw SchemaError("$.schedule.stages", "expected an array");
  for (size_t i = 0; i < stages.size(); ++i)
    n.sched.stages.push_back(static_cast<uint32_t>(
        jdetail::get_uint(stages[i], "$.schedule.stages[" + std::to_string(i) + "]")));
  if (n.sched.stages.size() != n.graph.size())
    throw SchemaError("$.schedule.stages", "schedule must cover every node");
  n.sched.total_latency =
      static_cast<uint32_t>(jdetail::get_uint(sj, "total_latency", "$.schedule"));
  n.depth = static_cast<uint32_t>(jdetail::get_uint(j, "depth", "$"));
  if (n.depth != std::max<uint32_t>(1, n.sched.total_latency))
    throw SchemaError("$.depth", "depth must be max(1, total_latency)");

  try {
    n.types = detail::infer_all(n.graph, nullptr);
  } catch (const Error& e) {
    throw SchemaError("$.graph", e.what());
  }

  const Json& chains = jdetail::field(j, "chains", "$");
  if (!chains.is_array()) throw SchemaError("$.chains", "expected an array");
  for (size_t i = 0; i < chains.size(); ++i) {
    std::string path = "$.chains[" + std::to_string(i) + "]";
    jdetail::only_keys(chains[i], {"producer", "consumer", "input", "from", "to"}, path);
    RegChain c;
    c.producer = static_cast<NodeId>(jdetail::get_uint(chains[i], "producer", path));
    c.consumer = static_cast<NodeId>(jdetail::get_uint(chains[i], "consumer", path));
    c.input_index = static_cast<uint32_t>(jdetail::get_uint(chains[i], "input", path));
    c.from_slot = static_cast<uint32_t>(jdetail::get_uint(chains[i], "from", path));
    c.to_slot = static_cast<uint32_t>(jdetail::get_uint(chains[i], "to", path));
    if (c.producer >= n.graph.size() || c.consumer >= n.graph.size())
      throw SchemaError(path, "chain endpoint out of range");
    if (c.to_slot < c.from_slot) throw SchemaError(path, "chain runs backward");
    n.chains.push_back(c);
  }
  const Json& delays = jdetail::field(j, "delays", "$");
  if (!delays.is_array()) throw SchemaError("$.delays", "expected an array");
  for (size_t i = 0; i < delays.size(); ++i) {
    std::string path = "$.delays[" + std::to_string(i) + "]";
    jdetail::only_keys(delays[i], {"node", "slot"}, path);
    DelaySlot d;
    d.node = static_cast<NodeId>(jdetail::get_uint(delays[i], "node", path));
    d.write_slot = static_cast<uint32_t>(jdetail::get_uint(delays[i], "slot", path));
    if (d.node >= n.graph.size() || n.graph.node(d.node).kind != OpKind::Delay)
      throw SchemaError(path + ".node", "not a delay node");
    n.delays.push_back(d);
  }
  // every edge must carry exactly one chain, in (consumer, input) order
  size_t want = 0;
  for (const Node& nd : n.graph.nodes()) want += nd.inputs.size();
  if (n.chains.size() != want) throw SchemaError("$.chains", "chains must cover every edge");
  return n;
}

// ---- stimulus, traces, streams ----

// { "inputs": {port: [tokens]}, "sources": {port: p}, "sinks": {port: p} }
// Seed and cycle count ride on CLI flags, not the file.
inline Stimulus stimulus_from_json(const Json& j, const std::vector<Port>& ports) {
  if (!j.is_object()) throw SchemaError("$", "stimulus must be a JSON object");
  jdetail::only_keys(j, {"llpm_schema", "kind", "inputs", "sources", "sinks"}, "$");
  if (j.contains("llpm_schema")) check_doc(j, "stimulus");
  auto port_type = [&](const std::string& name, Direction dir,
                       const std::string& path) -> const HWType& {
    for (const Port& p : ports)
      if (p.name == name && p.dir == dir) return p.type;
    throw SchemaError(path, "no " + std::string(dir == Direction::In ? "input" : "output") +
                                " channel named '" + name + "'");
  };
  Stimulus stim;
  if (j.contains("inputs")) {
    const Json& in = j.at("inputs");
    if (!in.is_object()) throw SchemaError("$.inputs", "expected an object");
    for (const auto& [name, tokens] : in.items()) {
      std::string path = "$.inputs." + name;
      const HWType& t = port_type(name, Direction::In, path);
      if (!tokens.is_array()) throw SchemaError(path, "expected an array of tokens");
      std::vector<Value> vs;
      for (size_t i = 0; i < tokens.size(); ++i)
        vs.push_back(value_from_json(tokens[i], t, path + "[" + std::to_string(i) + "]"));
      stim.inputs[name] = std::move(vs);
    }
  }
  auto read_rates = [&](const char* key, Direction dir, std::map<std::string, double>& out) {
    if (!j.contains(key)) return;
    const Json& rj = j.at(key);
    std::string base = std::string("$.") + key;
    if (!rj.is_object()) throw SchemaError(base, "expected an object");
    for (const auto& [name, p] : rj.items()) {
      std::string path = base + "." + name;
      port_type(name, dir, path);
      if (!p.is_number()) throw SchemaError(path, "expected a probability");
      double v = p.get<double>();
      if (v < 0.0 || v > 1.0) throw SchemaError(path, "probability outside [0, 1]");
      out[name] = v;
    }
  };
  read_rates("sources", Direction::In, stim.sources);
  read_rates("sinks", Direction::Out, stim.sinks);
  return stim;
}

inline Json trace_to_json(const Trace& trace, const std::map<std::string, HWType>& types) {
  Json channels = Json::object();
  for (const auto& [name, ch] : trace.channels) {
    auto it = types.find(name);
    if (it == types.end()) throw Error("no type known for channel '" + name + "'");
    Json cj = Json::object();
    Json tokens = Json::array();
    for (const Value& v : ch.tokens) tokens.push_back(value_to_json(v, it->second));
    cj["tokens"] = std::move(tokens);
    cj["accept_cycles"] = ch.cycles;
    cj["transfers"] = ch.transfers;
    cj["stall_cycles"] = ch.stall_cycles;
    cj["idle_cycles"] = ch.idle_cycles;
    channels[name] = std::move(cj);
  }
  Json j = make_doc("trace");
  j["cycles"] = trace.cycles;
  j["channels"] = std::move(channels);
  return j;
}

inline Json streams_to_json(const TokenStreams& streams, const std::vector<Port>& ports) {
  Json sj = Json::object();
  for (const auto& [name, tokens] : streams) {
    const HWType* t = nullptr;
    for (const Port& p : ports)
      if (p.name == name) t = &p.type;
    if (!t) throw Error("no port named '" + name + "'");
    Json arr = Json::array();
    for (const Value& v : tokens) arr.push_back(value_to_json(v, *t));
    sj[name] = std::move(arr);
  }
  Json j = make_doc("streams");
  j["streams"] = std::move(sj);
  return j;
}

// ---- files ----

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("cannot write '" + path + "'");
}

inline Json read_json_file(const std::string& path) {
  std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("$", path + " is not valid JSON: " + e.what());
  }
}

// two-space indent, sorted keys, trailing newline; byte-stable for a given
// document
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, dump_json(j));
}

// Parse, schema-check and IR-validate one package file.
inline Package load_package(const std::string& path) {
  Package p = package_from_json(read_json_file(path));
  auto diags = validate(p.module);
  if (!diags.empty())
    throw Error("package '" + path + "' does not validate: " + join_diagnostics(diags));
  return p;
}

} // namespace llpm
