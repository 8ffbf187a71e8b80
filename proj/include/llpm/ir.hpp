#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "llpm/diagnostics.hpp"
#include "llpm/types.hpp"

namespace llpm {

using NodeId = uint32_t;

// Rate-1 dataflow ops. Every node consumes one token per input and produces
// exactly one output token per firing; Delay is the only state element.
enum class OpKind {
  InputPort,
  OutputPort,
  Const,
  Add,
  Sub,
  Mul,
  Eq,
  Lt,
  And,
  Or,
  Xor,
  Not,
  Mux,
  StructPack,
  FieldExtract,
  ArrayPack,
  ArrayIndex,
  UnionPack,
  TagOf,
  UnwrapVariant,
  Delay,
};

inline constexpr const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::InputPort: return "input";
    case OpKind::OutputPort: return "output";
    case OpKind::Const: return "const";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Eq: return "eq";
    case OpKind::Lt: return "lt";
    case OpKind::And: return "and";
    case OpKind::Or: return "or";
    case OpKind::Xor: return "xor";
    case OpKind::Not: return "not";
    case OpKind::Mux: return "mux";
    case OpKind::StructPack: return "struct_pack";
    case OpKind::FieldExtract: return "field_extract";
    case OpKind::ArrayPack: return "array_pack";
    case OpKind::ArrayIndex: return "array_index";
    case OpKind::UnionPack: return "union_pack";
    case OpKind::TagOf: return "tag_of";
    case OpKind::UnwrapVariant: return "unwrap";
    case OpKind::Delay: return "delay";
  }
  return "?";
}

inline std::optional<OpKind> op_from_name(std::string_view s) {
  for (int k = 0; k <= static_cast<int>(OpKind::Delay); ++k)
    if (s == op_name(static_cast<OpKind>(k))) return static_cast<OpKind>(k);
  return std::nullopt;
}

// One dataflow node. Which attributes are meaningful depends on the kind:
//   name:  InputPort/OutputPort port name, FieldExtract field,
//          UnionPack/UnwrapVariant variant
//   type:  InputPort, Const, StructPack, ArrayPack, UnionPack, Delay
//   value: Const value, Delay init
struct Node {
  NodeId id = 0;
  OpKind kind = OpKind::Const;
  std::string name;
  HWType type;
  Value value;
  std::vector<NodeId> inputs;
};

class DataflowGraph {
public:
  const std::vector<Node>& nodes() const { return nodes_; }
  size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  Node& node(NodeId id) { return nodes_.at(id); }

  // Appends a node; the id must equal its index (add_node is the raw entry
  // point used by the deserializer, the named builders below cover tests).
  NodeId add_node(Node n) {
    n.id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  NodeId in(std::string name, HWType t) {
    return add_node({0, OpKind::InputPort, std::move(name), std::move(t), {}, {}});
  }
  NodeId out(std::string name, NodeId src) {
    return add_node({0, OpKind::OutputPort, std::move(name), {}, {}, {src}});
  }
  NodeId cst(HWType t, Value v) {
    return add_node({0, OpKind::Const, {}, std::move(t), std::move(v), {}});
  }
  NodeId op(OpKind k, std::vector<NodeId> ins) {
    return add_node({0, k, {}, {}, {}, std::move(ins)});
  }
  NodeId pack_struct(HWType t, std::vector<NodeId> fields) {
    return add_node({0, OpKind::StructPack, {}, std::move(t), {}, std::move(fields)});
  }
  NodeId extract(NodeId src, std::string field) {
    return add_node({0, OpKind::FieldExtract, std::move(field), {}, {}, {src}});
  }
  NodeId pack_array(HWType t, std::vector<NodeId> elems) {
    return add_node({0, OpKind::ArrayPack, {}, std::move(t), {}, std::move(elems)});
  }
  NodeId index(NodeId arr, NodeId idx) {
    return add_node({0, OpKind::ArrayIndex, {}, {}, {}, {arr, idx}});
  }
  NodeId pack_union(HWType t, std::string variant, NodeId payload) {
    return add_node({0, OpKind::UnionPack, std::move(variant), std::move(t), {}, {payload}});
  }
  NodeId tag_of(NodeId u) {
    return add_node({0, OpKind::TagOf, {}, {}, {}, {u}});
  }
  NodeId unwrap(NodeId u, std::string variant) {
    return add_node({0, OpKind::UnwrapVariant, std::move(variant), {}, {}, {u}});
  }
  NodeId delay(HWType t, Value init, NodeId src) {
    return add_node({0, OpKind::Delay, {}, std::move(t), std::move(init), {src}});
  }

private:
  std::vector<Node> nodes_;
};

enum class Direction { In, Out };

struct Port {
  std::string name;
  Direction dir = Direction::In;
  HWType type;
};

// RTL-side signal names one typed port maps onto
struct SignalMap {
  std::string data, valid, ready;
};

// RTL black box: file list plus top-level name, optionally a behavioral
// dataflow model used by the interpreter and system simulator.
struct ExternBody {
  std::vector<std::string> files;
  std::string top;
  std::map<std::string, SignalMap> mapping; // port name -> RTL signals
  std::optional<DataflowGraph> model;
};

struct Module {
  std::string name;
  std::vector<Port> ports;
  std::variant<DataflowGraph, ExternBody> body;

  bool is_extern() const { return std::holds_alternative<ExternBody>(body); }
  const DataflowGraph& graph() const { return std::get<DataflowGraph>(body); }
  DataflowGraph& graph() { return std::get<DataflowGraph>(body); }
  const ExternBody& extern_body() const { return std::get<ExternBody>(body); }

  const Port* find_port(std::string_view name) const {
    for (const auto& p : ports)
      if (p.name == name) return &p;
    return nullptr;
  }
};

namespace detail {

inline HWType scalar_binop(const char* op, const HWType& a, const HWType& b) {
  if (!a.is_scalar() || a != b)
    throw Error(std::string(op) + " expects two equal scalar operands, got " +
                print_type(a) + " and " + print_type(b));
  return a;
}

inline uint32_t index_width(uint32_t count) {
  return std::max<uint32_t>(1, count <= 1 ? 0 : std::bit_width(uint64_t{count} - 1));
}

inline void expect_arity(const Node& n, size_t want) {
  if (n.inputs.size() != want)
    throw Error(std::string(op_name(n.kind)) + " expects " + std::to_string(want) +
                " inputs, got " + std::to_string(n.inputs.size()));
}

} // namespace detail

// Output type of a node given its input types; throws Error on arity or
// type mismatch. InputPort/Const/Delay take their type attribute at face
// value (validate() separately checks attribute well-formedness).
inline HWType infer_type(const Node& n, const std::vector<HWType>& in) {
  using detail::expect_arity;
  switch (n.kind) {
    case OpKind::InputPort:
      expect_arity(n, 0);
      return n.type;
    case OpKind::OutputPort:
      expect_arity(n, 1);
      return in[0];
    case OpKind::Const:
      expect_arity(n, 0);
      return n.type;
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul:
    case OpKind::And:
    case OpKind::Or:
    case OpKind::Xor:
      expect_arity(n, 2);
      return detail::scalar_binop(op_name(n.kind), in[0], in[1]);
    case OpKind::Eq:
      expect_arity(n, 2);
      if (in[0] != in[1])
        throw Error("eq expects equal operand types, got " + print_type(in[0]) +
                    " and " + print_type(in[1]));
      return HWType::make_uint(1);
    case OpKind::Lt:
      expect_arity(n, 2);
      detail::scalar_binop("lt", in[0], in[1]);
      return HWType::make_uint(1);
    case OpKind::Not:
      expect_arity(n, 1);
      if (!in[0].is_scalar())
        throw Error("not expects a scalar operand, got " + print_type(in[0]));
      return in[0];
    case OpKind::Mux:
      expect_arity(n, 3);
      if (in[0] != HWType::make_uint(1))
        throw Error("mux select must be uint<1>, got " + print_type(in[0]));
      if (in[1] != in[2])
        throw Error("mux arms differ: " + print_type(in[1]) + " vs " + print_type(in[2]));
      return in[1];
    case OpKind::StructPack: {
      if (n.type.kind() != TypeKind::Struct)
        throw Error("struct_pack type attribute must be a struct");
      const auto& fs = n.type.fields();
      expect_arity(n, fs.size());
      for (size_t i = 0; i < fs.size(); ++i)
        if (in[i] != fs[i].type)
          throw Error("struct_pack field '" + fs[i].name + "' expects " +
                      print_type(fs[i].type) + ", got " + print_type(in[i]));
      return n.type;
    }
    case OpKind::FieldExtract: {
      expect_arity(n, 1);
      if (in[0].kind() != TypeKind::Struct)
        throw Error("field_extract expects a struct, got " + print_type(in[0]));
      int i = in[0].entry_index(n.name);
      if (i < 0) throw Error("unknown field '" + n.name + "' in " + print_type(in[0]));
      return in[0].fields()[static_cast<size_t>(i)].type;
    }
    case OpKind::ArrayPack: {
      if (n.type.kind() != TypeKind::Array)
        throw Error("array_pack type attribute must be an array");
      expect_arity(n, n.type.count());
      for (const auto& t : in)
        if (t != n.type.elem())
          throw Error("array_pack element expects " + print_type(n.type.elem()) +
                      ", got " + print_type(t));
      return n.type;
    }
    case OpKind::ArrayIndex: {
      expect_arity(n, 2);
      if (in[0].kind() != TypeKind::Array)
        throw Error("array_index expects an array, got " + print_type(in[0]));
      HWType want = HWType::make_uint(detail::index_width(in[0].count()));
      if (in[1] != want)
        throw Error("array_index over " + print_type(in[0]) + " needs index " +
                    print_type(want) + ", got " + print_type(in[1]));
      return in[0].elem();
    }
    case OpKind::UnionPack: {
      expect_arity(n, 1);
      if (n.type.kind() != TypeKind::Union)
        throw Error("union_pack type attribute must be a union");
      int i = n.type.entry_index(n.name);
      if (i < 0) throw Error("unknown variant '" + n.name + "' in " + print_type(n.type));
      const HWType& want = n.type.variants()[static_cast<size_t>(i)].type;
      if (in[0] != want)
        throw Error("union_pack variant '" + n.name + "' expects " + print_type(want) +
                    ", got " + print_type(in[0]));
      return n.type;
    }
    case OpKind::TagOf:
      expect_arity(n, 1);
      if (in[0].kind() != TypeKind::Union)
        throw Error("tag_of expects a union, got " + print_type(in[0]));
      return HWType::make_uint(std::max<uint32_t>(1, in[0].tag_width()));
    case OpKind::UnwrapVariant: {
      expect_arity(n, 1);
      if (in[0].kind() != TypeKind::Union)
        throw Error("unwrap expects a union, got " + print_type(in[0]));
      int i = in[0].entry_index(n.name);
      if (i < 0) throw Error("unknown variant '" + n.name + "' in " + print_type(in[0]));
      return in[0].variants()[static_cast<size_t>(i)].type;
    }
    case OpKind::Delay:
      expect_arity(n, 1);
      if (in[0] != n.type)
        throw Error("delay of " + print_type(n.type) + " driven by " + print_type(in[0]));
      return n.type;
  }
  throw Error("unknown op kind");
}

// Topological order treating Delay inputs as sinks: every edge whose
// consumer is not a Delay goes forward. Ties break toward the smallest id,
// so the order is a pure function of the graph.
inline std::vector<NodeId> topo_order(const DataflowGraph& g) {
  std::vector<uint32_t> indeg(g.size(), 0);
  std::vector<std::vector<NodeId>> succ(g.size());
  for (const Node& n : g.nodes()) {
    if (n.kind == OpKind::Delay) continue; // state write happens after the step
    for (NodeId src : n.inputs) {
      if (src >= g.size()) continue; // dangling edge, reported by validate
      succ[src].push_back(n.id);
      ++indeg[n.id];
    }
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId i = 0; i < g.size(); ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<NodeId> order;
  order.reserve(g.size());
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (NodeId s : succ[id])
      if (--indeg[s] == 0) ready.push(s);
  }
  if (order.size() != g.size()) throw Error("combinational cycle");
  return order;
}

namespace detail {

// Per-node output types, with a diagnostic for each node that fails to
// infer (those and their dependents fall back to void). A Delay's type is
// its attribute, so its input edge is checked after everything else has a
// type; that lets the walk run in topo order, where a Delay precedes its
// readers but may follow its writer.
inline std::vector<HWType> infer_all(const DataflowGraph& g,
                                     std::vector<Diagnostic>* diags) {
  std::vector<HWType> types(g.size());
  std::vector<NodeId> order;
  try {
    order = topo_order(g);
  } catch (const Error&) {
    order.resize(g.size()); // cyclic graph: id order, validate() reports the cycle
    for (NodeId i = 0; i < g.size(); ++i) order[i] = i;
  }
  auto report = [&](const std::string& msg, NodeId id) {
    if (diags) diags->push_back({msg, id});
  };
  for (NodeId id : order) {
    const Node& n = g.node(id);
    bool ok = true;
    std::vector<HWType> in;
    in.reserve(n.inputs.size());
    for (NodeId src : n.inputs) {
      if (src >= g.size()) {
        report("input edge to missing node " + std::to_string(src), n.id);
        ok = false;
        break;
      }
      in.push_back(types[src]);
    }
    if (!ok) continue;
    if (n.kind == OpKind::Delay) {
      types[n.id] = n.type; // input checked below
      continue;
    }
    try {
      types[n.id] = infer_type(n, in);
    } catch (const Error& e) {
      report(e.what(), n.id);
    }
  }
  for (const Node& n : g.nodes()) {
    if (n.kind != OpKind::Delay) continue;
    if (n.inputs.size() != 1) {
      report("delay expects 1 inputs, got " + std::to_string(n.inputs.size()), n.id);
      continue;
    }
    if (n.inputs[0] < g.size() && types[n.inputs[0]] != n.type)
      report("delay of " + print_type(n.type) + " driven by " + print_type(types[n.inputs[0]]),
             n.id);
  }
  return types;
}

} // namespace detail

// Structural validation of a module; returns every problem found rather
// than throwing. An empty result means the module is well-formed.
inline std::vector<Diagnostic> validate(const Module& m) {
  std::vector<Diagnostic> ds;
  if (!is_identifier(m.name)) ds.push_back({"module name '" + m.name + "' is not an identifier"});
  if (m.ports.empty()) ds.push_back({"module has no ports"});
  for (size_t i = 0; i < m.ports.size(); ++i) {
    if (!is_identifier(m.ports[i].name))
      ds.push_back({"port name '" + m.ports[i].name + "' is not an identifier"});
    for (size_t j = 0; j < i; ++j)
      if (m.ports[i].name == m.ports[j].name)
        ds.push_back({"duplicate port '" + m.ports[i].name + "'"});
  }

  const DataflowGraph* g = nullptr;
  if (m.is_extern()) {
    const ExternBody& e = m.extern_body();
    if (e.files.empty()) ds.push_back({"extern module lists no RTL files"});
    if (!is_identifier(e.top)) ds.push_back({"extern top '" + e.top + "' is not an identifier"});
    if (e.model) g = &*e.model;
  } else {
    g = &m.graph();
  }
  if (!g) return ds;

  for (const Node& n : g->nodes()) {
    if (n.kind == OpKind::Const || n.kind == OpKind::Delay) {
      try {
        check_value(n.value, n.type);
      } catch (const Error& e) {
        ds.push_back({std::string(n.kind == OpKind::Const ? "const value: " : "delay init: ") +
                          e.what(),
                      n.id});
      }
    }
  }

  auto types = detail::infer_all(*g, &ds);

  // boundary nodes pair off with ports one-to-one, by name and type
  std::map<std::string, NodeId> seen_in, seen_out;
  for (const Node& n : g->nodes()) {
    if (n.kind != OpKind::InputPort && n.kind != OpKind::OutputPort) continue;
    bool is_in = n.kind == OpKind::InputPort;
    auto& seen = is_in ? seen_in : seen_out;
    if (seen.count(n.name)) {
      ds.push_back({std::string(is_in ? "input" : "output") + " port '" + n.name +
                        "' has more than one boundary node",
                    n.id});
      continue;
    }
    seen.emplace(n.name, n.id);
    const Port* p = m.find_port(n.name);
    if (!p || (p->dir == Direction::In) != is_in) {
      ds.push_back({std::string(is_in ? "input" : "output") + " node '" + n.name +
                        "' matches no port",
                    n.id});
      continue;
    }
    if (types[n.id] != p->type)
      ds.push_back({"port '" + n.name + "' is " + print_type(p->type) + " but its node is " +
                        print_type(types[n.id]),
                    n.id});
  }
  for (const Port& p : m.ports) {
    const auto& seen = p.dir == Direction::In ? seen_in : seen_out;
    if (!seen.count(p.name)) ds.push_back({"port '" + p.name + "' has no boundary node"});
  }

  try {
    topo_order(*g);
  } catch (const Error&) {
    ds.push_back({"combinational cycle (a cycle with no delay on it)"});
  }
  return ds;
}

// Drops nodes that cannot reach any OutputPort; ids are renumbered densely
// in the original order. Observable streams are unchanged.
inline DataflowGraph dead_node_elim(const DataflowGraph& g) {
  std::vector<bool> live(g.size(), false);
  std::vector<NodeId> work;
  for (const Node& n : g.nodes())
    if (n.kind == OpKind::OutputPort) {
      live[n.id] = true;
      work.push_back(n.id);
    }
  while (!work.empty()) {
    NodeId id = work.back();
    work.pop_back();
    for (NodeId src : g.node(id).inputs)
      if (!live.at(src)) {
        live[src] = true;
        work.push_back(src);
      }
  }
  std::vector<NodeId> remap(g.size(), 0);
  NodeId next = 0;
  for (const Node& n : g.nodes())
    if (live[n.id]) remap[n.id] = next++;
  DataflowGraph out;
  for (const Node& n : g.nodes())
    if (live[n.id]) {
      Node c = n;
      for (NodeId& src : c.inputs) src = remap[src];
      out.add_node(std::move(c));
    }
  return out;
}

} // namespace llpm
