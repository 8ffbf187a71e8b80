#pragma once

#include <map>
#include <string>
#include <vector>

#include "llpm/eval.hpp"
#include "llpm/ir.hpp"

namespace llpm {

// port name -> ordered token list
using TokenStreams = std::map<std::string, std::vector<Value>>;

// Untimed reference semantics: N lockstep firings of the whole graph. At
// each firing a Delay outputs its stored value, then stores its input
// (reads-before-writes, so single-step feedback is well-defined). Outputs
// have exactly `steps` tokens per port.
//
// `order` overrides the evaluation order; it must still respect every
// non-Delay edge (callers use it to show the result is order-independent).
inline TokenStreams run(const Module& m, const TokenStreams& inputs, size_t steps,
                        const std::vector<NodeId>* order = nullptr) {
  auto diags = validate(m);
  if (!diags.empty()) throw Error("module does not validate: " + join_diagnostics(diags));

  const DataflowGraph* g = nullptr;
  if (m.is_extern()) {
    if (!m.extern_body().model)
      throw Error("module '" + m.name + "' is external RTL without a behavioral model: " +
                  "not interpretable");
    g = &*m.extern_body().model;
  } else {
    g = &m.graph();
  }

  for (const Port& p : m.ports) {
    if (p.dir != Direction::In) continue;
    auto it = inputs.find(p.name);
    if (it == inputs.end()) throw Error("missing input stream '" + p.name + "'");
    if (it->second.size() < steps)
      throw Error("input stream '" + p.name + "' has " + std::to_string(it->second.size()) +
                  " tokens, need " + std::to_string(steps));
    for (const Value& v : it->second) check_value(v, p.type);
  }

  std::vector<NodeId> default_order;
  if (!order) {
    default_order = topo_order(*g);
    order = &default_order;
  }
  {
    std::vector<bool> done(g->size(), false);
    if (order->size() != g->size()) throw Error("evaluation order is not a permutation");
    for (NodeId id : *order) {
      if (id >= g->size() || done[id]) throw Error("evaluation order is not a permutation");
      const Node& n = g->node(id);
      if (n.kind != OpKind::Delay)
        for (NodeId src : n.inputs)
          if (!done[src]) throw Error("evaluation order violates an edge into node " +
                                      std::to_string(id));
      done[id] = true;
    }
  }

  auto types = detail::infer_all(*g, nullptr);
  std::vector<std::vector<HWType>> in_types(g->size());
  for (const Node& n : g->nodes())
    for (NodeId src : n.inputs) in_types[n.id].push_back(types[src]);

  std::vector<Value> state(g->size());
  for (const Node& n : g->nodes())
    if (n.kind == OpKind::Delay) state[n.id] = n.value;

  TokenStreams out;
  for (const Port& p : m.ports)
    if (p.dir == Direction::Out) out[p.name] = {};

  std::vector<Value> cur(g->size());
  for (size_t k = 0; k < steps; ++k) {
    std::vector<Value> in;
    for (NodeId id : *order) {
      const Node& n = g->node(id);
      switch (n.kind) {
        case OpKind::InputPort:
          cur[id] = inputs.at(n.name)[k];
          break;
        case OpKind::Delay:
          cur[id] = state[id];
          break;
        default:
          in.clear();
          for (NodeId src : n.inputs) in.push_back(cur[src]);
          cur[id] = eval_op(n, in, in_types[id]);
          if (n.kind == OpKind::OutputPort) out[n.name].push_back(cur[id]);
      }
    }
    for (const Node& n : g->nodes())
      if (n.kind == OpKind::Delay) state[n.id] = cur[n.inputs[0]];
  }
  return out;
}

inline TokenStreams run(const Module& m, const TokenStreams& inputs) {
  size_t steps = 0;
  bool any = false;
  for (const Port& p : m.ports) {
    if (p.dir != Direction::In) continue;
    auto it = inputs.find(p.name);
    size_t n = it == inputs.end() ? 0 : it->second.size();
    steps = any ? std::min(steps, n) : n;
    any = true;
  }
  return run(m, inputs, steps);
}

} // namespace llpm
