#pragma once

#include <map>
#include <string>
#include <vector>

#include "llpm/ir.hpp"

namespace llpm {

// Per-op pipeline cost in cycles. This is configuration, not measurement:
// the table stands in for a target device's timing characteristics.
class LatencyTable {
public:
  LatencyTable() {
    for (int k = 0; k <= static_cast<int>(OpKind::Delay); ++k) lat_[static_cast<OpKind>(k)] = 0;
    for (OpKind k : {OpKind::Add, OpKind::Sub, OpKind::Eq, OpKind::Lt, OpKind::And, OpKind::Or,
                     OpKind::Xor, OpKind::Not, OpKind::Mux, OpKind::ArrayIndex})
      lat_[k] = 1;
    lat_[OpKind::Mul] = 2;
    lat_[OpKind::Delay] = 1; // one token boundary, not overridable
  }

  uint32_t of(OpKind k) const { return lat_.at(k); }

  void set(OpKind k, uint32_t v) {
    if (k == OpKind::Delay && v != 1) throw Error("delay latency is fixed at 1");
    lat_[k] = v;
  }

private:
  std::map<OpKind, uint32_t> lat_;
};

// Stage assignment. stage(n) is the slot at which n's inputs arrive and its
// combinational result is born; the result becomes consumable latency(n)
// slots later. A Delay's stage is the slot its register is written and read
// at (its Q crosses one token boundary instead of occupying slots).
struct Schedule {
  std::vector<uint32_t> stages; // dense, by node id
  uint32_t total_latency = 0;   // L: max OutputPort stage
  LatencyTable table;

  uint32_t stage(NodeId id) const { return stages.at(id); }
};

// ASAP schedule by fixpoint: inputs at stage 0 and
//   stage(v)     = max over preds u of stage(u) + latency(u)   (u not Delay)
//                  max over preds u of stage(u)                (u Delay)
//   stage(delay) = stage(writer)
// The writer rule pins the register write to the slot where the written
// value is combinationally alive; readers are pushed to at least that slot,
// which keeps every read of token k seeing exactly token k-1's write. A
// feedback loop whose combinational segment carries nonzero latency has no
// stage assignment at initiation interval 1 and is rejected.
inline Schedule schedule(const DataflowGraph& g, const LatencyTable& table = {}) {
  auto order = topo_order(g); // also proves combinational acyclicity
  Schedule s;
  s.table = table;
  s.stages.assign(g.size(), 0);

  uint64_t bound = 1;
  for (const Node& n : g.nodes()) bound += table.of(n.kind);

  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeId id : order) {
      const Node& n = g.node(id);
      uint64_t want = 0;
      if (n.kind == OpKind::Delay) {
        want = n.inputs.empty() ? 0 : s.stages.at(n.inputs[0]);
      } else {
        for (NodeId src : n.inputs) {
          const Node& u = g.node(src);
          uint64_t avail =
              s.stages.at(src) + (u.kind == OpKind::Delay ? 0 : table.of(u.kind));
          want = std::max(want, avail);
        }
      }
      if (want > bound)
        throw Error("feedback through node " + std::to_string(id) +
                    " carries latency and cannot meet initiation interval 1");
      if (want != s.stages[id]) {
        s.stages[id] = static_cast<uint32_t>(want);
        changed = true;
      }
    }
  }

  s.total_latency = 0;
  for (const Node& n : g.nodes())
    if (n.kind == OpKind::OutputPort)
      s.total_latency = std::max(s.total_latency, s.stages[n.id]);
  return s;
}

// A register chain standing on one edge: the producer's value enters at
// from_slot and is re-registered once per slot boundary up to to_slot.
// Zero-length chains are direct combinational connections.
struct RegChain {
  NodeId producer = 0;
  NodeId consumer = 0;
  uint32_t input_index = 0;
  uint32_t from_slot = 0;
  uint32_t to_slot = 0;

  uint32_t regs() const { return to_slot - from_slot; }
};

struct DelaySlot {
  NodeId node = 0;
  uint32_t write_slot = 0;
};

// A scheduled module with its latency-insensitive wrapper made explicit:
// a valid-bit shift chain of length `depth`, one done bit per output
// channel, a global stall, and per-edge data register chains. Every data
// register is enabled by !stall; Delay writes are additionally gated on a
// token actually occupying their write slot.
struct PipelinedNetlist {
  std::string name;
  std::vector<Port> ports;
  DataflowGraph graph; // dead nodes already removed
  Schedule sched;
  std::vector<HWType> types; // per node
  uint32_t depth = 1;        // D = max(1, L); outputs present tokens at slot D
  std::vector<RegChain> chains;  // one per edge, (consumer, input) order
  std::vector<DelaySlot> delays;

  // inserted data registers, not counting zero-width (void) slots
  uint64_t data_register_count() const {
    uint64_t total = 0;
    for (const RegChain& c : chains)
      if (bit_width(types.at(c.producer)) > 0) total += c.regs();
    return total;
  }
};

// Wraps a scheduled graph. The schedule must belong to exactly this
// module's graph; every edge is re-checked against the stage inequalities.
inline PipelinedNetlist pipeline(const Module& m, const Schedule& sched) {
  if (m.is_extern()) throw Error("cannot pipeline external RTL module '" + m.name + "'");
  auto diags = validate(m);
  if (!diags.empty()) throw Error("module does not validate: " + join_diagnostics(diags));
  const DataflowGraph& g = m.graph();
  if (sched.stages.size() != g.size())
    throw Error("schedule does not cover the module's graph");

  PipelinedNetlist n;
  n.name = m.name;
  n.ports = m.ports;
  n.graph = g;
  n.sched = sched;
  n.types = detail::infer_all(g, nullptr);
  n.depth = std::max<uint32_t>(1, sched.total_latency);

  for (const Node& v : g.nodes()) {
    for (uint32_t i = 0; i < v.inputs.size(); ++i) {
      const Node& u = g.node(v.inputs[i]);
      uint32_t from = sched.stage(u.id);
      uint32_t to;
      uint32_t need = from + (u.kind == OpKind::Delay ? 0 : sched.table.of(u.kind));
      if (v.kind == OpKind::OutputPort) {
        to = n.depth; // outputs aligned to the tip of the valid chain
      } else if (v.kind == OpKind::Delay) {
        to = sched.stage(v.id);
        if (to != from)
          throw Error("delay " + std::to_string(v.id) + " writes at slot " + std::to_string(to) +
                      " but its value lives at slot " + std::to_string(from));
        need = from;
      } else {
        to = sched.stage(v.id);
      }
      if (to < need)
        throw Error("edge " + std::to_string(u.id) + "->" + std::to_string(v.id) +
                    " consumed at slot " + std::to_string(to) + " before it exists at slot " +
                    std::to_string(need));
      n.chains.push_back({u.id, v.id, i, from, to});
    }
    if (v.kind == OpKind::Delay) n.delays.push_back({v.id, sched.stage(v.id)});
  }
  return n;
}

// Dead-code-eliminates, schedules and wraps in one step.
inline PipelinedNetlist pipeline(const Module& m, const LatencyTable& table = {}) {
  if (m.is_extern()) throw Error("cannot pipeline external RTL module '" + m.name + "'");
  auto diags = validate(m);
  if (!diags.empty()) throw Error("module does not validate: " + join_diagnostics(diags));
  Module live{m.name, m.ports, dead_node_elim(m.graph())};
  return pipeline(live, schedule(live.graph(), table));
}

} // namespace llpm
