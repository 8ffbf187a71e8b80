#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "llpm/eval.hpp"
#include "llpm/interp.hpp"
#include "llpm/pipeline.hpp"
#include "llpm/prng.hpp"

namespace llpm {

// Driver configuration for one simulation run. Sources assert valid with
// probability p each idle cycle and then hold until accepted; sinks assert
// ready with probability p each cycle. Channels not named get p = 1.
struct Stimulus {
  TokenStreams inputs;
  std::map<std::string, double> sources;
  std::map<std::string, double> sinks;
  uint64_t seed = 0;
  uint64_t cycles = 0;
};

struct ChannelTrace {
  std::vector<Value> tokens;
  std::vector<uint64_t> cycles; // accepting cycle of each token
  uint64_t transfers = 0;
  uint64_t stall_cycles = 0; // valid && !ready
  uint64_t idle_cycles = 0;  // !valid
};

struct Trace {
  std::map<std::string, ChannelTrace> channels;
  uint64_t cycles = 0;
};

// Cycle-accurate engine for one PipelinedNetlist. Value-domain: node
// semantics are the interpreter's eval_op, so simulating against the
// interpreter exercises exactly the scheduling, registers and stall logic.
//
// Control contract (checked structurally by construction):
//   output_valid depends only on registered state,
//   input_ready depends on registered state, sink readies and the OTHER
//   input channels' valids, never its own.
//
// Cycle protocol: set_input/set_output_ready, read input_ready/
// output_valid/output_data as needed, then step() to commit the cycle.
class NetlistCore {
public:
  explicit NetlistCore(const PipelinedNetlist& n) : n_(&n) {
    for (size_t pi = 0; pi < n.ports.size(); ++pi) {
      const Port& p = n.ports[pi];
      if (p.dir == Direction::In)
        ins_.push_back(pi);
      else
        outs_.push_back(pi);
    }
    in_valid_.assign(ins_.size(), false);
    in_data_.resize(ins_.size());
    in_zero_.reserve(ins_.size());
    for (size_t i = 0; i < ins_.size(); ++i) in_zero_.push_back(zero_value(input_port(i).type));
    out_ready_.assign(outs_.size(), false);
    done_.assign(outs_.size(), false);
    vb_.assign(n.depth + 1, false);

    val_.resize(n.graph.size());
    val_epoch_.assign(n.graph.size(), 0);
    state_.resize(n.graph.size());
    for (const DelaySlot& d : n.delays) state_[d.node] = n.graph.node(d.node).value;

    chain_of_.assign(n.graph.size(), {});
    for (const Node& v : n.graph.nodes()) chain_of_[v.id].assign(v.inputs.size(), SIZE_MAX);
    regs_.resize(n.chains.size());
    for (size_t c = 0; c < n.chains.size(); ++c) {
      const RegChain& ch = n.chains[c];
      chain_of_[ch.consumer][ch.input_index] = c;
      regs_[c].assign(ch.regs(), zero_value(n.types[ch.producer]));
    }

    for (const Node& nd : n.graph.nodes()) {
      if (nd.kind == OpKind::InputPort) {
        for (size_t i = 0; i < ins_.size(); ++i)
          if (input_port(i).name == nd.name) in_node_[nd.id] = i;
      } else if (nd.kind == OpKind::OutputPort) {
        for (size_t o = 0; o < outs_.size(); ++o)
          if (output_port(o).name == nd.name) out_node_[o] = nd.id;
      }
      in_types_.push_back({});
      for (NodeId src : nd.inputs) in_types_.back().push_back(n.types[src]);
    }
  }

  size_t num_inputs() const { return ins_.size(); }
  size_t num_outputs() const { return outs_.size(); }
  const Port& input_port(size_t i) const { return n_->ports[ins_[i]]; }
  const Port& output_port(size_t o) const { return n_->ports[outs_[o]]; }

  void set_input(size_t i, bool valid, const Value& data) {
    in_valid_[i] = valid;
    in_data_[i] = valid ? data : in_zero_[i]; // bubbles carry a typed dummy
  }
  void set_output_ready(size_t o, bool ready) { out_ready_[o] = ready; }
  bool output_ready(size_t o) const { return out_ready_[o]; }

  bool output_valid(size_t o) const { return vb_[n_->depth] && !done_[o]; }

  const Value& output_data(size_t o) {
    NodeId out = out_node_.at(o);
    size_t c = chain_of_[out][0];
    const RegChain& ch = n_->chains[c];
    if (ch.regs() > 0) return regs_[c].back();
    return val(n_->graph.node(out).inputs[0]);
  }

  bool stall() const {
    if (!vb_[n_->depth]) return false;
    for (size_t o = 0; o < outs_.size(); ++o)
      if (!done_[o] && !out_ready_[o]) return true;
    return false;
  }

  bool input_ready(size_t i) const {
    if (stall()) return false;
    for (size_t j = 0; j < ins_.size(); ++j)
      if (j != i && !in_valid_[j]) return false;
    return true;
  }

  // commit the cycle under the latched inputs and readies
  void step() {
    bool stalled = stall();
    bool all_valid = true;
    for (bool v : in_valid_) all_valid = all_valid && v;

    if (stalled) {
      for (size_t o = 0; o < outs_.size(); ++o)
        if (vb_[n_->depth] && !done_[o] && out_ready_[o]) done_[o] = true;
    } else {
      // delay writes first: they must see this cycle's combinational values
      for (const DelaySlot& d : n_->delays) {
        bool token_here = d.write_slot == 0 ? all_valid : vb_[d.write_slot];
        if (token_here) next_state_.emplace_back(d.node, val(n_->graph.node(d.node).inputs[0]));
      }
      // force every chain head's value before any register moves; a shift
      // interleaved with lazy evaluation would let val() read post-shift
      // registers of an earlier chain
      for (size_t c = 0; c < regs_.size(); ++c)
        if (!regs_[c].empty()) val(n_->chains[c].producer);
      for (size_t c = 0; c < regs_.size(); ++c) {
        auto& r = regs_[c];
        if (r.empty()) continue;
        for (size_t j = r.size(); j-- > 1;) r[j] = r[j - 1];
        r[0] = val_[n_->chains[c].producer];
      }
      for (auto& [id, v] : next_state_) state_[id] = std::move(v);
      next_state_.clear();
      for (size_t s = vb_.size(); s-- > 2;) vb_[s] = vb_[s - 1];
      vb_[1] = all_valid; // fire
      done_.assign(outs_.size(), false);
    }
    ++epoch_;
  }

private:
  // combinational value of a node this cycle; only 0-register edges recurse,
  // so recursion depth is bounded by the comb paths validate() proved acyclic
  const Value& val(NodeId id) {
    if (val_epoch_[id] == epoch_) return val_[id];
    const Node& nd = n_->graph.node(id);
    Value v;
    switch (nd.kind) {
      case OpKind::InputPort: v = in_data_[in_node_.at(id)]; break;
      case OpKind::Delay: v = state_[id]; break;
      default: {
        std::vector<Value> in;
        in.reserve(nd.inputs.size());
        for (size_t i = 0; i < nd.inputs.size(); ++i) {
          size_t c = chain_of_[id][i];
          const RegChain& ch = n_->chains[c];
          in.push_back(ch.regs() > 0 ? regs_[c].back() : val(nd.inputs[i]));
        }
        v = eval_op(nd, in, in_types_[id]);
      }
    }
    val_[id] = std::move(v);
    val_epoch_[id] = epoch_;
    return val_[id];
  }

  const PipelinedNetlist* n_;
  std::vector<size_t> ins_, outs_; // port indices by channel index
  std::map<NodeId, size_t> in_node_;
  std::map<size_t, NodeId> out_node_;
  std::vector<bool> in_valid_;
  std::vector<Value> in_data_, in_zero_;
  std::vector<bool> out_ready_, done_;
  std::vector<bool> vb_; // vb_[s]: token occupies slot s, s in 1..depth
  std::vector<std::vector<Value>> regs_;      // per chain, index 0 nearest producer
  std::vector<std::vector<size_t>> chain_of_; // node -> input index -> chain
  std::vector<Value> state_;                  // delay registers
  std::vector<std::pair<NodeId, Value>> next_state_;
  std::vector<Value> val_;
  std::vector<uint64_t> val_epoch_;
  std::vector<std::vector<HWType>> in_types_;
  uint64_t epoch_ = 1;
};

namespace detail {

inline double policy_p(const std::map<std::string, double>& m, const std::string& name) {
  auto it = m.find(name);
  if (it == m.end()) return 1.0;
  if (it->second < 0.0 || it->second > 1.0)
    throw Error("probability for channel '" + name + "' outside [0, 1]");
  return it->second;
}

inline void check_stimulus_names(const PipelinedNetlist& n, const Stimulus& stim) {
  auto is_port = [&](const std::string& name, Direction d) {
    for (const Port& p : n.ports)
      if (p.name == name && p.dir == d) return true;
    return false;
  };
  for (const auto& [name, _] : stim.inputs)
    if (!is_port(name, Direction::In)) throw Error("stimulus names unknown input '" + name + "'");
  for (const auto& [name, _] : stim.sources)
    if (!is_port(name, Direction::In)) throw Error("stimulus names unknown input '" + name + "'");
  for (const auto& [name, _] : stim.sinks)
    if (!is_port(name, Direction::Out)) throw Error("stimulus names unknown output '" + name + "'");
}

} // namespace detail

// Drives one netlist for stim.cycles cycles and records per-channel tokens,
// accepting cycles and the transfer/stall/idle counters. Deterministic:
// every random bit comes from stim.seed.
inline Trace simulate(const PipelinedNetlist& n, const Stimulus& stim) {
  detail::check_stimulus_names(n, stim);
  NetlistCore core(n);

  size_t ni = core.num_inputs(), no = core.num_outputs();
  std::vector<std::deque<Value>> queue(ni);
  std::vector<double> src_p(ni), snk_p(no);
  std::vector<Prng> rng;
  std::vector<bool> holding(ni, false);
  for (size_t i = 0; i < ni; ++i) {
    const Port& p = core.input_port(i);
    auto it = stim.inputs.find(p.name);
    if (it != stim.inputs.end())
      for (const Value& v : it->second) {
        check_value(v, p.type);
        queue[i].push_back(v);
      }
    src_p[i] = detail::policy_p(stim.sources, p.name);
    rng.emplace_back(Prng::mix(stim.seed, i));
  }
  for (size_t o = 0; o < no; ++o) {
    snk_p[o] = detail::policy_p(stim.sinks, core.output_port(o).name);
    rng.emplace_back(Prng::mix(stim.seed, ni + o));
  }

  Trace tr;
  tr.cycles = stim.cycles;
  for (const Port& p : n.ports) tr.channels[p.name] = {};

  // handshake discipline watchdog: valid may not drop and data may not
  // change while valid && !ready
  std::vector<bool> held(no, false);
  std::vector<Value> held_data(no);

  for (uint64_t cycle = 0; cycle < stim.cycles; ++cycle) {
    for (size_t i = 0; i < ni; ++i) {
      bool valid = !queue[i].empty() && (holding[i] || rng[i].chance(src_p[i]));
      holding[i] = valid;
      core.set_input(i, valid, valid ? queue[i].front() : Value());
    }
    std::vector<bool> ready(no);
    for (size_t o = 0; o < no; ++o) {
      ready[o] = rng[ni + o].chance(snk_p[o]);
      core.set_output_ready(o, ready[o]);
    }

    for (size_t i = 0; i < ni; ++i) {
      ChannelTrace& ch = tr.channels[core.input_port(i).name];
      bool valid = holding[i];
      if (!valid) {
        ++ch.idle_cycles;
      } else if (core.input_ready(i)) {
        ++ch.transfers;
        ch.tokens.push_back(queue[i].front());
        ch.cycles.push_back(cycle);
        queue[i].pop_front();
        holding[i] = false;
      } else {
        ++ch.stall_cycles;
      }
    }
    for (size_t o = 0; o < no; ++o) {
      ChannelTrace& ch = tr.channels[core.output_port(o).name];
      bool valid = core.output_valid(o);
      if (valid && held[o] && held_data[o] != core.output_data(o))
        throw Error("handshake violation: output '" + core.output_port(o).name +
                    "' changed data while stalled");
      if (!valid) {
        if (held[o])
          throw Error("handshake violation: output '" + core.output_port(o).name +
                      "' dropped valid before ready");
        ++ch.idle_cycles;
      } else if (ready[o]) {
        ++ch.transfers;
        ch.tokens.push_back(core.output_data(o));
        ch.cycles.push_back(cycle);
        held[o] = false;
      } else {
        ++ch.stall_cycles;
        held[o] = true;
        held_data[o] = core.output_data(o);
      }
    }
    core.step();
  }
  return tr;
}

struct EquivResult {
  bool pass = true;
  size_t trials = 0;
  uint64_t trial_seed = 0; // of the failing trial
  std::string channel;
  size_t index = 0;
  Value expected, actual;
  std::string message;
};

// Bernoulli rate grid exercised by the harness; both extremes included so
// saturation and starvation are always covered across trials.
inline constexpr double kRateGrid[4] = {0.0, 0.3, 0.7, 1.0};

// Compares the netlist's token streams against the untimed interpreter
// over n random (stream, backpressure) trials. Timing is free; per-channel
// token order and values must match exactly (prefix, since a stalled trial
// may not drain). 0 trials passes vacuously.
inline EquivResult equivalence_check(const Module& m, const PipelinedNetlist& net,
                                     size_t trials, uint64_t seed) {
  EquivResult res;
  res.trials = trials;
  for (size_t trial = 0; trial < trials; ++trial) {
    uint64_t tseed = Prng::mix(seed, trial);
    Prng rng(tseed);
    size_t n_tokens = 1 + rng.below(24);

    Stimulus stim;
    stim.seed = tseed;
    for (const Port& p : m.ports) {
      if (p.dir != Direction::In) continue;
      auto& stream = stim.inputs[p.name];
      for (size_t k = 0; k < n_tokens; ++k) stream.push_back(random_value(p.type, rng));
      stim.sources[p.name] = kRateGrid[rng.below(4)];
    }
    for (const Port& p : m.ports)
      if (p.dir == Direction::Out) stim.sinks[p.name] = kRateGrid[rng.below(4)];
    stim.cycles = 32 + (n_tokens + net.depth) * 16;

    TokenStreams golden = run(m, stim.inputs, n_tokens);
    Trace tr = simulate(net, stim);

    for (const Port& p : m.ports) {
      if (p.dir != Direction::Out) continue;
      const auto& got = tr.channels.at(p.name).tokens;
      const auto& want = golden.at(p.name);
      for (size_t k = 0; k < got.size(); ++k) {
        if (k < want.size() && got[k] == want[k]) continue;
        res.pass = false;
        res.trial_seed = tseed;
        res.channel = p.name;
        res.index = k;
        res.actual = got[k];
        if (k < want.size()) res.expected = want[k];
        res.message = "trial seed " + std::to_string(tseed) + ": channel '" + p.name +
                      "' token " + std::to_string(k) + " is " + print_value(got[k]) +
                      (k < want.size() ? ", interpreter says " + print_value(want[k])
                                       : ", interpreter produced no such token");
        return res;
      }
    }
  }
  return res;
}

} // namespace llpm
