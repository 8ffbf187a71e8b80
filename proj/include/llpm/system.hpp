#pragma once

#include <algorithm>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "llpm/serialize.hpp"

namespace llpm {

// ---- design ----

struct SystemDesign {
  struct Instance {
    std::string package;      // key into the package map
    std::string clock_domain; // empty: use the package default
  };
  struct Connection {
    std::string src_inst, src_port;
    std::string dst_inst, dst_port;
    uint32_t fifo_depth = 0; // 0: direct wire
  };
  struct Export {
    std::string inst, port;
    std::string as; // top-level name; empty: "<inst>_<port>"
  };

  std::string name;
  std::map<std::string, Instance> instances;
  std::vector<Connection> connections;
  std::vector<Export> exports;
};

// ---- assembled form ----

struct Channel {
  std::string name; // "<src inst>.<port>-><dst inst>.<port>"
  std::string src_inst, src_port, dst_inst, dst_port;
  HWType type;
  uint32_t depth = 0; // tokens of storage; CDC channels always have >= 1
  bool cdc = false;
};

struct ExportedPort {
  std::string name; // top-level channel name
  std::string inst, port;
  Direction dir = Direction::In;
  HWType type;
};

struct ResolvedInstance {
  std::string name;
  std::string package;
  std::string clock_domain;
};

struct BridgeChannel {
  std::string name;
  Direction dir = Direction::In;
  HWType type;
  uint32_t base = 0;       // byte address, 16-byte aligned
  uint32_t data_words = 0; // ceil(bit_width / 32)
  uint32_t words = 0;      // data_words + status + control
};

struct BridgeTap {
  std::string channel;
  uint32_t base = 0;
  uint32_t words = 3; // transfers, stall_cycles, idle_cycles
};

// 32-bit word register map. Channel regions carry data words, then one
// status word, then one control word; tap regions are read-only counters.
struct HostBridgeMap {
  uint32_t word_size = 32;
  std::vector<BridgeChannel> channels; // ordered by name
  std::vector<BridgeTap> taps;         // ordered by channel name

  uint32_t span_bytes() const {
    uint32_t end = 0;
    for (const auto& c : channels) end = std::max(end, c.base + c.words * 4);
    for (const auto& t : taps) end = std::max(end, t.base + t.words * 4);
    return end;
  }
};

struct AssembledSystem {
  std::string name;
  std::map<std::string, Package> packages;
  std::vector<ResolvedInstance> instances; // sorted by name
  std::vector<Channel> channels;           // connection order
  std::vector<ExportedPort> exports;       // export order
  std::vector<std::string> taps;           // tapped channel/export names
  std::optional<HostBridgeMap> bridge;
  std::vector<std::string> report;

  const ResolvedInstance* find_instance(std::string_view name) const {
    for (const auto& i : instances)
      if (i.name == name) return &i;
    return nullptr;
  }
  const Package& package_of(const ResolvedInstance& inst) const {
    return packages.at(inst.package);
  }
  const Module& module_of(const ResolvedInstance& inst) const {
    return package_of(inst).module;
  }
};

// ---- assembly ----

namespace sysdetail {

inline const Port& need_port(const Module& m, const std::string& inst, const std::string& port,
                             Direction dir) {
  const Port* p = m.find_port(port);
  if (!p)
    throw Error("instance '" + inst + "' (module '" + m.name + "') has no port '" + port + "'");
  if (p->dir != dir)
    throw Error("port '" + inst + "." + port + "' is an " +
                (p->dir == Direction::In ? std::string("input") : std::string("output")) +
                ", used as an " + (dir == Direction::In ? "input" : "output"));
  return *p;
}

} // namespace sysdetail

inline constexpr uint32_t kCdcDefaultDepth = 4;

// Resolves instances, type-checks every connection, inserts CDC storage on
// clock-domain crossings, and enforces that every instance port is either
// connected exactly once or exported exactly once.
inline AssembledSystem assemble(const SystemDesign& d,
                                const std::map<std::string, Package>& packages) {
  AssembledSystem out;
  out.name = d.name;

  for (const auto& [name, inst] : d.instances) {
    if (!jdetail::is_identifier(name))
      throw Error("instance name '" + name + "' is not an identifier");
    auto it = packages.find(inst.package);
    if (it == packages.end())
      throw Error("instance '" + name + "' references unknown package '" + inst.package + "'");
    out.packages.emplace(inst.package, it->second);
    std::string domain = inst.clock_domain.empty() ? it->second.clock_domain : inst.clock_domain;
    if (!jdetail::is_identifier(domain))
      throw Error("instance '" + name + "' has bad clock domain '" + domain + "'");
    out.instances.push_back({name, inst.package, domain});
  }

  // usage[inst][port] counts drivers/sinks so XOR(connected, exported) holds
  std::map<std::string, std::map<std::string, int>> usage;
  auto touch = [&](const std::string& inst, const std::string& port) {
    int& n = usage[inst][port];
    ++n;
    return n;
  };

  uint32_t cdc_count = 0;
  for (const auto& c : d.connections) {
    const ResolvedInstance* src = out.find_instance(c.src_inst);
    const ResolvedInstance* dst = out.find_instance(c.dst_inst);
    if (!src) throw Error("connection names unknown instance '" + c.src_inst + "'");
    if (!dst) throw Error("connection names unknown instance '" + c.dst_inst + "'");
    const Port& sp = sysdetail::need_port(out.module_of(*src), c.src_inst, c.src_port,
                                          Direction::Out);
    const Port& dp = sysdetail::need_port(out.module_of(*dst), c.dst_inst, c.dst_port,
                                          Direction::In);
    if (sp.type != dp.type)
      throw Error("type mismatch on " + c.src_inst + "." + c.src_port + " -> " + c.dst_inst +
                  "." + c.dst_port + ": " + print_type(sp.type) + " vs " + print_type(dp.type));
    if (touch(c.src_inst, c.src_port) > 1)
      throw Error("output '" + c.src_inst + "." + c.src_port +
                  "' drives more than one connection (fan-out needs explicit fork modules)");
    if (touch(c.dst_inst, c.dst_port) > 1)
      throw Error("input '" + c.dst_inst + "." + c.dst_port + "' is driven more than once");

    Channel ch;
    ch.src_inst = c.src_inst;
    ch.src_port = c.src_port;
    ch.dst_inst = c.dst_inst;
    ch.dst_port = c.dst_port;
    ch.name = c.src_inst + "." + c.src_port + "->" + c.dst_inst + "." + c.dst_port;
    ch.type = sp.type;
    ch.cdc = src->clock_domain != dst->clock_domain;
    ch.depth = ch.cdc ? std::max(c.fifo_depth, kCdcDefaultDepth) : c.fifo_depth;
    if (ch.cdc) ++cdc_count;
    out.channels.push_back(std::move(ch));
  }

  std::set<std::string> export_names;
  for (const auto& e : d.exports) {
    const ResolvedInstance* inst = out.find_instance(e.inst);
    if (!inst) throw Error("export names unknown instance '" + e.inst + "'");
    const Port* p = out.module_of(*inst).find_port(e.port);
    if (!p) throw Error("export names unknown port '" + e.inst + "." + e.port + "'");
    std::string top = e.as.empty() ? e.inst + "_" + e.port : e.as;
    if (!jdetail::is_identifier(top))
      throw Error("export name '" + top + "' is not an identifier");
    if (!export_names.insert(top).second)
      throw Error("duplicate export name '" + top + "'");
    if (touch(e.inst, e.port) > 1)
      throw Error("port '" + e.inst + "." + e.port + "' is both connected and exported");
    out.exports.push_back({top, e.inst, e.port, p->dir, p->type});
  }

  for (const auto& inst : out.instances)
    for (const Port& p : out.module_of(inst).ports) {
      auto it = usage.find(inst.name);
      int n = it == usage.end() ? 0 : it->second.count(p.name) ? it->second.at(p.name) : 0;
      if (n == 0)
        throw Error("port '" + inst.name + "." + p.name +
                    "' is neither connected nor exported");
    }

  out.report.push_back("instances: " + std::to_string(out.instances.size()));
  out.report.push_back("channels: " + std::to_string(out.channels.size()) + " (" +
                       std::to_string(cdc_count) + " cdc)");
  out.report.push_back("exports: " + std::to_string(out.exports.size()));
  out.report.push_back("type check: ok");
  return out;
}

// ---- deadlock ----

namespace sysdetail {

// An instance breaks handshake cycles when it promises a registered
// in-to-out path: extern packages via the manifest flag, IR packages when
// their schedule has latency >= 1. An unschedulable IR body is treated as
// combinational; it cannot be emitted anyway.
inline bool is_registered(const Package& p) {
  if (p.module.is_extern()) return p.registered;
  try {
    return schedule(dead_node_elim(p.module.graph())).total_latency >= 1;
  } catch (const Error&) {
    return false;
  }
}

} // namespace sysdetail

// Reports one finding per strongly connected component whose internal
// edges all have zero storage and whose instances are all unregistered.
inline std::vector<std::string> check_deadlock(const AssembledSystem& sys) {
  size_t n = sys.instances.size();
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < n; ++i) index[sys.instances[i].name] = i;
  std::vector<bool> registered(n);
  for (size_t i = 0; i < n; ++i)
    registered[i] = sysdetail::is_registered(sys.package_of(sys.instances[i]));

  // adjacency over zero-storage edges between unregistered instances
  std::vector<std::vector<size_t>> succ(n);
  for (const Channel& c : sys.channels) {
    if (c.depth > 0) continue;
    size_t a = index.at(c.src_inst), b = index.at(c.dst_inst);
    if (registered[a] || registered[b]) continue;
    succ[a].push_back(b);
  }

  // Tarjan SCC, iterative
  std::vector<int> comp(n, -1), low(n), disc(n, -1);
  std::vector<size_t> stack;
  std::vector<bool> on_stack(n, false);
  int time = 0, ncomp = 0;
  struct Frame {
    size_t v;
    size_t next = 0;
  };
  for (size_t root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    std::vector<Frame> frames{{root}};
    disc[root] = low[root] = time++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < succ[f.v].size()) {
        size_t w = succ[f.v][f.next++];
        if (disc[w] == -1) {
          disc[w] = low[w] = time++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        if (low[f.v] == disc[f.v]) {
          while (true) {
            size_t w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = ncomp;
            if (w == f.v) break;
          }
          ++ncomp;
        }
        size_t v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }

  // a component holds a cycle iff it has an internal edge
  std::vector<bool> cyclic(static_cast<size_t>(ncomp), false);
  for (size_t v = 0; v < n; ++v)
    for (size_t w : succ[v])
      if (comp[v] == comp[w]) cyclic[static_cast<size_t>(comp[v])] = true;

  std::vector<std::string> findings;
  for (int c = 0; c < ncomp; ++c) {
    if (!cyclic[static_cast<size_t>(c)]) continue;
    // shortest cycle through the smallest member, by BFS within the component
    size_t start = n;
    for (size_t v = 0; v < n; ++v)
      if (comp[v] == c) {
        start = v;
        break;
      }
    std::vector<size_t> prev(n, n);
    std::deque<size_t> bfs;
    for (size_t w : succ[start])
      if (comp[w] == c && prev[w] == n) {
        prev[w] = start;
        bfs.push_back(w);
      }
    std::vector<size_t> cycle;
    if (prev[start] != n) {
      cycle = {start, start}; // immediate self-loop
    } else {
      while (!bfs.empty()) {
        size_t v = bfs.front();
        bfs.pop_front();
        if (v == start) break;
        for (size_t w : succ[v])
          if (comp[w] == c && prev[w] == n) {
            prev[w] = v;
            bfs.push_back(w);
          }
      }
      for (size_t v = start; cycle.empty() || v != start; v = prev[v]) cycle.push_back(v);
      cycle.push_back(start);
      std::reverse(cycle.begin(), cycle.end());
    }
    std::string text = "zero-storage cycle: ";
    for (size_t i = 0; i < cycle.size(); ++i) {
      if (i) text += " -> ";
      text += sys.instances[cycle[i]].name;
    }
    text += " (insert a FIFO of depth >= 1 or a registered stage)";
    findings.push_back(std::move(text));
  }
  return findings;
}

// ---- host bridge ----

// Channel regions are laid out in name order from byte 0, each aligned to
// 16 bytes: ceil(W/32) data words, one status word, one control word. Tap
// regions follow, three read-only words each.
inline HostBridgeMap synth_host_bridge(AssembledSystem& sys,
                                       const std::vector<std::string>& exposed) {
  HostBridgeMap map;
  std::vector<std::string> names = exposed;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());

  uint32_t base = 0;
  auto align16 = [](uint32_t b) { return (b + 15u) & ~15u; };
  for (const std::string& name : names) {
    const ExportedPort* e = nullptr;
    for (const auto& x : sys.exports)
      if (x.name == name) e = &x;
    if (!e) {
      for (const auto& c : sys.channels)
        if (c.name == name)
          throw Error("channel '" + name + "' is connected; only exported channels face the host");
      throw Error("no exported channel named '" + name + "'");
    }
    BridgeChannel bc;
    bc.name = e->name;
    bc.dir = e->dir;
    bc.type = e->type;
    bc.data_words = static_cast<uint32_t>((bit_width(e->type) + 31) / 32);
    bc.words = bc.data_words + 2;
    bc.base = base;
    map.channels.push_back(bc);
    base = align16(base + bc.words * 4);
  }
  std::vector<std::string> taps = sys.taps;
  std::sort(taps.begin(), taps.end());
  for (const std::string& t : taps) {
    BridgeTap bt;
    bt.channel = t;
    bt.base = base;
    map.taps.push_back(bt);
    base = align16(base + bt.words * 4);
  }
  sys.bridge = map;
  return map;
}

inline void insert_perf_taps(AssembledSystem& sys, const std::vector<std::string>& channels) {
  for (const std::string& name : channels) {
    bool known = false;
    for (const auto& c : sys.channels) known = known || c.name == name;
    for (const auto& e : sys.exports) known = known || e.name == name;
    if (!known) throw Error("no channel named '" + name + "'");
    if (std::find(sys.taps.begin(), sys.taps.end(), name) == sys.taps.end())
      sys.taps.push_back(name);
  }
}

// ---- partitioning ----

struct PartitionSpec {
  uint32_t k = 1;
  std::vector<double> capacities; // one per partition
  uint64_t seed = 0;
};

struct PartitionResult {
  std::map<std::string, uint32_t> assignment;
  uint64_t cut_cost = 0;
  std::string method; // "exact" | "heuristic"
};

namespace sysdetail {

inline std::string fmt_area(double v) {
  std::string s = std::to_string(v);
  size_t dot = s.find('.');
  if (dot != std::string::npos) {
    size_t last = s.find_last_not_of('0');
    s.erase(std::max(last, dot + 1) + 1);
  }
  return s;
}

struct PartitionProblem {
  std::vector<std::string> names; // sorted
  std::vector<double> areas;
  struct Edge {
    size_t a, b;
    uint64_t w;
  };
  std::vector<Edge> edges;
};

inline uint64_t cut_of(const PartitionProblem& p, const std::vector<uint32_t>& part) {
  uint64_t cut = 0;
  for (const auto& e : p.edges)
    if (part[e.a] != part[e.b]) cut += e.w;
  return cut;
}

inline bool fits(const PartitionProblem& p, const std::vector<uint32_t>& part,
                 const std::vector<double>& caps) {
  std::vector<double> load(caps.size(), 0.0);
  for (size_t i = 0; i < part.size(); ++i) {
    load[part[i]] += p.areas[i];
    if (load[part[i]] > caps[part[i]] + 1e-9) return false;
  }
  return true;
}

// branch and bound over instances in decreasing area order; empty
// partitions of equal capacity are interchangeable and tried once
inline bool exact_partition(const PartitionProblem& p, const std::vector<double>& caps,
                            std::vector<uint32_t>& best, uint64_t& best_cut) {
  size_t n = p.names.size(), k = caps.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return p.areas[a] > p.areas[b]; });
  std::vector<std::vector<std::pair<size_t, uint64_t>>> adj(n);
  for (const auto& e : p.edges) {
    adj[e.a].push_back({e.b, e.w});
    adj[e.b].push_back({e.a, e.w});
  }
  std::vector<uint32_t> part(n, UINT32_MAX);
  std::vector<double> load(k, 0.0);
  bool found = false;
  best_cut = UINT64_MAX;

  auto rec = [&](auto&& self, size_t depth, uint64_t cut) -> void {
    if (cut >= best_cut) return;
    if (depth == n) {
      best = part;
      best_cut = cut;
      found = true;
      return;
    }
    size_t v = order[depth];
    std::vector<bool> tried_empty_cap(k, false);
    for (uint32_t q = 0; q < k; ++q) {
      if (load[q] + p.areas[v] > caps[q] + 1e-9) continue;
      if (load[q] == 0.0) {
        bool dup = false;
        for (uint32_t r = 0; r < q; ++r)
          if (load[r] == 0.0 && caps[r] == caps[q]) dup = true;
        if (dup) continue;
      }
      uint64_t added = 0;
      for (auto [w, weight] : adj[v])
        if (part[w] != UINT32_MAX && part[w] != q) added += weight;
      part[v] = q;
      load[q] += p.areas[v];
      self(self, depth + 1, cut + added);
      load[q] -= p.areas[v];
      part[v] = UINT32_MAX;
    }
  };
  rec(rec, 0, 0);
  return found;
}

// one Kernighan-Lin-style pass: apply the best feasible single move for
// each unlocked instance in turn (gains may go negative), then keep the
// best prefix
inline bool kl_pass(const PartitionProblem& p, const std::vector<double>& caps,
                    std::vector<uint32_t>& part) {
  size_t n = p.names.size(), k = caps.size();
  std::vector<std::vector<std::pair<size_t, uint64_t>>> adj(n);
  for (const auto& e : p.edges) {
    adj[e.a].push_back({e.b, e.w});
    adj[e.b].push_back({e.a, e.w});
  }
  std::vector<double> load(k, 0.0);
  for (size_t i = 0; i < n; ++i) load[part[i]] += p.areas[i];

  std::vector<bool> locked(n, false);
  std::vector<uint32_t> work = part;
  uint64_t cost = cut_of(p, work);
  uint64_t best_cost = cost;
  std::vector<uint32_t> best = work;

  for (size_t step = 0; step < n; ++step) {
    int64_t best_gain = INT64_MIN;
    size_t best_v = n;
    uint32_t best_q = 0;
    for (size_t v = 0; v < n; ++v) {
      if (locked[v]) continue;
      // external weight per partition for v
      std::vector<uint64_t> ext(k, 0);
      for (auto [w, weight] : adj[v]) ext[work[w]] += weight;
      for (uint32_t q = 0; q < k; ++q) {
        if (q == work[v]) continue;
        if (load[q] + p.areas[v] > caps[q] + 1e-9) continue;
        int64_t gain = static_cast<int64_t>(ext[q]) - static_cast<int64_t>(ext[work[v]]);
        if (gain > best_gain) {
          best_gain = gain;
          best_v = v;
          best_q = q;
        }
      }
    }
    if (best_v == n) break;
    load[work[best_v]] -= p.areas[best_v];
    load[best_q] += p.areas[best_v];
    cost = static_cast<uint64_t>(static_cast<int64_t>(cost) - best_gain);
    work[best_v] = best_q;
    locked[best_v] = true;
    if (cost < best_cost) {
      best_cost = cost;
      best = work;
    }
  }
  bool improved = best_cost < cut_of(p, part);
  part = best;
  return improved;
}

inline bool greedy_seed(const PartitionProblem& p, const std::vector<double>& caps,
                        const std::vector<size_t>& order, std::vector<uint32_t>& part) {
  size_t n = p.names.size(), k = caps.size();
  std::vector<std::vector<std::pair<size_t, uint64_t>>> adj(n);
  for (const auto& e : p.edges) {
    adj[e.a].push_back({e.b, e.w});
    adj[e.b].push_back({e.a, e.w});
  }
  part.assign(n, UINT32_MAX);
  std::vector<double> load(k, 0.0);
  for (size_t v : order) {
    int64_t best_score = INT64_MIN;
    uint32_t best_q = UINT32_MAX;
    for (uint32_t q = 0; q < k; ++q) {
      if (load[q] + p.areas[v] > caps[q] + 1e-9) continue;
      uint64_t attached = 0;
      for (auto [w, weight] : adj[v])
        if (part[w] == q) attached += weight;
      // prefer the partition already holding neighbors, then headroom
      int64_t score = static_cast<int64_t>(attached) * 4096 +
                      static_cast<int64_t>((caps[q] - load[q]) * 16.0);
      if (score > best_score) {
        best_score = score;
        best_q = q;
      }
    }
    if (best_q == UINT32_MAX) return false;
    part[v] = best_q;
    load[best_q] += p.areas[v];
  }
  return true;
}

} // namespace sysdetail

inline constexpr size_t kExactPartitionLimit = 12;

// Cut cost is the summed bit width of connections whose endpoints land in
// different partitions. Exhaustive search up to kExactPartitionLimit
// instances, seeded greedy + Kernighan-Lin refinement above it.
inline PartitionResult partition(const SystemDesign& d,
                                 const std::map<std::string, Package>& packages,
                                 const PartitionSpec& spec) {
  if (spec.k == 0) throw Error("partition count must be >= 1");
  if (spec.capacities.size() != spec.k)
    throw Error("expected " + std::to_string(spec.k) + " capacities, got " +
                std::to_string(spec.capacities.size()));
  for (double c : spec.capacities)
    if (c < 0.0) throw Error("capacities must be nonnegative");

  sysdetail::PartitionProblem prob;
  std::map<std::string, size_t> index;
  double total_area = 0.0;
  for (const auto& [name, inst] : d.instances) {
    auto it = packages.find(inst.package);
    if (it == packages.end())
      throw Error("instance '" + name + "' references unknown package '" + inst.package + "'");
    index[name] = prob.names.size();
    prob.names.push_back(name);
    prob.areas.push_back(it->second.area);
    total_area += it->second.area;
  }
  double total_cap = 0.0;
  for (double c : spec.capacities) total_cap += c;
  if (total_area > total_cap + 1e-9)
    throw Error("infeasible: total area " + sysdetail::fmt_area(total_area) +
                " exceeds total capacity " + sysdetail::fmt_area(total_cap));

  for (const auto& c : d.connections) {
    auto a = index.find(c.src_inst), b = index.find(c.dst_inst);
    if (a == index.end()) throw Error("connection names unknown instance '" + c.src_inst + "'");
    if (b == index.end()) throw Error("connection names unknown instance '" + c.dst_inst + "'");
    const Module& m = packages.at(d.instances.at(c.src_inst).package).module;
    const Port* p = m.find_port(c.src_port);
    if (!p) throw Error("connection names unknown port '" + c.src_inst + "." + c.src_port + "'");
    prob.edges.push_back({a->second, b->second, bit_width(p->type)});
  }

  PartitionResult res;
  std::vector<uint32_t> part;
  if (prob.names.size() <= kExactPartitionLimit) {
    uint64_t best_cut = 0;
    if (!sysdetail::exact_partition(prob, spec.capacities, part, best_cut))
      throw Error("infeasible: no assignment satisfies the capacities");
    res.cut_cost = best_cut;
    res.method = "exact";
  } else {
    bool found = false;
    uint64_t best_cut = UINT64_MAX;
    std::vector<uint32_t> best;
    for (uint64_t restart = 0; restart < 8; ++restart) {
      Prng rng(Prng::mix(spec.seed, restart));
      std::vector<size_t> order(prob.names.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      if (restart == 0) {
        // deterministic first try: decreasing area
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return prob.areas[a] > prob.areas[b]; });
      } else {
        for (size_t i = order.size(); i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);
      }
      std::vector<uint32_t> cand;
      if (!sysdetail::greedy_seed(prob, spec.capacities, order, cand)) continue;
      while (sysdetail::kl_pass(prob, spec.capacities, cand)) {
      }
      uint64_t cut = sysdetail::cut_of(prob, cand);
      if (!found || cut < best_cut) {
        found = true;
        best_cut = cut;
        best = cand;
      }
    }
    if (!found) throw Error("infeasible: no assignment satisfies the capacities");
    part = best;
    res.cut_cost = best_cut;
    res.method = "heuristic";
  }
  for (size_t i = 0; i < prob.names.size(); ++i) res.assignment[prob.names[i]] = part[i];
  return res;
}

// ---- system simulation ----

// Value-domain model of an assembled system on one simulated clock: CDC
// FIFOs behave as synchronous FIFOs of their depth. Channel counters and
// tokens are sampled at the source-side handshake.
inline Trace simulate(const AssembledSystem& sys, const Stimulus& stim) {
  struct Core {
    std::string name;
    // heap-held so the core's internal pointer survives vector growth
    std::unique_ptr<PipelinedNetlist> netlist;
    std::unique_ptr<NetlistCore> core;
    std::map<std::string, size_t> in_idx, out_idx;
  };
  std::vector<Core> cores;
  std::map<std::string, size_t> core_of;
  for (const auto& inst : sys.instances) {
    const Module& m = sys.module_of(inst);
    Core c;
    c.name = inst.name;
    if (m.is_extern()) {
      const ExternBody& e = m.extern_body();
      if (!e.model)
        throw Error("extern instance '" + inst.name + "' (module '" + m.name +
                    "') has no behavioral model");
      Module shadow{m.name, m.ports, *e.model};
      c.netlist = std::make_unique<PipelinedNetlist>(pipeline(shadow));
    } else {
      c.netlist = std::make_unique<PipelinedNetlist>(pipeline(m));
    }
    c.core = std::make_unique<NetlistCore>(*c.netlist);
    for (size_t i = 0; i < c.core->num_inputs(); ++i) c.in_idx[c.core->input_port(i).name] = i;
    for (size_t o = 0; o < c.core->num_outputs(); ++o) c.out_idx[c.core->output_port(o).name] = o;
    core_of[inst.name] = cores.size();
    cores.push_back(std::move(c));
  }

  // stimulus names must refer to exported channels
  for (const auto& [name, _] : stim.inputs) {
    bool ok = false;
    for (const auto& e : sys.exports) ok = ok || (e.name == name && e.dir == Direction::In);
    if (!ok) throw Error("stimulus names unknown input '" + name + "'");
  }
  for (const auto& [name, _] : stim.sources) {
    bool ok = false;
    for (const auto& e : sys.exports) ok = ok || (e.name == name && e.dir == Direction::In);
    if (!ok) throw Error("stimulus names unknown input '" + name + "'");
  }
  for (const auto& [name, _] : stim.sinks) {
    bool ok = false;
    for (const auto& e : sys.exports) ok = ok || (e.name == name && e.dir == Direction::Out);
    if (!ok) throw Error("stimulus names unknown output '" + name + "'");
  }

  struct Source {
    size_t exp;
    std::deque<Value> queue;
    bool holding = false;
    Prng rng{0};
    double p = 1.0;
  };
  struct Sink {
    size_t exp;
    Prng rng{0};
    double p = 1.0;
    bool ready = false;
  };
  std::vector<Source> sources;
  std::vector<Sink> sinks;
  for (size_t e = 0; e < sys.exports.size(); ++e) {
    const auto& x = sys.exports[e];
    if (x.dir == Direction::In) {
      Source s;
      s.exp = e;
      auto it = stim.inputs.find(x.name);
      if (it != stim.inputs.end())
        for (const Value& v : it->second) {
          check_value(v, x.type);
          s.queue.push_back(v);
        }
      s.rng = Prng(Prng::mix(stim.seed, e));
      s.p = detail::policy_p(stim.sources, x.name);
      sources.push_back(std::move(s));
    } else {
      Sink s;
      s.exp = e;
      s.rng = Prng(Prng::mix(stim.seed, e));
      s.p = detail::policy_p(stim.sinks, x.name);
      sinks.push_back(std::move(s));
    }
  }

  struct Fifo {
    std::deque<Value> q;
    uint32_t depth = 0;
  };
  std::vector<Fifo> fifos(sys.channels.size());
  for (size_t c = 0; c < sys.channels.size(); ++c) fifos[c].depth = sys.channels[c].depth;

  // who feeds each instance input / drains each instance output
  struct InFeed {
    enum Kind { FromWire, FromFifo, FromSource } kind;
    size_t idx; // channel or source index
  };
  struct OutDrain {
    enum Kind { ToWire, ToFifo, ToSink } kind;
    size_t idx; // channel or sink index
  };
  std::map<std::pair<std::string, std::string>, InFeed> feeds;
  std::map<std::pair<std::string, std::string>, OutDrain> drains;
  for (size_t c = 0; c < sys.channels.size(); ++c) {
    const Channel& ch = sys.channels[c];
    bool buffered = ch.depth > 0;
    feeds[{ch.dst_inst, ch.dst_port}] = {buffered ? InFeed::FromFifo : InFeed::FromWire, c};
    drains[{ch.src_inst, ch.src_port}] = {buffered ? OutDrain::ToFifo : OutDrain::ToWire, c};
  }
  for (size_t s = 0; s < sources.size(); ++s) {
    const auto& x = sys.exports[sources[s].exp];
    feeds[{x.inst, x.port}] = {InFeed::FromSource, s};
  }
  for (size_t s = 0; s < sinks.size(); ++s) {
    const auto& x = sys.exports[sinks[s].exp];
    drains[{x.inst, x.port}] = {OutDrain::ToSink, s};
  }

  Trace trace;
  trace.cycles = stim.cycles;
  for (const auto& ch : sys.channels) trace.channels[ch.name];
  for (const auto& e : sys.exports) trace.channels[e.name];
  std::map<std::string, std::pair<bool, Value>> pending; // held offer per channel

  for (uint64_t cycle = 0; cycle < stim.cycles; ++cycle) {
    // phase 1a: sources decide, sinks draw, registered valids/data settle
    for (auto& s : sources) {
      if (!s.holding && !s.queue.empty() && s.rng.chance(s.p)) s.holding = true;
    }
    for (auto& s : sinks) s.ready = s.rng.chance(s.p);

    for (auto& c : cores)
      for (size_t i = 0; i < c.core->num_inputs(); ++i) {
        const std::string& port = c.core->input_port(i).name;
        const InFeed& f = feeds.at({c.name, port});
        bool valid = false;
        Value data;
        if (f.kind == InFeed::FromSource) {
          Source& s = sources[f.idx];
          valid = s.holding;
          if (valid) data = s.queue.front();
        } else if (f.kind == InFeed::FromFifo) {
          Fifo& q = fifos[f.idx];
          valid = !q.q.empty();
          if (valid) data = q.q.front();
        } else {
          const Channel& ch = sys.channels[f.idx];
          Core& src = cores[core_of.at(ch.src_inst)];
          size_t o = src.out_idx.at(ch.src_port);
          valid = src.core->output_valid(o);
          if (valid) data = src.core->output_data(o);
        }
        c.core->set_input(i, valid, data);
      }

    // phase 1b: readies settle to the greatest fixpoint; each instance
    // output's ready comes from its drain, wires forward the sink
    // instance's input_ready
    auto drain_ready = [&](const Core& c, size_t o) -> bool {
      const std::string& port = c.core->output_port(o).name;
      const OutDrain& d = drains.at({c.name, port});
      if (d.kind == OutDrain::ToSink) return sinks[d.idx].ready;
      if (d.kind == OutDrain::ToFifo) return fifos[d.idx].q.size() < fifos[d.idx].depth;
      const Channel& ch = sys.channels[d.idx];
      Core& dst = cores[core_of.at(ch.dst_inst)];
      return dst.core->input_ready(dst.in_idx.at(ch.dst_port));
    };
    for (auto& c : cores)
      for (size_t o = 0; o < c.core->num_outputs(); ++o) c.core->set_output_ready(o, true);
    for (size_t iter = 0; iter <= sys.channels.size() + 1; ++iter) {
      bool changed = false;
      for (auto& c : cores)
        for (size_t o = 0; o < c.core->num_outputs(); ++o) {
          bool r = drain_ready(c, o);
          if (r != c.core->output_ready(o)) {
            c.core->set_output_ready(o, r);
            changed = true;
          }
        }
      if (!changed) break;
    }

    // phase 2: observe handshakes, then commit registers. Snapshot each
    // fifo's offer first; same-cycle pushes must not be consumable.
    std::vector<bool> offered(fifos.size());
    for (size_t ci = 0; ci < fifos.size(); ++ci) offered[ci] = !fifos[ci].q.empty();

    auto bump = [&](const std::string& channel, bool valid, bool ready, const Value& data) {
      ChannelTrace& t = trace.channels.at(channel);
      auto& held = pending[channel];
      if (held.first && valid && !(data == held.second))
        throw Error("handshake violation on '" + channel + "': data changed while stalled");
      if (held.first && !valid)
        throw Error("handshake violation on '" + channel + "': valid dropped before accept");
      if (!valid) {
        ++t.idle_cycles;
      } else if (!ready) {
        ++t.stall_cycles;
        held = {true, data};
      } else {
        ++t.transfers;
        t.tokens.push_back(data);
        t.cycles.push_back(cycle);
        held = {false, Value()};
      }
    };

    for (auto& c : cores)
      for (size_t o = 0; o < c.core->num_outputs(); ++o) {
        const std::string& port = c.core->output_port(o).name;
        const OutDrain& d = drains.at({c.name, port});
        bool valid = c.core->output_valid(o);
        bool ready = c.core->output_ready(o);
        Value data = valid ? c.core->output_data(o) : Value();
        if (d.kind == OutDrain::ToSink) {
          bump(sys.exports[sinks[d.idx].exp].name, valid, ready, data);
        } else {
          bump(sys.channels[d.idx].name, valid, ready, data);
          if (d.kind == OutDrain::ToFifo && valid && ready) fifos[d.idx].q.push_back(data);
        }
      }
    for (auto& s : sources) {
      const auto& x = sys.exports[s.exp];
      Core& c = cores[core_of.at(x.inst)];
      size_t i = c.in_idx.at(x.port);
      bool ready = c.core->input_ready(i);
      bool valid = s.holding;
      Value data = valid ? s.queue.front() : Value();
      bump(x.name, valid, ready, data);
      if (valid && ready) {
        s.queue.pop_front();
        s.holding = false;
      }
    }
    for (size_t ci = 0; ci < sys.channels.size(); ++ci) {
      Fifo& q = fifos[ci];
      if (q.depth == 0 || !offered[ci]) continue;
      const Channel& ch = sys.channels[ci];
      Core& dst = cores[core_of.at(ch.dst_inst)];
      if (dst.core->input_ready(dst.in_idx.at(ch.dst_port))) q.q.pop_front();
    }
    for (auto& c : cores) c.core->step();
  }
  return trace;
}

// ---- JSON forms ----

namespace sysdetail {

inline std::pair<std::string, std::string> split_endpoint(const std::string& text,
                                                          const std::string& path) {
  size_t dot = text.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= text.size())
    throw SchemaError(path, "expected '<instance>.<port>', found '" + text + "'");
  return {text.substr(0, dot), text.substr(dot + 1)};
}

} // namespace sysdetail

inline Json system_to_json(const SystemDesign& d) {
  Json j = make_doc("system");
  j["name"] = d.name;
  Json insts = Json::object();
  for (const auto& [name, inst] : d.instances) {
    Json ij = Json::object();
    ij["package"] = inst.package;
    if (!inst.clock_domain.empty()) ij["clock_domain"] = inst.clock_domain;
    insts[name] = std::move(ij);
  }
  j["instances"] = std::move(insts);
  Json conns = Json::array();
  for (const auto& c : d.connections) {
    Json cj = Json::object();
    cj["from"] = c.src_inst + "." + c.src_port;
    cj["to"] = c.dst_inst + "." + c.dst_port;
    cj["fifo_depth"] = c.fifo_depth;
    conns.push_back(std::move(cj));
  }
  j["connections"] = std::move(conns);
  Json exps = Json::array();
  for (const auto& e : d.exports) {
    Json ej = Json::object();
    ej["port"] = e.inst + "." + e.port;
    if (!e.as.empty()) ej["as"] = e.as;
    exps.push_back(std::move(ej));
  }
  j["exports"] = std::move(exps);
  return j;
}

inline SystemDesign system_from_json(const Json& j) {
  check_doc(j, "system");
  jdetail::only_keys(j, {"llpm_schema", "kind", "name", "instances", "connections", "exports"},
                     "$");
  SystemDesign d;
  d.name = jdetail::get_string(j, "name", "$");
  if (!jdetail::is_identifier(d.name))
    throw SchemaError("$.name", "'" + d.name + "' is not an identifier");
  const Json& insts = jdetail::field(j, "instances", "$");
  if (!insts.is_object()) throw SchemaError("$.instances", "expected an object");
  for (const auto& [name, ij] : insts.items()) {
    std::string path = "$.instances." + name;
    if (!jdetail::is_identifier(name))
      throw SchemaError(path, "instance name is not an identifier");
    jdetail::only_keys(ij, {"package", "clock_domain"}, path);
    SystemDesign::Instance inst;
    inst.package = jdetail::get_string(ij, "package", path);
    inst.clock_domain = jdetail::get_string_or(ij, "clock_domain", path, "");
    d.instances[name] = std::move(inst);
  }
  if (j.contains("connections")) {
    const Json& conns = j.at("connections");
    if (!conns.is_array()) throw SchemaError("$.connections", "expected an array");
    for (size_t i = 0; i < conns.size(); ++i) {
      std::string path = "$.connections[" + std::to_string(i) + "]";
      jdetail::only_keys(conns[i], {"from", "to", "fifo_depth"}, path);
      SystemDesign::Connection c;
      auto [si, sp] =
          sysdetail::split_endpoint(jdetail::get_string(conns[i], "from", path), path + ".from");
      auto [di, dp] =
          sysdetail::split_endpoint(jdetail::get_string(conns[i], "to", path), path + ".to");
      c.src_inst = si;
      c.src_port = sp;
      c.dst_inst = di;
      c.dst_port = dp;
      if (conns[i].contains("fifo_depth"))
        c.fifo_depth = static_cast<uint32_t>(jdetail::get_uint(conns[i], "fifo_depth", path));
      d.connections.push_back(std::move(c));
    }
  }
  if (j.contains("exports")) {
    const Json& exps = j.at("exports");
    if (!exps.is_array()) throw SchemaError("$.exports", "expected an array");
    for (size_t i = 0; i < exps.size(); ++i) {
      std::string path = "$.exports[" + std::to_string(i) + "]";
      jdetail::only_keys(exps[i], {"port", "as"}, path);
      SystemDesign::Export e;
      auto [inst, port] =
          sysdetail::split_endpoint(jdetail::get_string(exps[i], "port", path), path + ".port");
      e.inst = inst;
      e.port = port;
      e.as = jdetail::get_string_or(exps[i], "as", path, "");
      d.exports.push_back(std::move(e));
    }
  }
  return d;
}

inline Json bridge_to_json(const HostBridgeMap& m) {
  Json j = make_doc("apimap");
  j["word_size"] = m.word_size;
  Json chans = Json::array();
  for (const auto& c : m.channels) {
    Json cj = Json::object();
    cj["name"] = c.name;
    cj["dir"] = c.dir == Direction::In ? "in" : "out";
    cj["type"] = print_type(c.type);
    cj["base"] = c.base;
    cj["data_words"] = c.data_words;
    cj["words"] = c.words;
    chans.push_back(std::move(cj));
  }
  j["channels"] = std::move(chans);
  Json taps = Json::array();
  for (const auto& t : m.taps) {
    Json tj = Json::object();
    tj["channel"] = t.channel;
    tj["base"] = t.base;
    tj["words"] = t.words;
    taps.push_back(std::move(tj));
  }
  j["taps"] = std::move(taps);
  return j;
}

inline HostBridgeMap bridge_from_json(const Json& j) {
  check_doc(j, "apimap");
  jdetail::only_keys(j, {"llpm_schema", "kind", "word_size", "channels", "taps"}, "$");
  HostBridgeMap m;
  m.word_size = static_cast<uint32_t>(jdetail::get_uint(j, "word_size", "$"));
  if (m.word_size != 32) throw SchemaError("$.word_size", "word size must be 32");
  const Json& chans = jdetail::field(j, "channels", "$");
  if (!chans.is_array()) throw SchemaError("$.channels", "expected an array");
  for (size_t i = 0; i < chans.size(); ++i) {
    std::string path = "$.channels[" + std::to_string(i) + "]";
    jdetail::only_keys(chans[i], {"name", "dir", "type", "base", "data_words", "words"}, path);
    BridgeChannel c;
    c.name = jdetail::get_string(chans[i], "name", path);
    std::string dir = jdetail::get_string(chans[i], "dir", path);
    if (dir != "in" && dir != "out") throw SchemaError(path + ".dir", "expected 'in' or 'out'");
    c.dir = dir == "in" ? Direction::In : Direction::Out;
    c.type = jdetail::get_type(chans[i], "type", path);
    c.base = static_cast<uint32_t>(jdetail::get_uint(chans[i], "base", path));
    c.data_words = static_cast<uint32_t>(jdetail::get_uint(chans[i], "data_words", path));
    c.words = static_cast<uint32_t>(jdetail::get_uint(chans[i], "words", path));
    m.channels.push_back(std::move(c));
  }
  if (j.contains("taps")) {
    const Json& taps = j.at("taps");
    if (!taps.is_array()) throw SchemaError("$.taps", "expected an array");
    for (size_t i = 0; i < taps.size(); ++i) {
      std::string path = "$.taps[" + std::to_string(i) + "]";
      jdetail::only_keys(taps[i], {"channel", "base", "words"}, path);
      BridgeTap t;
      t.channel = jdetail::get_string(taps[i], "channel", path);
      t.base = static_cast<uint32_t>(jdetail::get_uint(taps[i], "base", path));
      t.words = static_cast<uint32_t>(jdetail::get_uint(taps[i], "words", path));
      m.taps.push_back(std::move(t));
    }
  }
  return m;
}

inline Json assembled_to_json(const AssembledSystem& sys) {
  Json j = make_doc("assembled");
  j["name"] = sys.name;
  Json pkgs = Json::object();
  for (const auto& [key, p] : sys.packages) pkgs[key] = package_to_json(p);
  j["packages"] = std::move(pkgs);
  Json insts = Json::array();
  for (const auto& i : sys.instances) {
    Json ij = Json::object();
    ij["name"] = i.name;
    ij["package"] = i.package;
    ij["clock_domain"] = i.clock_domain;
    insts.push_back(std::move(ij));
  }
  j["instances"] = std::move(insts);
  Json chans = Json::array();
  for (const auto& c : sys.channels) {
    Json cj = Json::object();
    cj["name"] = c.name;
    cj["src"] = c.src_inst + "." + c.src_port;
    cj["dst"] = c.dst_inst + "." + c.dst_port;
    cj["type"] = print_type(c.type);
    cj["depth"] = c.depth;
    cj["cdc"] = c.cdc;
    chans.push_back(std::move(cj));
  }
  j["channels"] = std::move(chans);
  Json exps = Json::array();
  for (const auto& e : sys.exports) {
    Json ej = Json::object();
    ej["name"] = e.name;
    ej["port"] = e.inst + "." + e.port;
    ej["dir"] = e.dir == Direction::In ? "in" : "out";
    ej["type"] = print_type(e.type);
    exps.push_back(std::move(ej));
  }
  j["exports"] = std::move(exps);
  j["taps"] = sys.taps;
  if (sys.bridge) j["bridge"] = bridge_to_json(*sys.bridge);
  j["report"] = sys.report;
  return j;
}

inline AssembledSystem assembled_from_json(const Json& j) {
  check_doc(j, "assembled");
  jdetail::only_keys(j,
                     {"llpm_schema", "kind", "name", "packages", "instances", "channels",
                      "exports", "taps", "bridge", "report"},
                     "$");
  AssembledSystem sys;
  sys.name = jdetail::get_string(j, "name", "$");
  const Json& pkgs = jdetail::field(j, "packages", "$");
  if (!pkgs.is_object()) throw SchemaError("$.packages", "expected an object");
  for (const auto& [key, pj] : pkgs.items()) {
    try {
      sys.packages.emplace(key, package_from_json(pj));
    } catch (const SchemaError& e) {
      throw SchemaError("$.packages." + key, e.what());
    }
  }
  const Json& insts = jdetail::field(j, "instances", "$");
  if (!insts.is_array()) throw SchemaError("$.instances", "expected an array");
  for (size_t i = 0; i < insts.size(); ++i) {
    std::string path = "$.instances[" + std::to_string(i) + "]";
    jdetail::only_keys(insts[i], {"name", "package", "clock_domain"}, path);
    ResolvedInstance r;
    r.name = jdetail::get_string(insts[i], "name", path);
    r.package = jdetail::get_string(insts[i], "package", path);
    r.clock_domain = jdetail::get_string(insts[i], "clock_domain", path);
    if (!sys.packages.count(r.package))
      throw SchemaError(path + ".package", "unknown package '" + r.package + "'");
    sys.instances.push_back(std::move(r));
  }
  const Json& chans = jdetail::field(j, "channels", "$");
  if (!chans.is_array()) throw SchemaError("$.channels", "expected an array");
  for (size_t i = 0; i < chans.size(); ++i) {
    std::string path = "$.channels[" + std::to_string(i) + "]";
    jdetail::only_keys(chans[i], {"name", "src", "dst", "type", "depth", "cdc"}, path);
    Channel c;
    c.name = jdetail::get_string(chans[i], "name", path);
    auto [si, sp] =
        sysdetail::split_endpoint(jdetail::get_string(chans[i], "src", path), path + ".src");
    auto [di, dp] =
        sysdetail::split_endpoint(jdetail::get_string(chans[i], "dst", path), path + ".dst");
    c.src_inst = si;
    c.src_port = sp;
    c.dst_inst = di;
    c.dst_port = dp;
    c.type = jdetail::get_type(chans[i], "type", path);
    c.depth = static_cast<uint32_t>(jdetail::get_uint(chans[i], "depth", path));
    c.cdc = jdetail::get_bool_or(chans[i], "cdc", path, false);
    const ResolvedInstance* src = sys.find_instance(c.src_inst);
    if (!src) throw SchemaError(path + ".src", "unknown instance '" + c.src_inst + "'");
    const Port* p = sys.module_of(*src).find_port(c.src_port);
    if (!p || p->type != c.type)
      throw SchemaError(path + ".type", "does not match the source port's type");
    sys.channels.push_back(std::move(c));
  }
  if (j.contains("exports")) {
    const Json& exps = j.at("exports");
    if (!exps.is_array()) throw SchemaError("$.exports", "expected an array");
    for (size_t i = 0; i < exps.size(); ++i) {
      std::string path = "$.exports[" + std::to_string(i) + "]";
      jdetail::only_keys(exps[i], {"name", "port", "dir", "type"}, path);
      ExportedPort e;
      e.name = jdetail::get_string(exps[i], "name", path);
      auto [inst, port] =
          sysdetail::split_endpoint(jdetail::get_string(exps[i], "port", path), path + ".port");
      e.inst = inst;
      e.port = port;
      std::string dir = jdetail::get_string(exps[i], "dir", path);
      if (dir != "in" && dir != "out") throw SchemaError(path + ".dir", "expected 'in' or 'out'");
      e.dir = dir == "in" ? Direction::In : Direction::Out;
      e.type = jdetail::get_type(exps[i], "type", path);
      sys.exports.push_back(std::move(e));
    }
  }
  if (j.contains("taps")) {
    const Json& taps = j.at("taps");
    if (!taps.is_array()) throw SchemaError("$.taps", "expected an array");
    for (size_t i = 0; i < taps.size(); ++i) {
      if (!taps[i].is_string())
        throw SchemaError("$.taps[" + std::to_string(i) + "]", "expected a string");
      sys.taps.push_back(taps[i].get<std::string>());
    }
  }
  if (j.contains("bridge")) sys.bridge = bridge_from_json(j.at("bridge"));
  if (j.contains("report")) {
    const Json& rep = j.at("report");
    if (!rep.is_array()) throw SchemaError("$.report", "expected an array");
    for (const auto& line : rep) {
      if (!line.is_string()) throw SchemaError("$.report", "expected strings");
      sys.report.push_back(line.get<std::string>());
    }
  }
  return sys;
}

inline Json partition_to_json(const PartitionResult& r, const PartitionSpec& spec) {
  Json j = make_doc("partition");
  j["method"] = r.method;
  j["cut_cost"] = r.cut_cost;
  j["k"] = spec.k;
  j["capacities"] = spec.capacities;
  Json asg = Json::object();
  for (const auto& [name, p] : r.assignment) asg[name] = p;
  j["assignment"] = std::move(asg);
  return j;
}

// A system file plus every package it references, loaded relative to the
// system file's directory.
struct LoadedSystem {
  SystemDesign design;
  std::map<std::string, Package> packages;
};

inline LoadedSystem load_system(const std::string& path) {
  LoadedSystem ls;
  ls.design = system_from_json(read_json_file(path));
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (const auto& [name, inst] : ls.design.instances) {
    if (ls.packages.count(inst.package)) continue;
    std::filesystem::path p = inst.package;
    if (p.is_relative()) p = base / p;
    ls.packages.emplace(inst.package, load_package(p.string()));
  }
  return ls;
}

} // namespace llpm
