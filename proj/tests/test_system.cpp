#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "llpm/interp.hpp"
#include "llpm/system.hpp"

#include "fixtures.hpp"
#include "gen.hpp"

using namespace llpm;

namespace {

const std::string kFixtureDir = std::string(LLPM_SOURCE_DIR) + "/fixtures";

std::string err_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Package pkg_of(Module m, double area = 1.0, const std::string& domain = "clk0") {
  Package p;
  p.module = std::move(m);
  p.area = area;
  p.clock_domain = domain;
  return p;
}

// adder feeding an accumulator, all exports named; the workhorse design
SystemDesign pair_design(uint32_t fifo_depth = 2) {
  SystemDesign d;
  d.name = "pair";
  d.instances["adder"] = {"add8", ""};
  d.instances["acc"] = {"accum", ""};
  d.connections.push_back({"adder", "s", "acc", "x", fifo_depth});
  d.exports.push_back({"adder", "a", "a"});
  d.exports.push_back({"adder", "b", "b"});
  d.exports.push_back({"acc", "y", "sum"});
  return d;
}

std::map<std::string, Package> pair_packages() {
  return {{"add8", pkg_of(fixtures::add8())}, {"accum", pkg_of(fixtures::accumulator(), 2.0)}};
}

Package extern_pkg(bool registered) {
  ExternBody body;
  body.files = {"mystery.v"};
  body.top = "mystery";
  Module m{"mystery",
           {{"x", Direction::In, HWType::make_uint(8)}, {"y", Direction::Out, HWType::make_uint(8)}},
           std::move(body)};
  Package p;
  p.module = std::move(m);
  p.registered = registered;
  return p;
}

} // namespace

TEST_CASE("package files load and mean what the in-code fixtures mean") {
  Package p = load_package(kFixtureDir + "/accumulator.json");
  CHECK(p.module.name == "accumulator");
  TokenStreams in;
  for (uint64_t v : {1, 2, 3}) in["x"].push_back(Value::of_uint(v));
  TokenStreams out = run(p.module, in, 3);
  REQUIRE(out.at("y").size() == 3);
  CHECK(out.at("y")[0] == Value::of_uint(1));
  CHECK(out.at("y")[1] == Value::of_uint(3));
  CHECK(out.at("y")[2] == Value::of_uint(6));

  for (const Module& m : fixtures::all()) {
    Package refp;
    refp.module = m;
    Package disk = load_package(kFixtureDir + "/" + m.name + ".json");
    CHECK(dump_json(package_to_json(disk)) != "");
    CHECK(disk.module.name == m.name);
    CHECK(disk.module.ports.size() == m.ports.size());
  }
}

TEST_CASE("package with a zero-width scalar is rejected") {
  Json j = read_json_file(kFixtureDir + "/add8.json");
  j["ports"][0]["type"] = "uint<0>";
  CHECK_THROWS_AS(package_from_json(j), SchemaError);
}

TEST_CASE("assemble resolves channels, exports and the report") {
  AssembledSystem sys = assemble(pair_design(), pair_packages());
  REQUIRE(sys.channels.size() == 1);
  const Channel& ch = sys.channels[0];
  CHECK(ch.name == "adder.s->acc.x");
  CHECK(ch.depth == 2);
  CHECK(!ch.cdc);
  CHECK(ch.type == HWType::make_uint(8));
  REQUIRE(sys.exports.size() == 3);
  CHECK(sys.exports[2].name == "sum");
  CHECK(sys.exports[2].dir == Direction::Out);
  REQUIRE(sys.instances.size() == 2);
  CHECK(sys.instances[0].name == "acc"); // sorted

  REQUIRE(sys.report.size() == 4);
  CHECK(sys.report[0] == "instances: 2");
  CHECK(sys.report[1] == "channels: 1 (0 cdc)");
  CHECK(sys.report[2] == "exports: 3");
  CHECK(sys.report[3] == "type check: ok");
}

TEST_CASE("assemble inserts a cdc fifo exactly on domain crossings") {
  auto pkgs = pair_packages();
  SystemDesign d = pair_design(0);
  d.instances["acc"].clock_domain = "clk_slow";
  AssembledSystem sys = assemble(d, pkgs);
  REQUIRE(sys.channels.size() == 1);
  CHECK(sys.channels[0].cdc);
  CHECK(sys.channels[0].depth == 4); // kCdcDefaultDepth floor

  d.connections[0].fifo_depth = 9;
  sys = assemble(d, pkgs);
  CHECK(sys.channels[0].depth == 9); // user depth survives when larger

  d.instances["acc"].clock_domain = "";
  d.connections[0].fifo_depth = 0;
  sys = assemble(d, pkgs);
  CHECK(!sys.channels[0].cdc);
  CHECK(sys.channels[0].depth == 0);
}

TEST_CASE("assemble rejects malformed designs") {
  auto pkgs = pair_packages();

  SECTION("type mismatch names both endpoints") {
    auto bad = pkgs;
    bad["alu"] = pkg_of(fixtures::alu());
    SystemDesign d;
    d.name = "bad";
    d.instances["alu"] = {"alu", ""};
    d.instances["acc"] = {"accum", ""};
    d.connections.push_back({"alu", "lt", "acc", "x", 0});
    d.exports.push_back({"alu", "a", "a"});
    d.exports.push_back({"alu", "b", "b"});
    d.exports.push_back({"alu", "res", "res"});
    d.exports.push_back({"alu", "t", "t"});
    d.exports.push_back({"acc", "y", "y"});
    std::string msg = err_of([&] { assemble(d, bad); });
    CHECK(msg.find("alu.lt") != std::string::npos);
    CHECK(msg.find("acc.x") != std::string::npos);
    CHECK(msg.find("uint<1>") != std::string::npos);
    CHECK(msg.find("uint<8>") != std::string::npos);
  }

  SECTION("fan-out is rejected") {
    SystemDesign d = pair_design();
    d.instances["acc2"] = {"accum", ""};
    d.connections.push_back({"adder", "s", "acc2", "x", 0});
    d.exports.push_back({"acc2", "y", "sum2"});
    CHECK(err_of([&] { assemble(d, pkgs); }).find("more than one connection") !=
          std::string::npos);
  }

  SECTION("double-driven input is rejected") {
    SystemDesign d = pair_design();
    d.instances["adder2"] = {"add8", ""};
    d.connections.push_back({"adder2", "s", "acc", "x", 0});
    d.exports.push_back({"adder2", "a", "a2"});
    d.exports.push_back({"adder2", "b", "b2"});
    CHECK(!err_of([&] { assemble(d, pkgs); }).empty());
  }

  SECTION("connected ports cannot also be exported") {
    SystemDesign d = pair_design();
    d.exports.push_back({"acc", "x", "leak"});
    std::string msg = err_of([&] { assemble(d, pkgs); });
    CHECK(msg.find("acc.x") != std::string::npos);
    CHECK(msg.find("both connected and exported") != std::string::npos);
  }

  SECTION("every port must be either connected or exported") {
    SystemDesign d = pair_design();
    d.exports.pop_back(); // drop sum
    CHECK(err_of([&] { assemble(d, pkgs); }).find("acc.y") != std::string::npos);
  }

  SECTION("unknown instance and port") {
    SystemDesign d = pair_design();
    d.connections.push_back({"ghost", "s", "acc", "x", 0});
    CHECK(err_of([&] { assemble(d, pkgs); }).find("ghost") != std::string::npos);
    d = pair_design();
    d.exports.push_back({"adder", "nope", "n"});
    CHECK(err_of([&] { assemble(d, pkgs); }).find("nope") != std::string::npos);
  }

  SECTION("duplicate export names collide") {
    SystemDesign d = pair_design();
    d.exports[2].as = "a"; // same as adder.a
    CHECK(err_of([&] { assemble(d, pkgs); }).find("'a'") != std::string::npos);
  }
}

TEST_CASE("deadlock checker flags exactly the storage-free cycles") {
  std::map<std::string, Package> pkgs = {{"pass", pkg_of(fixtures::passthrough8())},
                                         {"accum", pkg_of(fixtures::accumulator())}};

  SystemDesign d;
  d.name = "loop";
  d.instances["p"] = {"pass", ""};
  d.instances["q"] = {"pass", ""};
  d.connections.push_back({"p", "y", "q", "x", 0});
  d.connections.push_back({"q", "y", "p", "x", 0});

  SECTION("zero-storage two-cycle is a finding") {
    AssembledSystem sys = assemble(d, pkgs);
    auto findings = check_deadlock(sys);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].find("zero-storage cycle") != std::string::npos);
    CHECK(findings[0].find("p") != std::string::npos);
    CHECK(findings[0].find("q") != std::string::npos);
    CHECK(findings[0].find("insert a FIFO") != std::string::npos);
  }

  SECTION("one token of storage anywhere on the cycle clears it") {
    d.connections[1].fifo_depth = 1;
    AssembledSystem sys = assemble(d, pkgs);
    CHECK(check_deadlock(sys).empty());
  }

  SECTION("a registered stage on the cycle clears it") {
    SystemDesign r;
    r.name = "self";
    r.instances["a"] = {"accum", ""};
    r.connections.push_back({"a", "y", "a", "x", 0});
    AssembledSystem sys = assemble(r, pkgs);
    CHECK(check_deadlock(sys).empty());
  }

  SECTION("combinational self-loop is the shortest finding") {
    SystemDesign r;
    r.name = "self";
    r.instances["a"] = {"pass", ""};
    r.connections.push_back({"a", "y", "a", "x", 0});
    AssembledSystem sys = assemble(r, pkgs);
    auto findings = check_deadlock(sys);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].find("a -> a") != std::string::npos);
  }
}

TEST_CASE("extern packages are combinational unless declared registered") {
  SystemDesign d;
  d.name = "self";
  d.instances["e"] = {"ext", ""};
  d.connections.push_back({"e", "y", "e", "x", 0});

  std::map<std::string, Package> pkgs = {{"ext", extern_pkg(false)}};
  CHECK(check_deadlock(assemble(d, pkgs)).size() == 1);

  pkgs["ext"] = extern_pkg(true);
  CHECK(check_deadlock(assemble(d, pkgs)).empty());
}

TEST_CASE("cdc placement property over random designs") {
  Prng rng(0xcdc);
  std::vector<std::string> domains = {"clk_a", "clk_b", "clk_c"};
  for (int iter = 0; iter < 60; ++iter) {
    size_t n = 2 + rng.below(6);
    SystemDesign d;
    d.name = "rnd";
    std::map<std::string, Package> pkgs = {{"pass", pkg_of(fixtures::passthrough8())}};
    std::vector<std::string> names;
    for (size_t i = 0; i < n; ++i) {
      std::string name = "i" + std::to_string(i);
      d.instances[name] = {"pass", domains[rng.below(domains.size())]};
      names.push_back(name);
    }
    // chain them so ports stay single-use; spare ports become exports
    for (size_t i = 0; i + 1 < n; ++i)
      d.connections.push_back({names[i], "y", names[i + 1], "x",
                               static_cast<uint32_t>(rng.below(3))});
    d.exports.push_back({names[0], "x", "in"});
    d.exports.push_back({names[n - 1], "y", "out"});

    AssembledSystem sys = assemble(d, pkgs);
    REQUIRE(sys.channels.size() == n - 1);
    for (const Channel& ch : sys.channels) {
      const auto* src = sys.find_instance(ch.src_inst);
      const auto* dst = sys.find_instance(ch.dst_inst);
      bool crossing = src->clock_domain != dst->clock_domain;
      CHECK(ch.cdc == crossing);
      if (crossing) CHECK(ch.depth >= kCdcDefaultDepth);
    }
  }
}

TEST_CASE("system simulation preserves streams against the composed interpreter") {
  auto pkgs = pair_packages();
  Prng rng(0x5eed);
  for (uint32_t fifo_depth : {0u, 1u, 2u, 5u}) {
    AssembledSystem sys = assemble(pair_design(fifo_depth), pkgs);
    REQUIRE(check_deadlock(sys).empty());
    size_t n = 12;
    Stimulus stim;
    stim.seed = Prng::mix(7, fifo_depth);
    stim.cycles = 64 + 16 * n;
    TokenStreams in;
    for (size_t k = 0; k < n; ++k) {
      in["a"].push_back(random_value(HWType::make_uint(8), rng));
      in["b"].push_back(random_value(HWType::make_uint(8), rng));
    }
    stim.inputs = in;
    stim.sinks["sum"] = 0.7;
    Trace tr = simulate(sys, stim);

    TokenStreams mid = run(fixtures::add8(), in, n);
    TokenStreams want = run(fixtures::accumulator(), {{"x", mid.at("s")}}, n);
    REQUIRE(tr.channels.at("sum").tokens.size() == n);
    CHECK(tr.channels.at("sum").tokens == want.at("y"));
  }
}

TEST_CASE("cross-domain simulation still preserves streams") {
  auto pkgs = pair_packages();
  SystemDesign d = pair_design(0);
  d.instances["adder"].clock_domain = "clk_fast";
  AssembledSystem sys = assemble(d, pkgs);
  size_t n = 8;
  Stimulus stim;
  stim.cycles = 200;
  for (size_t k = 0; k < n; ++k) {
    stim.inputs["a"].push_back(Value::of_uint(k + 1));
    stim.inputs["b"].push_back(Value::of_uint(10 * (k + 1)));
  }
  Trace tr = simulate(sys, stim);
  TokenStreams mid = run(fixtures::add8(), stim.inputs, n);
  TokenStreams want = run(fixtures::accumulator(), {{"x", mid.at("s")}}, n);
  REQUIRE(tr.channels.at("sum").tokens.size() == n);
  CHECK(tr.channels.at("sum").tokens == want.at("y"));
}

TEST_CASE("simulation counters account for every cycle") {
  auto pkgs = pair_packages();
  AssembledSystem sys = assemble(pair_design(2), pkgs);
  Stimulus stim;
  stim.cycles = 100;
  for (int k = 0; k < 5; ++k) stim.inputs["a"].push_back(Value::of_uint(1));
  for (int k = 0; k < 5; ++k) stim.inputs["b"].push_back(Value::of_uint(2));
  Trace tr = simulate(sys, stim);
  CHECK(tr.cycles == 100);
  for (const auto& [name, ch] : tr.channels) {
    CHECK(ch.transfers == ch.tokens.size());
    CHECK(ch.transfers + ch.stall_cycles + ch.idle_cycles == tr.cycles);
    for (size_t i = 1; i < ch.cycles.size(); ++i) CHECK(ch.cycles[i - 1] < ch.cycles[i]);
  }
  CHECK(tr.channels.at("sum").transfers == 5);
}

TEST_CASE("extern instances simulate through their behavioral model") {
  ExternBody body;
  body.files = {"mystery.v"};
  body.top = "mystery";
  DataflowGraph g;
  auto x = g.in("x", HWType::make_uint(8));
  g.out("y", g.op(OpKind::Add, {x, g.cst(HWType::make_uint(8), Value::of_uint(1))}));
  body.model = std::move(g);
  Module m{"mystery",
           {{"x", Direction::In, HWType::make_uint(8)}, {"y", Direction::Out, HWType::make_uint(8)}},
           std::move(body)};

  SystemDesign d;
  d.name = "inc";
  d.instances["e"] = {"ext", ""};
  d.exports.push_back({"e", "x", "x"});
  d.exports.push_back({"e", "y", "y"});
  std::map<std::string, Package> pkgs = {{"ext", pkg_of(m)}};
  AssembledSystem sys = assemble(d, pkgs);

  Stimulus stim;
  stim.cycles = 50;
  stim.inputs["x"].push_back(Value::of_uint(41));
  Trace tr = simulate(sys, stim);
  REQUIRE(tr.channels.at("y").tokens.size() == 1);
  CHECK(tr.channels.at("y").tokens[0] == Value::of_uint(42));

  // without the model the simulation has nothing to run
  std::map<std::string, Package> bare = {{"ext", extern_pkg(false)}};
  AssembledSystem sys2 = assemble(d, bare);
  CHECK(err_of([&] { simulate(sys2, stim); }).find("behavioral model") != std::string::npos);
}

TEST_CASE("host bridge layout") {
  auto pkgs = pair_packages();
  AssembledSystem sys = assemble(pair_design(), pkgs);

  SECTION("regions are 16-byte aligned, name-ordered, ceil(w/32)+2 words") {
    HostBridgeMap map = synth_host_bridge(sys, {"sum", "a", "b"});
    REQUIRE(map.channels.size() == 3);
    CHECK(map.channels[0].name == "a");
    CHECK(map.channels[1].name == "b");
    CHECK(map.channels[2].name == "sum");
    for (const auto& c : map.channels) {
      CHECK(c.base % 16 == 0);
      CHECK(c.data_words == 1);
      CHECK(c.words == 3);
    }
    CHECK(map.channels[0].base == 0);
    CHECK(map.channels[1].base == 16);
    CHECK(map.channels[2].base == 32);
    CHECK(map.span_bytes() == 44);
    REQUIRE(sys.bridge.has_value());
    CHECK(sys.bridge->channels.size() == 3);
  }

  SECTION("wide channels get one region with more data words") {
    DataflowGraph g;
    HWType wide = HWType::make_array(HWType::make_uint(20), 2); // 40 bits
    auto v = g.in("v", wide);
    g.out("w", v);
    Module m{"wide", {{"v", Direction::In, wide}, {"w", Direction::Out, wide}}, std::move(g)};
    SystemDesign d;
    d.name = "w";
    d.instances["i"] = {"wide", ""};
    d.exports.push_back({"i", "v", "v"});
    d.exports.push_back({"i", "w", "w"});
    std::map<std::string, Package> wp = {{"wide", pkg_of(m)}};
    AssembledSystem ws = assemble(d, wp);
    HostBridgeMap map = synth_host_bridge(ws, {"v", "w"});
    REQUIRE(map.channels.size() == 2);
    CHECK(map.channels[0].data_words == 2);
    CHECK(map.channels[0].words == 4);
    CHECK(map.channels[0].base == 0);
    CHECK(map.channels[1].base == 16);
  }

  SECTION("void channels still get status and control") {
    DataflowGraph g;
    g.out("t", g.cst(HWType::make_void(), Value::unit()));
    Module m{"tick", {{"t", Direction::Out, HWType::make_void()}}, std::move(g)};
    SystemDesign d;
    d.name = "t";
    d.instances["i"] = {"tick", ""};
    d.exports.push_back({"i", "t", "t"});
    std::map<std::string, Package> tp = {{"tick", pkg_of(m)}};
    AssembledSystem ts = assemble(d, tp);
    HostBridgeMap map = synth_host_bridge(ts, {"t"});
    REQUIRE(map.channels.size() == 1);
    CHECK(map.channels[0].data_words == 0);
    CHECK(map.channels[0].words == 2);
  }

  SECTION("connected channels cannot face the host") {
    CHECK(err_of([&] { synth_host_bridge(sys, {"adder.s->acc.x"}); })
              .find("only exported channels") != std::string::npos);
    CHECK(err_of([&] { synth_host_bridge(sys, {"zz"}); }).find("no exported channel") !=
          std::string::npos);
  }

  SECTION("duplicate names are folded") {
    HostBridgeMap map = synth_host_bridge(sys, {"a", "a", "sum"});
    CHECK(map.channels.size() == 2);
  }
}

TEST_CASE("perf taps attach to known channels once") {
  auto pkgs = pair_packages();
  AssembledSystem sys = assemble(pair_design(), pkgs);
  insert_perf_taps(sys, {"adder.s->acc.x", "sum", "adder.s->acc.x"});
  REQUIRE(sys.taps.size() == 2);
  CHECK(err_of([&] { insert_perf_taps(sys, {"nope"}); }).find("no channel named") !=
        std::string::npos);
}

namespace {

// k^n enumeration; the oracle partition() must match on small designs
uint64_t brute_force_cut(const SystemDesign& d, const std::map<std::string, Package>& pkgs,
                         const PartitionSpec& spec, bool& feasible) {
  std::vector<std::string> names;
  std::vector<double> areas;
  for (const auto& [name, inst] : d.instances) {
    names.push_back(name);
    areas.push_back(pkgs.at(inst.package).area);
  }
  size_t n = names.size();
  auto index_of = [&](const std::string& s) {
    return size_t(std::find(names.begin(), names.end(), s) - names.begin());
  };
  struct E {
    size_t a, b;
    uint64_t w;
  };
  std::vector<E> edges;
  for (const auto& c : d.connections) {
    const Module& m = pkgs.at(d.instances.at(c.src_inst).package).module;
    edges.push_back({index_of(c.src_inst), index_of(c.dst_inst),
                     bit_width(m.find_port(c.src_port)->type)});
  }

  feasible = false;
  uint64_t best = UINT64_MAX;
  std::vector<uint32_t> part(n, 0);
  while (true) {
    std::vector<double> load(spec.k, 0.0);
    for (size_t i = 0; i < n; ++i) load[part[i]] += areas[i];
    bool ok = true;
    for (uint32_t p = 0; p < spec.k; ++p)
      if (load[p] > spec.capacities[p] + 1e-9) ok = false;
    if (ok) {
      feasible = true;
      uint64_t cut = 0;
      for (const E& e : edges)
        if (part[e.a] != part[e.b]) cut += e.w;
      best = std::min(best, cut);
    }
    size_t i = 0;
    for (; i < n; ++i) {
      if (++part[i] < spec.k) break;
      part[i] = 0;
    }
    if (i == n) break;
  }
  return best;
}

} // namespace

TEST_CASE("partition: exact on small designs matches brute force") {
  Prng rng(0x9a7);
  std::map<std::string, Package> pkgs;
  for (uint32_t w : {4u, 8u, 16u, 24u}) {
    DataflowGraph g;
    g.out("y", g.in("x", HWType::make_uint(w)));
    Module m{"pass" + std::to_string(w),
             {{"x", Direction::In, HWType::make_uint(w)},
              {"y", Direction::Out, HWType::make_uint(w)}},
             std::move(g)};
    Package p = pkg_of(std::move(m));
    pkgs["p" + std::to_string(w)] = p;
  }
  std::vector<std::string> keys;
  for (const auto& [k, v] : pkgs) keys.push_back(k);

  for (int iter = 0; iter < 40; ++iter) {
    size_t n = 2 + rng.below(6);
    SystemDesign d;
    d.name = "rnd";
    std::vector<std::string> names;
    for (size_t i = 0; i < n; ++i) {
      std::string name = "i" + std::to_string(i);
      std::string key = keys[rng.below(keys.size())];
      pkgs[key].area = 1.0 + double(rng.below(4));
      d.instances[name] = {key, ""};
      names.push_back(name);
    }
    size_t m_edges = rng.below(2 * n);
    for (size_t e = 0; e < m_edges; ++e) {
      size_t a = rng.below(n), b = rng.below(n);
      if (a == b) continue;
      d.connections.push_back({names[a], "y", names[b], "x", 0});
    }
    PartitionSpec spec;
    spec.k = 2 + static_cast<uint32_t>(rng.below(2));
    double total = 0;
    for (const auto& [name, inst] : d.instances) total += pkgs.at(inst.package).area;
    for (uint32_t p = 0; p < spec.k; ++p)
      spec.capacities.push_back(total * (0.5 + 0.25 * double(rng.below(3))));
    spec.seed = iter;

    bool feasible = false;
    uint64_t want = brute_force_cut(d, pkgs, spec, feasible);
    if (!feasible) {
      CHECK(!err_of([&] { partition(d, pkgs, spec); }).empty());
      continue;
    }
    PartitionResult r = partition(d, pkgs, spec);
    CHECK(r.method == "exact");
    CHECK(r.cut_cost == want);
    std::vector<double> load(spec.k, 0.0);
    for (const auto& [name, part] : r.assignment) {
      REQUIRE(part < spec.k);
      load[part] += pkgs.at(d.instances.at(name).package).area;
    }
    for (uint32_t p = 0; p < spec.k; ++p) CHECK(load[p] <= spec.capacities[p] + 1e-9);
  }
}

TEST_CASE("partition: k=1 puts everything on the one device") {
  auto pkgs = pair_packages();
  SystemDesign d = pair_design();
  PartitionSpec spec;
  spec.k = 1;
  spec.capacities = {10.0};
  PartitionResult r = partition(d, pkgs, spec);
  CHECK(r.cut_cost == 0);
  for (const auto& [name, p] : r.assignment) CHECK(p == 0);
}

TEST_CASE("partition: heuristic respects capacities and is deterministic") {
  std::map<std::string, Package> pkgs = {{"pass", pkg_of(fixtures::passthrough8())}};
  SystemDesign d;
  d.name = "chain16";
  std::vector<std::string> names;
  for (int i = 0; i < 16; ++i) {
    std::string name = "s" + std::to_string(i);
    d.instances[name] = {"pass", ""};
    names.push_back(name);
  }
  for (int i = 0; i + 1 < 16; ++i)
    d.connections.push_back({names[i], "y", names[i + 1], "x", 1});

  PartitionSpec spec;
  spec.k = 2;
  spec.capacities = {8.0, 8.0};
  spec.seed = 3;
  PartitionResult r1 = partition(d, pkgs, spec);
  PartitionResult r2 = partition(d, pkgs, spec);
  CHECK(r1.method == "heuristic");
  CHECK(r1.assignment == r2.assignment);
  CHECK(r1.cut_cost == r2.cut_cost);
  CHECK(r1.cut_cost == 8); // one chain edge cut, uint<8> wide
  std::vector<double> load(2, 0.0);
  for (const auto& [name, p] : r1.assignment) load[p] += 1.0;
  CHECK(load[0] <= 8.0);
  CHECK(load[1] <= 8.0);
}

TEST_CASE("partition: infeasible inputs are rejected with areas in the message") {
  auto pkgs = pair_packages();
  SystemDesign d = pair_design();
  PartitionSpec spec;
  spec.k = 2;
  spec.capacities = {1.0, 1.0};
  std::string msg = err_of([&] { partition(d, pkgs, spec); });
  CHECK(msg.find("infeasible") != std::string::npos);
  CHECK(msg.find("3") != std::string::npos); // total area 1 + 2

  spec.capacities = {1.0};
  CHECK(err_of([&] { partition(d, pkgs, spec); }).find("capacities") != std::string::npos);
}

TEST_CASE("system files load with packages resolved beside them") {
  LoadedSystem ls = load_system(kFixtureDir + "/pair.json");
  CHECK(ls.design.name == "pair");
  CHECK(ls.packages.count("add8.json") == 1);
  AssembledSystem sys = assemble(ls.design, ls.packages);
  CHECK(sys.channels.size() == 1);

  LoadedSystem cyc = load_system(kFixtureDir + "/cycle_no_fifo.json");
  AssembledSystem bad = assemble(cyc.design, cyc.packages);
  CHECK(check_deadlock(bad).size() == 1);
}
