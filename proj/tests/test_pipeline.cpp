#include <catch2/catch_amalgamated.hpp>

#include <llpm/pipeline.hpp>

#include <map>

#include "fixtures.hpp"

using namespace llpm;

namespace {

HWType u(uint32_t w) { return HWType::make_uint(w); }

const RegChain& chain_into(const PipelinedNetlist& n, NodeId consumer, uint32_t input_index) {
  for (const RegChain& c : n.chains)
    if (c.consumer == consumer && c.input_index == input_index) return c;
  FAIL("no chain for consumer " << consumer << " input " << input_index);
  static RegChain dummy;
  return dummy;
}

} // namespace

TEST_CASE("latency table defaults") {
  LatencyTable t;
  for (OpKind k : {OpKind::InputPort, OpKind::OutputPort, OpKind::Const, OpKind::StructPack,
                   OpKind::FieldExtract, OpKind::ArrayPack, OpKind::UnionPack, OpKind::TagOf,
                   OpKind::UnwrapVariant})
    CHECK(t.of(k) == 0);
  for (OpKind k : {OpKind::Add, OpKind::Sub, OpKind::Eq, OpKind::Lt, OpKind::And, OpKind::Or,
                   OpKind::Xor, OpKind::Not, OpKind::Mux, OpKind::ArrayIndex})
    CHECK(t.of(k) == 1);
  CHECK(t.of(OpKind::Mul) == 2);
  CHECK(t.of(OpKind::Delay) == 1);

  t.set(OpKind::Mul, 5);
  CHECK(t.of(OpKind::Mul) == 5);
  t.set(OpKind::Delay, 1);
  CHECK_THROWS_AS(t.set(OpKind::Delay, 2), Error);
}

TEST_CASE("adder schedule: inputs 0, add 0, output 1") {
  Module m = fixtures::add8();
  Schedule s = schedule(m.graph());
  CHECK(s.stage(0) == 0);
  CHECK(s.stage(1) == 0);
  CHECK(s.stage(2) == 0);
  CHECK(s.stage(3) == 1);
  CHECK(s.total_latency == 1);
}

TEST_CASE("add feeding mul: balancing register on the fresh operand") {
  DataflowGraph g;
  auto a = g.in("a", u(8));
  auto b = g.in("b", u(8));
  auto sum = g.op(OpKind::Add, {a, b});
  auto prod = g.op(OpKind::Mul, {sum, b});
  auto y = g.out("y", prod);
  Module m{"addmul",
           {{"a", Direction::In, u(8)}, {"b", Direction::In, u(8)}, {"y", Direction::Out, u(8)}},
           std::move(g)};

  Schedule s = schedule(m.graph());
  CHECK(s.stage(prod) == 1);
  CHECK(s.stage(y) == 3);
  CHECK(s.total_latency == 3);

  PipelinedNetlist n = pipeline(m, s);
  CHECK(chain_into(n, prod, 1).regs() == 1); // b crosses one boundary
  CHECK(chain_into(n, prod, 0).regs() == 1);
  CHECK(chain_into(n, y, 0).regs() == 2);
}

TEST_CASE("pass-through schedules at latency zero but keeps one register") {
  DataflowGraph g;
  auto x = g.in("x", u(8));
  auto y = g.out("y", x);
  Module m{"wire", {{"x", Direction::In, u(8)}, {"y", Direction::Out, u(8)}}, std::move(g)};
  Schedule s = schedule(m.graph());
  CHECK(s.total_latency == 0);
  PipelinedNetlist n = pipeline(m, s);
  CHECK(n.depth == 1);
  CHECK(chain_into(n, y, 0).regs() == 1);
  CHECK(n.data_register_count() == 1);
}

TEST_CASE("accumulator: feedback lives at slot 0, latency 1") {
  Module m = fixtures::accumulator();
  PipelinedNetlist n = pipeline(m);
  CHECK(n.sched.total_latency == 1);
  CHECK(n.depth == 1);
  REQUIRE(n.delays.size() == 1);
  CHECK(n.delays[0].write_slot == 0);
}

TEST_CASE("fir3 schedule, depth and register count") {
  Module m = fixtures::fir3();
  PipelinedNetlist n = pipeline(m);
  CHECK(n.sched.total_latency == 4);
  CHECK(n.depth == 4);

  std::map<OpKind, std::vector<uint32_t>> by_kind;
  for (const Node& nd : n.graph.nodes()) by_kind[nd.kind].push_back(n.sched.stage(nd.id));
  CHECK(by_kind[OpKind::Mul] == std::vector<uint32_t>{0, 0, 0});
  CHECK(by_kind[OpKind::Add] == std::vector<uint32_t>{2, 3});
  CHECK(by_kind[OpKind::Delay] == std::vector<uint32_t>{0, 0});

  CHECK(n.data_register_count() == 9);
}

TEST_CASE("schedule legality holds on every fixture") {
  for (const Module& m : fixtures::all()) {
    INFO(m.name);
    PipelinedNetlist n = pipeline(m);
    const Schedule& s = n.sched;
    for (const Node& v : n.graph.nodes()) {
      if (v.kind == OpKind::Delay) continue; // crosses a token boundary instead
      for (NodeId src : v.inputs) {
        const Node& p = n.graph.node(src);
        uint32_t avail =
            s.stage(src) + (p.kind == OpKind::Delay ? 0 : s.table.of(p.kind));
        INFO("edge " << src << " -> " << v.id);
        CHECK(s.stage(v.id) >= avail);
      }
    }
    for (const Node& v : n.graph.nodes())
      if (v.kind == OpKind::OutputPort) CHECK(s.stage(v.id) <= s.total_latency);
  }
}

TEST_CASE("register count matches an independent recount") {
  for (const Module& m : fixtures::all()) {
    INFO(m.name);
    PipelinedNetlist n = pipeline(m);
    uint64_t recount = 0;
    for (const Node& v : n.graph.nodes()) {
      for (NodeId src : v.inputs) {
        if (bit_width(n.types.at(src)) == 0) continue;
        uint32_t to = v.kind == OpKind::OutputPort ? n.depth
                      : v.kind == OpKind::Delay    ? n.sched.stage(src)
                                                   : n.sched.stage(v.id);
        recount += to - n.sched.stage(src);
      }
    }
    CHECK(n.data_register_count() == recount);
  }
}

TEST_CASE("delay readers sit at the write slot even when plain ASAP says earlier") {
  DataflowGraph g;
  auto x = g.in("x", u(8));
  auto c = g.cst(u(8), Value::of_uint(7));
  auto a1 = g.op(OpKind::Add, {x, c});
  auto prod = g.op(OpKind::Mul, {a1, c});
  auto d = g.delay(u(8), Value::of_uint(0), prod);
  auto r = g.op(OpKind::Add, {d, x});
  g.out("y", r);
  Module m{"lag", {{"x", Direction::In, u(8)}, {"y", Direction::Out, u(8)}}, std::move(g)};

  Schedule s = schedule(m.graph());
  // the delay is written at the slot where its input is combinationally
  // alive; a reader earlier than that would see the wrong token
  CHECK(s.stage(d) == s.stage(prod));
  CHECK(s.stage(r) >= s.stage(d));
  CHECK(s.stage(r) == 1);

  CHECK_NOTHROW(pipeline(m, s));
}

TEST_CASE("latency inside a feedback loop is rejected") {
  DataflowGraph g;
  auto x = g.in("x", u(8));
  auto a = g.op(OpKind::Add, {x, x});
  auto b = g.op(OpKind::Add, {a, a});
  auto d = g.delay(u(8), Value::of_uint(0), b);
  g.node(a).inputs[1] = d;
  g.out("y", b);
  Module m{"slowloop", {{"x", Direction::In, u(8)}, {"y", Direction::Out, u(8)}}, std::move(g)};
  REQUIRE(validate(m).empty());
  CHECK_THROWS_WITH(schedule(m.graph()),
                    Catch::Matchers::ContainsSubstring("initiation interval 1"));

  // dropping the combinational-segment latency makes it schedulable
  LatencyTable t;
  t.set(OpKind::Add, 0);
  Schedule s = schedule(m.graph(), t);
  CHECK(s.total_latency == 0);
}

TEST_CASE("pipeline runs dead-code elimination first") {
  Module m = fixtures::add8();
  auto c = m.graph().cst(u(8), Value::of_uint(1));
  m.graph().op(OpKind::Mul, {c, c});
  PipelinedNetlist n = pipeline(m);
  CHECK(n.graph.size() == 4);
}

TEST_CASE("pipeline rejects externs and stale schedules") {
  Module e{"box", {{"x", Direction::In, u(8)}, {"y", Direction::Out, u(8)}},
           ExternBody{{"box.v"}, "box", {}, std::nullopt}};
  CHECK_THROWS_WITH(pipeline(e), Catch::Matchers::ContainsSubstring("external RTL"));

  Module m = fixtures::add8();
  Schedule s = schedule(m.graph());
  s.stages.push_back(0);
  CHECK_THROWS_WITH(pipeline(m, s), Catch::Matchers::ContainsSubstring("schedule"));
}

TEST_CASE("chains cover every live edge in deterministic order") {
  for (const Module& m : fixtures::all()) {
    PipelinedNetlist n = pipeline(m);
    size_t edges = 0;
    for (const Node& v : n.graph.nodes()) edges += v.inputs.size();
    REQUIRE(n.chains.size() == edges);
    for (size_t i = 1; i < n.chains.size(); ++i) {
      bool ordered = n.chains[i - 1].consumer < n.chains[i].consumer ||
                     (n.chains[i - 1].consumer == n.chains[i].consumer &&
                      n.chains[i - 1].input_index < n.chains[i].input_index);
      CHECK(ordered);
    }
    for (const RegChain& c : n.chains) CHECK(c.to_slot >= c.from_slot);
  }
}
