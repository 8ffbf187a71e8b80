#pragma once

#include <llpm/ir.hpp>
#include <llpm/types.hpp>

#include <vector>

// The fixture suite used across the tests: small, hand-checkable modules
// that together exercise every op kind, feedback through Delay, aggregate
// payloads and multi-output alignment.
namespace llpm::fixtures {

inline HWType u(uint32_t w) { return HWType::make_uint(w); }
inline HWType s(uint32_t w) { return HWType::make_sint(w); }

// s = a + b (mod 256)
inline Module add8() {
  DataflowGraph g;
  auto a = g.in("a", u(8));
  auto b = g.in("b", u(8));
  g.out("s", g.op(OpKind::Add, {a, b}));
  return {"add8",
          {{"a", Direction::In, u(8)}, {"b", Direction::In, u(8)}, {"s", Direction::Out, u(8)}},
          std::move(g)};
}

// y[k] = x[0] + ... + x[k] (mod 256)
inline Module accumulator() {
  DataflowGraph g;
  auto x = g.in("x", u(8));
  auto d = g.delay(u(8), Value::of_uint(0), x);
  auto sum = g.op(OpKind::Add, {x, d});
  g.node(d).inputs[0] = sum; // close the feedback loop
  g.out("y", sum);
  return {"accumulator", {{"x", Direction::In, u(8)}, {"y", Direction::Out, u(8)}}, std::move(g)};
}

// y[k] = 3*x[k] + 2*x[k-1] + 1*x[k-2] (mod 256), taps through Delay
inline Module fir3() {
  DataflowGraph g;
  auto x = g.in("x", u(8));
  auto d1 = g.delay(u(8), Value::of_uint(0), x);
  auto d2 = g.delay(u(8), Value::of_uint(0), d1);
  auto m0 = g.op(OpKind::Mul, {x, g.cst(u(8), Value::of_uint(3))});
  auto m1 = g.op(OpKind::Mul, {d1, g.cst(u(8), Value::of_uint(2))});
  auto m2 = g.op(OpKind::Mul, {d2, g.cst(u(8), Value::of_uint(1))});
  auto a1 = g.op(OpKind::Add, {m0, m1});
  auto a2 = g.op(OpKind::Add, {a1, m2});
  g.out("y", a2);
  return {"fir3", {{"x", Direction::In, u(8)}, {"y", Direction::Out, u(8)}}, std::move(g)};
}

// y = sel ? a : b
inline Module mux_sel() {
  DataflowGraph g;
  auto sel = g.in("sel", u(1));
  auto a = g.in("a", u(8));
  auto b = g.in("b", u(8));
  g.out("y", g.op(OpKind::Mux, {sel, a, b}));
  return {"mux_sel",
          {{"sel", Direction::In, u(1)},
           {"a", Direction::In, u(8)},
           {"b", Direction::In, u(8)},
           {"y", Direction::Out, u(8)}},
          std::move(g)};
}

inline HWType dispatch_union() {
  return HWType::make_union({{"val", u(8)}, {"flag", u(1)}});
}

// y = (tag == val) ? payload : 0; f = (tag == flag) ? payload : 0.
// Both unwraps evaluate every firing, so the mismatched-tag reinterpretation
// is exercised by ordinary streams.
inline Module union_dispatch() {
  DataflowGraph g;
  HWType ut = dispatch_union();
  auto in = g.in("u", ut);
  auto tag = g.tag_of(in);
  auto is_val = g.op(OpKind::Eq, {tag, g.cst(u(1), Value::of_uint(0))});
  auto is_flag = g.op(OpKind::Eq, {tag, g.cst(u(1), Value::of_uint(1))});
  auto y = g.op(OpKind::Mux, {is_val, g.unwrap(in, "val"), g.cst(u(8), Value::of_uint(0))});
  auto f = g.op(OpKind::Mux, {is_flag, g.unwrap(in, "flag"), g.cst(u(1), Value::of_uint(0))});
  g.out("y", y);
  g.out("f", f);
  return {"union_dispatch",
          {{"u", Direction::In, ut}, {"y", Direction::Out, u(8)}, {"f", Direction::Out, u(1)}},
          std::move(g)};
}

inline HWType pair_struct() {
  return HWType::make_struct({{"hi", u(4)}, {"lo", u(4)}});
}

// swapped = {hi: p.lo, lo: p.hi}; total = p.hi + p.lo.
// The two outputs have unequal natural depths, so the shallow one needs a
// balancing register to stay aligned with the valid chain.
inline Module struct_pack() {
  DataflowGraph g;
  HWType st = pair_struct();
  auto p = g.in("p", st);
  auto hi = g.extract(p, "hi");
  auto lo = g.extract(p, "lo");
  g.out("swapped", g.pack_struct(st, {lo, hi}));
  g.out("total", g.op(OpKind::Add, {hi, lo}));
  return {"struct_pack",
          {{"p", Direction::In, st},
           {"swapped", Direction::Out, st},
           {"total", Direction::Out, u(4)}},
          std::move(g)};
}

// y = v[i] (index clamps); r = v reversed
inline Module array_rev() {
  DataflowGraph g;
  HWType at = HWType::make_array(u(8), 3);
  auto v = g.in("v", at);
  auto i = g.in("i", u(2));
  auto e0 = g.index(v, g.cst(u(2), Value::of_uint(0)));
  auto e1 = g.index(v, g.cst(u(2), Value::of_uint(1)));
  auto e2 = g.index(v, g.cst(u(2), Value::of_uint(2)));
  g.out("y", g.index(v, i));
  g.out("r", g.pack_array(at, {e2, e1, e0}));
  return {"array_rev",
          {{"v", Direction::In, at},
           {"i", Direction::In, u(2)},
           {"y", Direction::Out, u(8)},
           {"r", Direction::Out, at}},
          std::move(g)};
}

inline HWType alu_result() {
  return HWType::make_struct({{"diff", s(8)},
                              {"band", s(8)},
                              {"bor", s(8)},
                              {"bxor", s(8)},
                              {"bnot", s(8)}});
}

inline HWType alu_union() {
  return HWType::make_union({{"ok", s(8)}, {"small", u(1)}});
}

// signed ops bundle; t wraps the difference unless a < b, then the flag
inline Module alu() {
  DataflowGraph g;
  auto a = g.in("a", s(8));
  auto b = g.in("b", s(8));
  auto diff = g.op(OpKind::Sub, {a, b});
  auto lt = g.op(OpKind::Lt, {a, b});
  g.out("res", g.pack_struct(alu_result(), {diff, g.op(OpKind::And, {a, b}),
                                            g.op(OpKind::Or, {a, b}), g.op(OpKind::Xor, {a, b}),
                                            g.op(OpKind::Not, {a})}));
  g.out("lt", lt);
  auto tagged = g.op(OpKind::Mux, {lt, g.pack_union(alu_union(), "small", lt),
                                   g.pack_union(alu_union(), "ok", diff)});
  g.out("t", tagged);
  return {"alu",
          {{"a", Direction::In, s(8)},
           {"b", Direction::In, s(8)},
           {"res", Direction::Out, alu_result()},
           {"lt", Direction::Out, u(1)},
           {"t", Direction::Out, alu_union()}},
          std::move(g)};
}

// y = x with no registers anywhere; the smallest combinational module,
// used by the deadlock fixtures
inline Module passthrough8() {
  DataflowGraph g;
  g.out("y", g.in("x", u(8)));
  return {"passthrough8",
          {{"x", Direction::In, u(8)}, {"y", Direction::Out, u(8)}},
          std::move(g)};
}

inline std::vector<Module> all() {
  return {add8(),    accumulator(), fir3(),      mux_sel(),
          union_dispatch(), struct_pack(), array_rev(), alu()};
}

} // namespace llpm::fixtures
