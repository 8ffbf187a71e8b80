#pragma once

#include <vector>

#include "llpm/ir.hpp"
#include "llpm/types.hpp"

namespace llpm {

namespace detail {

// zero-extend or truncate a bit pattern to an exact width
inline BitVector fit_bits(const BitVector& src, size_t want) {
  if (src.size() == want) return src;
  if (src.size() > want) return src.slice(0, want);
  BitVector out(want);
  out.splice(0, src);
  return out;
}

inline uint64_t wrap_u(uint64_t raw, uint32_t w) { return raw & mask_for(w); }

} // namespace detail

// One combinational firing of a node, shared by the interpreter and the
// cycle-accurate simulator so the two can only disagree about timing.
// InputPort and Delay are the callers' business (stream head, state read);
// everything else is a pure function of the inputs.
//
// Semantics baked in here:
//   - arithmetic wraps mod 2^w, two's complement for sint
//   - mux sel=1 picks the first arm
//   - array_index clamps an out-of-range index to the last element
//   - unwrap on a mismatched tag reinterprets the stored payload bits as
//     the requested variant, zero-extended/truncated per the union layout
inline Value eval_op(const Node& n, const std::vector<Value>& in,
                     const std::vector<HWType>& in_types) {
  auto uns = [&](int i) { return in[size_t(i)].as_uint(); };
  auto is_sint = [&](int i) { return in_types[size_t(i)].kind() == TypeKind::SInt; };
  auto width0 = [&] { return in_types[0].width(); };
  // re-wrap a raw two's-complement result into the operand type
  auto wrapped = [&](uint64_t raw) {
    uint32_t w = width0();
    raw = detail::wrap_u(raw, w);
    return is_sint(0) ? Value::of_sint(detail::sign_extend(raw, w)) : Value::of_uint(raw);
  };
  // raw two's-complement bits of a scalar operand
  auto bits_of = [&](int i) {
    return detail::wrap_u(static_cast<uint64_t>(is_sint(i) ? static_cast<uint64_t>(in[size_t(i)].as_sint())
                                                           : uns(i)),
                          in_types[size_t(i)].width());
  };

  switch (n.kind) {
    case OpKind::Const: return n.value;
    case OpKind::OutputPort: return in[0];
    case OpKind::Add: return wrapped(bits_of(0) + bits_of(1));
    case OpKind::Sub: return wrapped(bits_of(0) - bits_of(1));
    case OpKind::Mul: return wrapped(bits_of(0) * bits_of(1));
    case OpKind::And: return wrapped(bits_of(0) & bits_of(1));
    case OpKind::Or: return wrapped(bits_of(0) | bits_of(1));
    case OpKind::Xor: return wrapped(bits_of(0) ^ bits_of(1));
    case OpKind::Not: return wrapped(~bits_of(0));
    case OpKind::Eq: return Value::of_uint(in[0] == in[1] ? 1 : 0);
    case OpKind::Lt:
      if (is_sint(0)) return Value::of_uint(in[0].as_sint() < in[1].as_sint() ? 1 : 0);
      return Value::of_uint(uns(0) < uns(1) ? 1 : 0);
    case OpKind::Mux: return uns(0) ? in[1] : in[2];
    case OpKind::StructPack:
    case OpKind::ArrayPack: return Value::of_list(in);
    case OpKind::FieldExtract: {
      int i = in_types[0].entry_index(n.name);
      return in[0].elems()[static_cast<size_t>(i)];
    }
    case OpKind::ArrayIndex: {
      uint64_t i = std::min<uint64_t>(uns(1), in_types[0].count() - 1);
      return in[0].elems()[i];
    }
    case OpKind::UnionPack:
      return Value::of_union(static_cast<uint32_t>(n.type.entry_index(n.name)), in[0]);
    case OpKind::TagOf: return Value::of_uint(in[0].tag());
    case OpKind::UnwrapVariant: {
      const HWType& u = in_types[0];
      uint32_t want = static_cast<uint32_t>(u.entry_index(n.name));
      const HWType& want_t = u.variants()[want].type;
      if (in[0].tag() == want) return in[0].payload();
      const HWType& got_t = u.variants()[in[0].tag()].type;
      BitVector raw = encode(in[0].payload(), got_t);
      return reinterpret_bits(detail::fit_bits(raw, bit_width(want_t)), want_t);
    }
    case OpKind::InputPort:
    case OpKind::Delay: break;
  }
  throw Error(std::string("eval_op cannot fire ") + op_name(n.kind));
}

} // namespace llpm
