#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "llpm/bitvec.hpp"
#include "llpm/diagnostics.hpp"
#include "llpm/prng.hpp"

namespace llpm {

enum class TypeKind { Void, Bits, UInt, SInt, Array, Struct, Union };

class HWType;

struct TypeField;
struct TypeNode;

// Structural hardware data type. Immutable and cheaply copyable; every
// channel, port and register in the toolchain carries one of these.
// Equality is structural, including field/variant names and order.
//
// Scalar widths are 1..64 (values travel in native 64-bit words);
// aggregates compose to arbitrary total widths.
class HWType {
public:
  HWType() = default; // void

  static HWType make_void();
  static HWType make_bits(uint32_t width);
  static HWType make_uint(uint32_t width);
  static HWType make_sint(uint32_t width);
  static HWType make_array(HWType elem, uint32_t count);
  static HWType make_struct(std::vector<TypeField> fields);
  static HWType make_union(std::vector<TypeField> variants);

  TypeKind kind() const;
  bool is_void() const { return kind() == TypeKind::Void; }
  bool is_scalar() const {
    auto k = kind();
    return k == TypeKind::Bits || k == TypeKind::UInt || k == TypeKind::SInt;
  }

  uint32_t width() const;               // Bits/UInt/SInt
  const HWType& elem() const;           // Array
  uint32_t count() const;               // Array
  const std::vector<TypeField>& fields() const;   // Struct
  const std::vector<TypeField>& variants() const; // Union
  uint32_t tag_width() const;           // Union: ceil(log2(#variants)), 1 variant -> 0
  // index of a field/variant by name, or -1
  int entry_index(std::string_view name) const;

  bool operator==(const HWType& o) const;
  bool operator!=(const HWType& o) const { return !(*this == o); }

private:
  explicit HWType(std::shared_ptr<const TypeNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const TypeNode> node_;
};

struct TypeField {
  std::string name;
  HWType type;
  bool operator==(const TypeField& o) const {
    return name == o.name && type == o.type;
  }
};

struct TypeNode {
  TypeKind kind = TypeKind::Void;
  uint32_t width = 0; // scalars
  uint32_t count = 0; // arrays
  HWType elem;        // arrays
  std::vector<TypeField> entries; // struct fields / union variants
};

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

namespace detail {

inline constexpr uint32_t max_scalar_width = 64;

inline void check_scalar_width(uint32_t w, const char* what) {
  if (w < 1) throw Error(std::string(what) + " width must be >= 1");
  if (w > max_scalar_width)
    throw Error(std::string(what) + " width " + std::to_string(w) +
                " exceeds the supported maximum of 64");
}

inline void check_entries(const std::vector<TypeField>& entries, const char* what) {
  if (entries.empty()) throw Error(std::string(what) + " needs at least one entry");
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!is_identifier(entries[i].name))
      throw Error(std::string(what) + " entry name '" + entries[i].name +
                  "' is not an identifier");
    for (size_t j = 0; j < i; ++j)
      if (entries[i].name == entries[j].name)
        throw Error(std::string(what) + " has duplicate entry '" + entries[i].name + "'");
  }
}

} // namespace detail

inline HWType HWType::make_void() { return HWType(); }

inline HWType HWType::make_bits(uint32_t width) {
  detail::check_scalar_width(width, "bits");
  auto n = std::make_shared<TypeNode>();
  n->kind = TypeKind::Bits;
  n->width = width;
  return HWType(std::move(n));
}

inline HWType HWType::make_uint(uint32_t width) {
  detail::check_scalar_width(width, "uint");
  auto n = std::make_shared<TypeNode>();
  n->kind = TypeKind::UInt;
  n->width = width;
  return HWType(std::move(n));
}

inline HWType HWType::make_sint(uint32_t width) {
  detail::check_scalar_width(width, "sint");
  auto n = std::make_shared<TypeNode>();
  n->kind = TypeKind::SInt;
  n->width = width;
  return HWType(std::move(n));
}

inline HWType HWType::make_array(HWType elem, uint32_t count) {
  if (count < 1) throw Error("array count must be >= 1");
  auto n = std::make_shared<TypeNode>();
  n->kind = TypeKind::Array;
  n->elem = std::move(elem);
  n->count = count;
  return HWType(std::move(n));
}

inline HWType HWType::make_struct(std::vector<TypeField> fields) {
  detail::check_entries(fields, "struct");
  auto n = std::make_shared<TypeNode>();
  n->kind = TypeKind::Struct;
  n->entries = std::move(fields);
  return HWType(std::move(n));
}

inline HWType HWType::make_union(std::vector<TypeField> variants) {
  detail::check_entries(variants, "union");
  auto n = std::make_shared<TypeNode>();
  n->kind = TypeKind::Union;
  n->entries = std::move(variants);
  return HWType(std::move(n));
}

inline TypeKind HWType::kind() const {
  return node_ ? node_->kind : TypeKind::Void; // void carries no node
}
inline uint32_t HWType::width() const { return node_->width; }
inline const HWType& HWType::elem() const { return node_->elem; }
inline uint32_t HWType::count() const { return node_->count; }
inline const std::vector<TypeField>& HWType::fields() const { return node_->entries; }
inline const std::vector<TypeField>& HWType::variants() const { return node_->entries; }

inline uint32_t HWType::tag_width() const {
  size_t n = node_->entries.size();
  return n <= 1 ? 0 : std::bit_width(n - 1);
}

inline int HWType::entry_index(std::string_view name) const {
  for (size_t i = 0; i < node_->entries.size(); ++i)
    if (node_->entries[i].name == name) return static_cast<int>(i);
  return -1;
}

inline bool HWType::operator==(const HWType& o) const {
  if (node_ == o.node_) return true;
  if (kind() != o.kind()) return false;
  switch (kind()) {
    case TypeKind::Void: return true;
    case TypeKind::Bits:
    case TypeKind::UInt:
    case TypeKind::SInt: return node_->width == o.node_->width;
    case TypeKind::Array:
      return node_->count == o.node_->count && node_->elem == o.node_->elem;
    case TypeKind::Struct:
    case TypeKind::Union: return node_->entries == o.node_->entries;
  }
  return false;
}

// total bit width of the canonical encoding
inline uint64_t bit_width(const HWType& t) {
  switch (t.kind()) {
    case TypeKind::Void: return 0;
    case TypeKind::Bits:
    case TypeKind::UInt:
    case TypeKind::SInt: return t.width();
    case TypeKind::Array: {
      uint64_t w = bit_width(t.elem()) * t.count();
      if (w > (uint64_t{1} << 32)) throw Error("type wider than 2^32 bits");
      return w;
    }
    case TypeKind::Struct: {
      uint64_t w = 0;
      for (const auto& f : t.fields()) w += bit_width(f.type);
      if (w > (uint64_t{1} << 32)) throw Error("type wider than 2^32 bits");
      return w;
    }
    case TypeKind::Union: {
      uint64_t payload = 0;
      for (const auto& v : t.variants())
        payload = std::max(payload, bit_width(v.type));
      return t.tag_width() + payload;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Values

// A token: one value of some HWType. The shape mirrors the type tree; a
// Value is only meaningful against the type it was built for.
class Value {
public:
  struct UnionVal {
    uint32_t tag = 0;
    std::shared_ptr<const Value> payload;
    bool operator==(const UnionVal& o) const;
  };

  Value() : v_(std::monostate{}) {}

  static Value unit() { return Value(); }
  static Value of_uint(uint64_t raw) { return Value(Rep(raw)); }
  static Value of_sint(int64_t v) { return Value(Rep(v)); }
  static Value of_list(std::vector<Value> elems) { return Value(Rep(std::move(elems))); }
  static Value of_union(uint32_t tag, Value payload) {
    UnionVal u{tag, std::make_shared<Value>(std::move(payload))};
    return Value(Rep(std::move(u)));
  }

  bool is_unit() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_uint() const { return std::holds_alternative<uint64_t>(v_); }
  bool is_sint() const { return std::holds_alternative<int64_t>(v_); }
  bool is_list() const { return std::holds_alternative<std::vector<Value>>(v_); }
  bool is_union() const { return std::holds_alternative<UnionVal>(v_); }

  uint64_t as_uint() const { return std::get<uint64_t>(v_); }
  int64_t as_sint() const { return std::get<int64_t>(v_); }
  const std::vector<Value>& elems() const { return std::get<std::vector<Value>>(v_); }
  uint32_t tag() const { return std::get<UnionVal>(v_).tag; }
  const Value& payload() const { return *std::get<UnionVal>(v_).payload; }

  bool operator==(const Value& o) const { return v_ == o.v_; }
  bool operator!=(const Value& o) const { return !(*this == o); }

private:
  using Rep = std::variant<std::monostate, uint64_t, int64_t, std::vector<Value>, UnionVal>;
  explicit Value(Rep v) : v_(std::move(v)) {}
  Rep v_;
};

inline bool Value::UnionVal::operator==(const UnionVal& o) const {
  return tag == o.tag && *payload == *o.payload;
}

namespace detail {

inline uint64_t mask_for(uint32_t width) {
  return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

inline int64_t sign_extend(uint64_t raw, uint32_t width) {
  if (width >= 64) return static_cast<int64_t>(raw);
  uint64_t sign = uint64_t{1} << (width - 1);
  return static_cast<int64_t>((raw ^ sign) - sign);
}

inline bool sint_in_range(int64_t v, uint32_t width) {
  if (width >= 64) return true;
  int64_t hi = int64_t{1} << (width - 1);
  return v >= -hi && v < hi;
}

[[noreturn]] inline void value_mismatch(const std::string& path, const std::string& why) {
  throw Error("ill-typed value at " + (path.empty() ? std::string("<root>") : path) +
              ": " + why);
}

inline void check_value_at(const Value& v, const HWType& t, const std::string& path);

} // namespace detail

// throws with a path into the value tree on the first mismatch
inline void check_value(const Value& v, const HWType& t) {
  detail::check_value_at(v, t, "");
}

inline bool is_well_typed(const Value& v, const HWType& t) {
  try {
    check_value(v, t);
    return true;
  } catch (const Error&) {
    return false;
  }
}

namespace detail {

inline void check_value_at(const Value& v, const HWType& t, const std::string& path) {
  switch (t.kind()) {
    case TypeKind::Void:
      if (!v.is_unit()) value_mismatch(path, "expected void unit value");
      return;
    case TypeKind::Bits:
    case TypeKind::UInt:
      if (!v.is_uint()) value_mismatch(path, "expected an unsigned integer");
      if (t.width() < 64 && v.as_uint() > mask_for(t.width()))
        value_mismatch(path, "value " + std::to_string(v.as_uint()) +
                                 " out of range for width " + std::to_string(t.width()));
      return;
    case TypeKind::SInt:
      if (!v.is_sint()) value_mismatch(path, "expected a signed integer");
      if (!sint_in_range(v.as_sint(), t.width()))
        value_mismatch(path, "value " + std::to_string(v.as_sint()) +
                                 " out of range for sint<" + std::to_string(t.width()) + ">");
      return;
    case TypeKind::Array: {
      if (!v.is_list()) value_mismatch(path, "expected an array value");
      if (v.elems().size() != t.count())
        value_mismatch(path, "array has " + std::to_string(v.elems().size()) +
                                 " elements, type wants " + std::to_string(t.count()));
      for (size_t i = 0; i < v.elems().size(); ++i)
        check_value_at(v.elems()[i], t.elem(), path + "[" + std::to_string(i) + "]");
      return;
    }
    case TypeKind::Struct: {
      if (!v.is_list()) value_mismatch(path, "expected a struct value");
      if (v.elems().size() != t.fields().size())
        value_mismatch(path, "struct has " + std::to_string(v.elems().size()) +
                                 " fields, type wants " + std::to_string(t.fields().size()));
      for (size_t i = 0; i < v.elems().size(); ++i)
        check_value_at(v.elems()[i], t.fields()[i].type, path + "." + t.fields()[i].name);
      return;
    }
    case TypeKind::Union: {
      if (!v.is_union()) value_mismatch(path, "expected a union value");
      if (v.tag() >= t.variants().size())
        value_mismatch(path, "union tag " + std::to_string(v.tag()) + " out of range");
      const auto& var = t.variants()[v.tag()];
      check_value_at(v.payload(), var.type, path + "." + var.name);
      return;
    }
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Canonical bit-level encoding.
//
// Layout (bit 0 = LSB): scalars are unsigned / two's-complement binary;
// array element 0 and the first declared struct field sit at the LSB; a
// union packs its tag (declaration index) at the LSB, the payload directly
// above it, zero-padded to the widest variant.

namespace detail {
inline void encode_at(const Value& v, const HWType& t, BitVector& out, size_t pos,
                      const std::string& path);
}

inline BitVector encode(const Value& v, const HWType& t) {
  check_value(v, t);
  BitVector out(bit_width(t));
  detail::encode_at(v, t, out, 0, "");
  return out;
}

namespace detail {

inline void encode_at(const Value& v, const HWType& t, BitVector& out, size_t pos,
                      const std::string& path) {
  switch (t.kind()) {
    case TypeKind::Void:
      return;
    case TypeKind::Bits:
    case TypeKind::UInt:
      out.splice(pos, BitVector::from_uint(v.as_uint(), t.width()));
      return;
    case TypeKind::SInt:
      out.splice(pos, BitVector::from_uint(static_cast<uint64_t>(v.as_sint()), t.width()));
      return;
    case TypeKind::Array: {
      uint64_t ew = bit_width(t.elem());
      for (size_t i = 0; i < t.count(); ++i)
        encode_at(v.elems()[i], t.elem(), out, pos + i * ew,
                  path + "[" + std::to_string(i) + "]");
      return;
    }
    case TypeKind::Struct: {
      size_t off = 0;
      for (size_t i = 0; i < t.fields().size(); ++i) {
        encode_at(v.elems()[i], t.fields()[i].type, out, pos + off,
                  path + "." + t.fields()[i].name);
        off += bit_width(t.fields()[i].type);
      }
      return;
    }
    case TypeKind::Union: {
      out.splice(pos, BitVector::from_uint(v.tag(), t.tag_width()));
      encode_at(v.payload(), t.variants()[v.tag()].type, out, pos + t.tag_width(),
                path + "." + t.variants()[v.tag()].name);
      return;
    }
  }
}

inline Value decode_at(const BitVector& bits, const HWType& t, size_t pos, bool strict);

} // namespace detail

// exact inverse of encode on encode's image; rejects wrong-length patterns
// and out-of-range union tags
inline Value decode(const BitVector& bits, const HWType& t) {
  if (bits.size() != bit_width(t))
    throw Error("bit pattern has " + std::to_string(bits.size()) +
                " bits, type needs " + std::to_string(bit_width(t)));
  return detail::decode_at(bits, t, 0, /*strict=*/true);
}

// Total reinterpretation of raw bits: like decode but folds out-of-range
// union tags mod the variant count. Backs tag-mismatched UnwrapVariant.
inline Value reinterpret_bits(const BitVector& bits, const HWType& t) {
  if (bits.size() != bit_width(t))
    throw Error("bit pattern has " + std::to_string(bits.size()) +
                " bits, type needs " + std::to_string(bit_width(t)));
  return detail::decode_at(bits, t, 0, /*strict=*/false);
}

namespace detail {

inline Value decode_at(const BitVector& bits, const HWType& t, size_t pos, bool strict) {
  switch (t.kind()) {
    case TypeKind::Void:
      return Value::unit();
    case TypeKind::Bits:
    case TypeKind::UInt:
      return Value::of_uint(bits.slice(pos, t.width()).to_uint());
    case TypeKind::SInt:
      return Value::of_sint(sign_extend(bits.slice(pos, t.width()).to_uint(), t.width()));
    case TypeKind::Array: {
      uint64_t ew = bit_width(t.elem());
      std::vector<Value> elems;
      elems.reserve(t.count());
      for (size_t i = 0; i < t.count(); ++i)
        elems.push_back(decode_at(bits, t.elem(), pos + i * ew, strict));
      return Value::of_list(std::move(elems));
    }
    case TypeKind::Struct: {
      std::vector<Value> fields;
      fields.reserve(t.fields().size());
      size_t off = 0;
      for (const auto& f : t.fields()) {
        fields.push_back(decode_at(bits, f.type, pos + off, strict));
        off += bit_width(f.type);
      }
      return Value::of_list(std::move(fields));
    }
    case TypeKind::Union: {
      uint64_t tag = t.tag_width() ? bits.slice(pos, t.tag_width()).to_uint() : 0;
      size_t n = t.variants().size();
      if (tag >= n) {
        if (strict)
          throw Error("union tag " + std::to_string(tag) + " out of range (" +
                      std::to_string(n) + " variants)");
        tag %= n;
      }
      const auto& var = t.variants()[static_cast<size_t>(tag)];
      // payload region is zero-padded to the max variant width; reading the
      // low bit_width(var) bits matches the encoder exactly
      Value payload = decode_at(bits, var.type, pos + t.tag_width(), strict);
      return Value::of_union(static_cast<uint32_t>(tag), std::move(payload));
    }
  }
  return Value::unit();
}

} // namespace detail

// uniformly random well-typed value; used by verification harnesses
inline Value random_value(const HWType& t, Prng& rng) {
  switch (t.kind()) {
    case TypeKind::Void:
      return Value::unit();
    case TypeKind::Bits:
    case TypeKind::UInt:
      return Value::of_uint(rng.next() & detail::mask_for(t.width()));
    case TypeKind::SInt:
      return Value::of_sint(detail::sign_extend(rng.next() & detail::mask_for(t.width()), t.width()));
    case TypeKind::Array: {
      std::vector<Value> elems;
      for (size_t i = 0; i < t.count(); ++i) elems.push_back(random_value(t.elem(), rng));
      return Value::of_list(std::move(elems));
    }
    case TypeKind::Struct: {
      std::vector<Value> fields;
      for (const auto& f : t.fields()) fields.push_back(random_value(f.type, rng));
      return Value::of_list(std::move(fields));
    }
    case TypeKind::Union: {
      uint32_t tag = static_cast<uint32_t>(rng.below(t.variants().size()));
      return Value::of_union(tag, random_value(t.variants()[tag].type, rng));
    }
  }
  return Value::unit();
}

// the all-zero-bits value of a type (union: variant 0)
inline Value zero_value(const HWType& t) {
  return detail::decode_at(BitVector(bit_width(t)), t, 0, /*strict=*/true);
}

// compact literal form for messages: 5, -3, [1, 2], #B(1), ()
inline std::string print_value(const Value& v) {
  if (v.is_unit()) return "()";
  if (v.is_uint()) return std::to_string(v.as_uint());
  if (v.is_sint()) return std::to_string(v.as_sint());
  if (v.is_list()) {
    std::string out = "[";
    for (size_t i = 0; i < v.elems().size(); ++i)
      out += (i ? ", " : "") + print_value(v.elems()[i]);
    return out + "]";
  }
  return "#" + std::to_string(v.tag()) + "(" + print_value(v.payload()) + ")";
}

// ---------------------------------------------------------------------------
// Canonical text syntax:
//   void | bits<N> | uint<N> | sint<N> | array<T, N>
//        | struct{name: T, ...} | union{name: T, ...}

inline std::string print_type(const HWType& t) {
  switch (t.kind()) {
    case TypeKind::Void: return "void";
    case TypeKind::Bits: return "bits<" + std::to_string(t.width()) + ">";
    case TypeKind::UInt: return "uint<" + std::to_string(t.width()) + ">";
    case TypeKind::SInt: return "sint<" + std::to_string(t.width()) + ">";
    case TypeKind::Array:
      return "array<" + print_type(t.elem()) + ", " + std::to_string(t.count()) + ">";
    case TypeKind::Struct:
    case TypeKind::Union: {
      std::string out = t.kind() == TypeKind::Struct ? "struct{" : "union{";
      bool first = true;
      for (const auto& e : t.fields()) {
        if (!first) out += ", ";
        first = false;
        out += e.name + ": " + print_type(e.type);
      }
      return out + "}";
    }
  }
  return "void";
}

namespace detail {

class TypeParser {
public:
  explicit TypeParser(std::string_view text) : text_(text) {}

  HWType parse() {
    HWType t = parse_type();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after type");
    return t;
  }

private:
  std::string_view text_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip_ws();
    size_t start = pos_;
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
    }
    if (start == pos_) fail("expected an identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  uint32_t number(const char* what) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '-')
      fail(std::string(what) + " must be positive");
    size_t start = pos_;
    uint64_t v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + static_cast<uint64_t>(text_[pos_] - '0');
      if (v > 0xffffffffull) fail(std::string(what) + " is too large");
      ++pos_;
    }
    if (start == pos_) fail(std::string("expected a ") + what);
    if (v == 0) fail(std::string(what) + " must be positive");
    return static_cast<uint32_t>(v);
  }

  HWType parse_type() {
    std::string kw = ident();
    if (kw == "void") return HWType::make_void();
    if (kw == "bits" || kw == "uint" || kw == "sint") {
      expect('<');
      uint32_t w = number("width");
      expect('>');
      try {
        if (kw == "bits") return HWType::make_bits(w);
        if (kw == "uint") return HWType::make_uint(w);
        return HWType::make_sint(w);
      } catch (const Error& e) {
        fail(e.what());
      }
    }
    if (kw == "array") {
      expect('<');
      HWType elem = parse_type();
      expect(',');
      uint32_t n = number("count");
      expect('>');
      return HWType::make_array(std::move(elem), n);
    }
    if (kw == "struct" || kw == "union") {
      expect('{');
      std::vector<TypeField> entries;
      do {
        std::string name = ident();
        expect(':');
        entries.push_back({std::move(name), parse_type()});
      } while (eat(','));
      expect('}');
      try {
        return kw == "struct" ? HWType::make_struct(std::move(entries))
                              : HWType::make_union(std::move(entries));
      } catch (const Error& e) {
        fail(e.what());
      }
    }
    fail("unknown type keyword '" + kw + "'");
  }
};

} // namespace detail

inline HWType parse_type(std::string_view text) {
  return detail::TypeParser(text).parse();
}

} // namespace llpm
