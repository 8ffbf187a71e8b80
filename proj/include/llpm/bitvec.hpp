#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llpm/diagnostics.hpp"

namespace llpm {

// Fixed-length bit pattern. Bit 0 is the LSB; storage is little-endian
// 64-bit words. Length 0 is valid (the encoding of void).
class BitVector {
public:
  BitVector() = default;
  explicit BitVector(size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  static BitVector from_uint(uint64_t value, size_t size) {
    BitVector b(size);
    if (size == 0) return b;
    if (size < 64) value &= (uint64_t{1} << size) - 1;
    if (!b.words_.empty()) b.words_[0] = value;
    return b;
  }

  size_t size() const { return size_; }

  bool get(size_t i) const {
    return (words_[i / 64] >> (i % 64)) & 1;
  }

  void set(size_t i, bool v) {
    uint64_t mask = uint64_t{1} << (i % 64);
    if (v)
      words_[i / 64] |= mask;
    else
      words_[i / 64] &= ~mask;
  }

  // write src into bits [pos, pos + src.size())
  void splice(size_t pos, const BitVector& src) {
    for (size_t i = 0; i < src.size_; ++i) set(pos + i, src.get(i));
  }

  BitVector slice(size_t pos, size_t len) const {
    BitVector out(len);
    for (size_t i = 0; i < len; ++i) out.set(i, get(pos + i));
    return out;
  }

  // low 64 bits, regardless of length
  uint64_t low_uint() const { return words_.empty() ? 0 : words_[0]; }

  uint64_t to_uint() const {
    if (size_ > 64) throw Error("bit pattern wider than 64 bits");
    return low_uint();
  }

  // 32-bit words for register-map transport, word 0 = bits [0,32)
  std::vector<uint32_t> to_words32() const {
    std::vector<uint32_t> out((size_ + 31) / 32, 0);
    for (size_t w = 0; w < out.size(); ++w) {
      uint64_t word = words_[w / 2];
      out[w] = static_cast<uint32_t>(w % 2 ? word >> 32 : word & 0xffffffffull);
    }
    return out;
  }

  // MSB-first, e.g. 5 as 4 bits -> "0101"; empty pattern -> ""
  std::string to_string() const {
    std::string s(size_, '0');
    for (size_t i = 0; i < size_; ++i)
      if (get(i)) s[size_ - 1 - i] = '1';
    return s;
  }

  static BitVector parse(const std::string& text) {
    BitVector b(text.size());
    for (size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      if (c != '0' && c != '1') throw ParseError(i, "expected '0' or '1'");
      b.set(text.size() - 1 - i, c == '1');
    }
    return b;
  }

  // lowercase hex, MSB-first nibbles, no prefix; "" for length 0
  std::string to_hex() const {
    if (size_ == 0) return "";
    size_t nibbles = (size_ + 3) / 4;
    std::string s(nibbles, '0');
    static const char* digits = "0123456789abcdef";
    for (size_t n = 0; n < nibbles; ++n) {
      unsigned v = 0;
      for (size_t b = 0; b < 4; ++b) {
        size_t i = n * 4 + b;
        if (i < size_ && get(i)) v |= 1u << b;
      }
      s[nibbles - 1 - n] = digits[v];
    }
    return s;
  }

  bool operator==(const BitVector& o) const {
    return size_ == o.size_ && words_ == o.words_;
  }

private:
  size_t size_ = 0;
  std::vector<uint64_t> words_;
};

} // namespace llpm
