#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmf {

// Fixed-length Boolean vector packed into 64-bit words. Bits at positions at
// or beyond size() are kept zero at all times, so popcounts and bitwise ops
// can run over raw words without masking.
class BitVec {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitVec() = default;
  explicit BitVec(std::size_t n) : n_(n), w_(word_count(n), 0) {}

  static std::size_t word_count(std::size_t bits) {
    return (bits + kWordBits - 1) / kWordBits;
  }

  static BitVec ones(std::size_t n) {
    BitVec v(n);
    for (Word& w : v.w_) w = ~Word{0};
    v.zero_tail();
    return v;
  }

  static BitVec from_bits(const std::vector<int>& bits) {
    BitVec v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) v.set(i);
    return v;
  }

  // Parses a compact "0101" string.
  static BitVec parse(const std::string& s) {
    BitVec v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
        v.set(i);
      else if (s[i] != '0')
        throw std::invalid_argument("BitVec::parse: expected only '0'/'1'");
    }
    return v;
  }

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  bool get(std::size_t i) const {
    assert(i < n_ && "bit index out of range");
    return (w_[i / kWordBits] >> (i % kWordBits)) & Word{1};
  }

  void set(std::size_t i, bool v = true) {
    assert(i < n_ && "bit index out of range");
    const Word m = Word{1} << (i % kWordBits);
    if (v)
      w_[i / kWordBits] |= m;
    else
      w_[i / kWordBits] &= ~m;
  }

  void reset(std::size_t i) { set(i, false); }

  void flip(std::size_t i) {
    assert(i < n_ && "bit index out of range");
    w_[i / kWordBits] ^= Word{1} << (i % kWordBits);
  }

  void clear() {
    for (Word& w : w_) w = 0;
  }

  std::uint64_t count() const {
    std::uint64_t c = 0;
    for (Word w : w_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  bool none() const {
    for (Word w : w_)
      if (w) return false;
    return true;
  }
  bool any() const { return !none(); }

  BitVec& operator|=(const BitVec& o) {
    check_same_length(o);
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  BitVec& operator&=(const BitVec& o) {
    check_same_length(o);
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  BitVec& operator^=(const BitVec& o) {
    check_same_length(o);
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    return *this;
  }

  friend BitVec operator|(BitVec a, const BitVec& b) { return a |= b; }
  friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }
  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }

  bool operator==(const BitVec& o) const { return n_ == o.n_ && w_ == o.w_; }
  bool operator!=(const BitVec& o) const { return !(*this == o); }

  // Mixes the content into a 64-bit key; used for pool deduplication buckets.
  std::uint64_t hash() const {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(n_);
    for (Word w : w_) {
      h ^= w;
      h *= 0xBF58476D1CE4E5B9ull;
      h ^= h >> 29;
    }
    return h;
  }

  template <class F>
  void for_each_set(F&& f) const {
    for (std::size_t wi = 0; wi < w_.size(); ++wi) {
      Word w = w_[wi];
      while (w) {
        f(wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

  const std::vector<Word>& words() const { return w_; }

  std::string to_string() const {
    std::string s(n_, '0');
    for_each_set([&](std::size_t i) { s[i] = '1'; });
    return s;
  }

 private:
  void check_same_length(const BitVec& o) const {
    if (n_ != o.n_) throw std::invalid_argument("BitVec length mismatch");
  }
  void zero_tail() {
    if (n_ % kWordBits) w_.back() &= (Word{1} << (n_ % kWordBits)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<Word> w_;

  friend std::uint64_t and_count(const BitVec&, const BitVec&);
  friend std::uint64_t hamming(const BitVec&, const BitVec&);
  friend std::uint64_t masked_hamming(const BitVec&, const BitVec&, const BitVec&);
  friend std::uint64_t masked_or_mismatch(const BitVec&, const BitVec&, const BitVec&, const BitVec&);
  friend BitVec and_andnot(const BitVec&, const BitVec&, const BitVec&);
  friend void or_shifted(BitVec&, std::size_t, const BitVec&);
};

inline std::uint64_t and_count(const BitVec& a, const BitVec& b) {
  a.check_same_length(b);
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < a.w_.size(); ++i)
    c += static_cast<std::uint64_t>(std::popcount(a.w_[i] & b.w_[i]));
  return c;
}

// Number of positions where a and b differ; equals the squared Frobenius
// distance between the two 0/1 vectors.
inline std::uint64_t hamming(const BitVec& a, const BitVec& b) {
  a.check_same_length(b);
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < a.w_.size(); ++i)
    c += static_cast<std::uint64_t>(std::popcount(a.w_[i] ^ b.w_[i]));
  return c;
}

inline std::uint64_t masked_hamming(const BitVec& mask, const BitVec& a, const BitVec& b) {
  mask.check_same_length(a);
  mask.check_same_length(b);
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < a.w_.size(); ++i)
    c += static_cast<std::uint64_t>(std::popcount(mask.w_[i] & (a.w_[i] ^ b.w_[i])));
  return c;
}

// Mismatch count of x against (cover | extra) under mask, without
// materializing the union. Hot path of the greedy solver.
inline std::uint64_t masked_or_mismatch(const BitVec& mask, const BitVec& x, const BitVec& cover,
                                        const BitVec& extra) {
  mask.check_same_length(x);
  mask.check_same_length(cover);
  mask.check_same_length(extra);
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < x.w_.size(); ++i)
    c += static_cast<std::uint64_t>(
        std::popcount(mask.w_[i] & (x.w_[i] ^ (cover.w_[i] | extra.w_[i]))));
  return c;
}

// a & b & ~c, computed word-wise. Safe because a's tail bits are zero.
inline BitVec and_andnot(const BitVec& a, const BitVec& b, const BitVec& c) {
  a.check_same_length(b);
  a.check_same_length(c);
  BitVec out(a.size());
  for (std::size_t i = 0; i < a.w_.size(); ++i) out.w_[i] = a.w_[i] & b.w_[i] & ~c.w_[i];
  return out;
}

// OR `src` into `dst` starting at bit `offset`. Used to build flattened
// outer products row by row.
inline void or_shifted(BitVec& dst, std::size_t offset, const BitVec& src) {
  assert(offset + src.size() <= dst.size());
  if (src.empty()) return;
  const std::size_t base = offset / BitVec::kWordBits;
  const unsigned sh = static_cast<unsigned>(offset % BitVec::kWordBits);
  for (std::size_t t = 0; t < src.w_.size(); ++t) {
    const BitVec::Word w = src.w_[t];
    if (!w) continue;
    dst.w_[base + t] |= w << sh;
    if (sh && base + t + 1 < dst.w_.size()) dst.w_[base + t + 1] |= w >> (BitVec::kWordBits - sh);
  }
}

}  // namespace bmf
