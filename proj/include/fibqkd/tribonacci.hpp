#ifndef FIBQKD_TRIBONACCI_HPP
#define FIBQKD_TRIBONACCI_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fibqkd/errors.hpp"

namespace fibqkd {

using Index = int;
using Value = std::uint64_t;
using Bit = std::uint8_t;

enum class Position { Center, Edge };
enum class Side { Left, Right };

inline constexpr Index kMaxIndex = 73; // F_74 overflows 64 bits

/// Third-order Fibonacci number seeded F_1 = 1, F_2 = 2, F_3 = 3.
inline Value tribonacci(Index n) {
  if (n < 1) throw DomainError("tribonacci: index must be >= 1, got " + std::to_string(n));
  Value a = 1, b = 2, c = 3;
  if (n == 1) return a;
  if (n == 2) return b;
  for (Index i = 4; i <= n; ++i) {
    Value next = 0;
    if (__builtin_add_overflow(a, b, &next) || __builtin_add_overflow(next, c, &next))
      throw std::overflow_error("tribonacci: F_" + std::to_string(n) + " exceeds 64 bits");
    a = b;
    b = c;
    c = next;
  }
  return c;
}

/// Allocated bit: 0 iff n mod 8 is in {1, 2, 3, 4}. B_0 is defined as 1.
inline constexpr Bit bit_alloc(Index n) noexcept {
  const int r = ((n % 8) + 8) % 8;
  return (r >= 1 && r <= 4) ? Bit{0} : Bit{1};
}

inline constexpr Position position_class(Index n) noexcept {
  const int r = ((n % 4) + 4) % 4;
  return (r == 2 || r == 3) ? Position::Center : Position::Edge;
}

/// Which end of its run of equal bits an edge index sits on. A left edge
/// starts a run (B_{n-1} != B_n = B_{n+1}); a right edge closes one.
inline Side edge_side(Index n) {
  if (position_class(n) != Position::Edge)
    throw DomainError("edge_side: index " + std::to_string(n) + " is a center index");
  const int r = ((n % 8) + 8) % 8;
  return (r == 1 || r == 5) ? Side::Left : Side::Right;
}

/// Consecutive triple (F_{n-1}, F_{n-2}, F_{n-3}) whose sum is F_n.
inline std::array<Value, 3> consecutive_triple(Index n) {
  if (n < 4) throw DomainError("consecutive_triple: pump index must be >= 4, got " + std::to_string(n));
  return {tribonacci(n - 1), tribonacci(n - 2), tribonacci(n - 3)};
}

struct CodeEntry {
  Index n;
  Value value;
  Bit bit;
  Position pos;
  std::optional<Side> side;

  friend bool operator==(const CodeEntry&, const CodeEntry&) = default;
};

/// Immutable table of F_1..F_{n_max} with their bit allocation and position
/// classes.
class CodeTable {
public:
  explicit CodeTable(Index n_max) : n_max_(n_max) {
    if (n_max < 1) throw DomainError("CodeTable: n_max must be >= 1");
    if (n_max > kMaxIndex) throw std::overflow_error("CodeTable: n_max exceeds 64-bit range");
    entries_.reserve(static_cast<std::size_t>(n_max));
    for (Index n = 1; n <= n_max; ++n) {
      Value v = 0;
      if (n <= 3) {
        v = static_cast<Value>(n);
      } else {
        const auto sz = entries_.size();
        v = entries_[sz - 1].value + entries_[sz - 2].value + entries_[sz - 3].value;
      }
      const Position pos = position_class(n);
      std::optional<Side> side;
      if (pos == Position::Edge) side = edge_side(n);
      entries_.push_back({n, v, bit_alloc(n), pos, side});
    }
  }

  Index n_min() const noexcept { return 1; }
  Index n_max() const noexcept { return n_max_; }
  const std::vector<CodeEntry>& entries() const noexcept { return entries_; }

  const CodeEntry& at(Index n) const {
    if (n < 1 || n > n_max_)
      throw DomainError("CodeTable: index " + std::to_string(n) + " outside [1, " +
                        std::to_string(n_max_) + "]");
    return entries_[static_cast<std::size_t>(n - 1)];
  }

  Value value(Index n) const { return at(n).value; }

  /// Index of a table value, if it is one.
  std::optional<Index> index_of(Value v) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                               [](const CodeEntry& e, Value x) { return e.value < x; });
    if (it == entries_.end() || it->value != v) return std::nullopt;
    // F_1..F_3 are 1, 2, 3 and the sequence is strictly increasing, so the
    // value determines the index.
    return it->n;
  }

  bool contains(Value v) const noexcept { return index_of(v).has_value(); }

private:
  Index n_max_;
  std::vector<CodeEntry> entries_;
};

/// Fixed-width block of key bits, most significant bit first.
struct BitBlock {
  std::uint64_t bits = 0;
  unsigned width = 0;

  Bit at(unsigned i) const noexcept { return static_cast<Bit>((bits >> (width - 1 - i)) & 1U); }

  std::string str() const {
    std::string s(width, '0');
    for (unsigned i = 0; i < width; ++i) s[i] = static_cast<char>('0' + at(i));
    return s;
  }

  friend bool operator==(const BitBlock&, const BitBlock&) = default;
};

/// Assigns log2(N)-bit blocks to the N consecutive values F_{n_0}..F_{n_0+N-1}
/// in ascending order.
class BlockCode {
public:
  BlockCode(unsigned set_size, Index base_index) : set_size_(set_size), base_(base_index) {
    if (set_size < 2 || !std::has_single_bit(set_size))
      throw ConfigError("BlockCode: set size must be a power of two >= 2");
    if (base_index < 1) throw ConfigError("BlockCode: base index must be >= 1");
    if (base_index + static_cast<Index>(set_size) - 1 > kMaxIndex)
      throw std::overflow_error("BlockCode: code set exceeds 64-bit range");
    width_ = static_cast<unsigned>(std::countr_zero(set_size));
    for (unsigned i = 0; i < set_size; ++i) values_.push_back(tribonacci(base_ + static_cast<Index>(i)));
  }

  unsigned set_size() const noexcept { return set_size_; }
  Index base_index() const noexcept { return base_; }
  Index last_index() const noexcept { return base_ + static_cast<Index>(set_size_) - 1; }
  unsigned width() const noexcept { return width_; }
  const std::vector<Value>& values() const noexcept { return values_; }

  bool contains(Value v) const noexcept { return std::binary_search(values_.begin(), values_.end(), v); }

  BitBlock encode(Value v) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), v);
    if (it == values_.end() || *it != v)
      throw DomainError("block_code: value " + std::to_string(v) + " is not in the code set");
    return {static_cast<std::uint64_t>(it - values_.begin()), width_};
  }

  Value decode(const BitBlock& block) const {
    if (block.width != width_ || block.bits >= set_size_)
      throw DomainError("block_code: block does not belong to this code");
    return values_[block.bits];
  }

private:
  unsigned set_size_;
  Index base_;
  unsigned width_ = 0;
  std::vector<Value> values_;
};

inline BitBlock block_code(Value value, const BlockCode& code) { return code.encode(value); }

/// Every multiset of exactly three Tribonacci values (indices <= max_index)
/// that sums to target, each sorted ascending. Exhaustive; used as the
/// reference when checking that conservation pins the consecutive triple.
inline std::vector<std::array<Value, 3>> find_tribonacci_triples(Value target, Index max_index,
                                                                  bool allow_repeats) {
  std::vector<Value> vals;
  for (Index n = 1; n <= std::min(max_index, kMaxIndex); ++n) {
    const Value v = tribonacci(n);
    if (v > target) break;
    vals.push_back(v);
  }
  std::vector<std::array<Value, 3>> out;
  const std::size_t m = vals.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = allow_repeats ? i : i + 1; j < m; ++j) {
      for (std::size_t k = allow_repeats ? j : j + 1; k < m; ++k) {
        if (vals[i] + vals[j] + vals[k] == target) out.push_back({vals[i], vals[j], vals[k]});
      }
    }
  }
  return out;
}

} // namespace fibqkd

#endif // FIBQKD_TRIBONACCI_HPP
