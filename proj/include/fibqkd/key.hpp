#ifndef FIBQKD_KEY_HPP
#define FIBQKD_KEY_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "fibqkd/tribonacci.hpp"

namespace fibqkd {

using Digest = std::array<std::uint8_t, 32>;

/// Digest algorithm identifiers carried in the handshake.
enum class DigestAlgorithm : std::uint8_t { Sha256 = 1 };

inline Digest sha256(const std::vector<std::uint8_t>& data) {
  Digest out{};
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
    throw std::runtime_error("sha256 failed");
  return out;
}

inline std::string to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(d.size() * 2);
  for (auto b : d) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xF]);
  }
  return s;
}

/// Concatenated key segments.
class KeyMaterial {
public:
  void append(const BitBlock& block) {
    for (unsigned i = 0; i < block.width; ++i) bits_.push_back(block.at(i));
  }

  std::size_t size() const noexcept { return bits_.size(); }
  const std::vector<Bit>& bits() const noexcept { return bits_; }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size());
    for (Bit b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  /// Bit count (64-bit big-endian) followed by the bits packed MSB first.
  std::vector<std::uint8_t> packed() const {
    std::vector<std::uint8_t> out;
    const std::uint64_t n = bits_.size();
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(n >> s));
    std::uint8_t cur = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      cur = static_cast<std::uint8_t>(cur | (bits_[i] << (7 - i % 8)));
      if (i % 8 == 7) {
        out.push_back(cur);
        cur = 0;
      }
    }
    if (bits_.size() % 8 != 0) out.push_back(cur);
    return out;
  }

  Digest digest() const { return sha256(packed()); }

  friend bool operator==(const KeyMaterial&, const KeyMaterial&) = default;

private:
  std::vector<Bit> bits_;
};

} // namespace fibqkd

#endif // FIBQKD_KEY_HPP
