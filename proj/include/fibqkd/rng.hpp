#ifndef FIBQKD_RNG_HPP
#define FIBQKD_RNG_HPP

#include <cstdint>
#include <span>
#include <stdexcept>

namespace fibqkd {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream tags keep the random draws of independent consumers apart.
enum class StreamTag : std::uint64_t {
  Source = 0x736f75726365ULL,
  AliceLatent = 0x616c696365ULL,
  BobCheck = 0x626f62ULL,
  Eve = 0x657665ULL,
  Trial = 0x747269616cULL,
};

/// Small counter-derived generator.
///
/// Every draw is a pure function of (seed, stream, tag) so that any round can
/// be regenerated independently of the rounds before it. The sampling helpers
/// are written out here instead of using <random> distributions, whose
/// algorithms differ between standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t state) noexcept : state_(state) {}

  static Rng for_stream(std::uint64_t seed, std::uint64_t stream, StreamTag tag) noexcept {
    std::uint64_t s = splitmix64(seed ^ static_cast<std::uint64_t>(tag));
    s = splitmix64(s ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    return Rng(s);
  }

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  bool coin() noexcept { return (next_u64() >> 63) != 0; }

  /// Index drawn proportionally to nonnegative weights (at least one positive).
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("negative categorical weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("categorical weights sum to zero");
    double u = uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return last_positive;
  }

private:
  std::uint64_t state_;
};

} // namespace fibqkd

#endif // FIBQKD_RNG_HPP
