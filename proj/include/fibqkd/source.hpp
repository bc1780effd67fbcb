#ifndef FIBQKD_SOURCE_HPP
#define FIBQKD_SOURCE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fibqkd/errors.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/tribonacci.hpp"

namespace fibqkd {

/// Which member of the consecutive triple travels to Bob.
enum class BobMember : std::uint8_t { Largest = 0, Middle = 1, Smallest = 2 };

struct SourceConfig {
  Index n_lo = 4;
  Index n_hi = 15;
  std::vector<double> pump_weights;            // empty means uniform over the window
  std::array<double, 3> bob_weights{1, 1, 1}; // indexed by BobMember
  double check_fraction = 0.1;
  std::uint64_t seed = 0;

  std::size_t window_size() const noexcept {
    return n_hi >= n_lo ? static_cast<std::size_t>(n_hi - n_lo + 1) : 0;
  }

  void validate() const {
    if (n_lo < 4) throw ConfigError("source: pump window must start at n >= 4");
    if (n_hi < n_lo) throw ConfigError("source: empty pump window");
    if (n_hi > kMaxIndex) throw ConfigError("source: pump window exceeds 64-bit values");
    if (!pump_weights.empty()) {
      if (pump_weights.size() != window_size())
        throw ConfigError("source: pump weight count does not match the window");
      check_weights(pump_weights, "pump");
    }
    check_weights(bob_weights, "bob assignment");
    if (!(check_fraction >= 0.0 && check_fraction <= 1.0))
      throw ConfigError("source: check fraction must lie in [0, 1]");
  }

private:
  static void check_weights(std::span<const double> w, const char* what) {
    bool positive = false;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string("source: invalid ") + what + " weight");
      positive = positive || x > 0.0;
    }
    if (!positive) throw ConfigError(std::string("source: ") + what + " weights are all zero");
  }
};

/// One emission of the cascaded source after sorter post-selection.
struct TripleEvent {
  std::uint64_t round_id = 0;
  Index pump_n = 0;
  Value l_b = 0;
  std::array<Value, 2> alice_pair{}; // ascending
  bool check_mode = false;
  Index bob_n = 0;
  std::array<Index, 2> alice_n{}; // ascending

  Value pump_value() const { return l_b + alice_pair[0] + alice_pair[1]; }

  friend bool operator==(const TripleEvent&, const TripleEvent&) = default;
};

inline TripleEvent make_event(std::uint64_t round_id, Index pump_n, BobMember member, bool check_mode) {
  const Index bob_n = pump_n - 1 - static_cast<Index>(member);
  std::array<Index, 2> alice{};
  std::size_t k = 0;
  for (Index i = pump_n - 3; i <= pump_n - 1; ++i)
    if (i != bob_n) alice[k++] = i;
  TripleEvent ev;
  ev.round_id = round_id;
  ev.pump_n = pump_n;
  ev.bob_n = bob_n;
  ev.alice_n = alice;
  ev.l_b = tribonacci(bob_n);
  ev.alice_pair = {tribonacci(alice[0]), tribonacci(alice[1])};
  ev.check_mode = check_mode;
  return ev;
}

namespace detail {

inline TripleEvent draw_event(const SourceConfig& cfg, Rng& rng, std::uint64_t round_id) {
  std::size_t pump_offset = 0;
  if (cfg.pump_weights.empty()) {
    pump_offset = static_cast<std::size_t>(rng.uniform() * static_cast<double>(cfg.window_size()));
    pump_offset = std::min(pump_offset, cfg.window_size() - 1);
  } else {
    pump_offset = rng.categorical(cfg.pump_weights);
  }
  const auto member = static_cast<BobMember>(rng.categorical(cfg.bob_weights));
  const bool check = rng.bernoulli(cfg.check_fraction);
  return make_event(round_id, cfg.n_lo + static_cast<Index>(pump_offset), member, check);
}

} // namespace detail

/// Event for one round; a pure function of (config, round_id).
inline TripleEvent emit_event(const SourceConfig& cfg, std::uint64_t round_id) {
  if (cfg.window_size() == 0) throw ConfigError("source: empty pump window");
  Rng rng = Rng::for_stream(cfg.seed, round_id, StreamTag::Source);
  return detail::draw_event(cfg, rng, round_id);
}

/// A multi-photon pulse: k emissions with independent pump draws.
inline std::vector<TripleEvent> emit_pulse(const SourceConfig& cfg, std::uint64_t pulse_id, unsigned k) {
  if (cfg.window_size() == 0) throw ConfigError("source: empty pump window");
  Rng rng = Rng::for_stream(cfg.seed ^ 0x70756c7365ULL, pulse_id, StreamTag::Source);
  std::vector<TripleEvent> out;
  out.reserve(k);
  for (unsigned i = 0; i < k; ++i) out.push_back(detail::draw_event(cfg, rng, pulse_id));
  return out;
}

class PhotonSource {
public:
  explicit PhotonSource(SourceConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const SourceConfig& config() const noexcept { return cfg_; }
  TripleEvent event(std::uint64_t round_id) const { return emit_event(cfg_, round_id); }

private:
  SourceConfig cfg_;
};

/// OAM sorter: passes only positive table values.
inline bool sorter_filter(Value value, const CodeTable& table) noexcept {
  return value > 0 && table.contains(value);
}

/// Equal-weight superposition over a set of OAM values.
struct OamState {
  std::vector<Value> support; // ascending, no duplicates

  double probability(Value v) const noexcept {
    return std::binary_search(support.begin(), support.end(), v) ? 1.0 / static_cast<double>(support.size())
                                                                  : 0.0;
  }

  friend bool operator==(const OamState&, const OamState&) = default;
};

using BobStatePrediction = OamState;

/// |<a|b>|^2 for equal-weight superpositions.
inline double fidelity(const OamState& a, const OamState& b) noexcept {
  if (a.support.empty() || b.support.empty()) return 0.0;
  std::vector<Value> common;
  std::set_intersection(a.support.begin(), a.support.end(), b.support.begin(), b.support.end(),
                        std::back_inserter(common));
  const double c = static_cast<double>(common.size());
  return c * c / (static_cast<double>(a.support.size()) * static_cast<double>(b.support.size()));
}

/// Pump window the sorters enforce. Defaults to every pump the table can describe.
struct PumpWindow {
  Index lo = 4;
  Index hi = kMaxIndex;

  bool contains(Index n) const noexcept { return n >= lo && n <= hi; }
};

/// Candidate pumps for an Alice pair given by (ascending) table indices.
inline std::vector<Index> pumps_for_alice_pair(Index n1, Index n2, const PumpWindow& window) {
  std::vector<Index> pumps;
  if (n2 == n1 + 1) {
    pumps = {n1 + 2, n1 + 3};
  } else if (n2 == n1 + 2) {
    pumps = {n1 + 3};
  }
  std::erase_if(pumps, [&](Index n) { return !window.contains(n) || n < 4; });
  return pumps;
}

/// Conditional state of Bob's photon once Alice has measured her pair.
inline BobStatePrediction predict_bob_state(std::array<Value, 2> alice_pair, const CodeTable& table,
                                            const PumpWindow& window = {}) {
  auto i1 = table.index_of(std::min(alice_pair[0], alice_pair[1]));
  auto i2 = table.index_of(std::max(alice_pair[0], alice_pair[1]));
  if (!i1 || !i2) throw DomainError("predict_bob_state: value outside the code table");
  BobStatePrediction pred;
  for (Index pump : pumps_for_alice_pair(*i1, *i2, window)) {
    for (Index b = pump - 3; b <= pump - 1; ++b) {
      if (b == *i1 || b == *i2) continue;
      if (b > table.n_max()) continue;
      pred.support.push_back(table.value(b));
    }
  }
  if (pred.support.empty())
    throw DomainError("predict_bob_state: pair is not part of any consecutive triple in the window");
  std::sort(pred.support.begin(), pred.support.end());
  return pred;
}

} // namespace fibqkd

#endif // FIBQKD_SOURCE_HPP
