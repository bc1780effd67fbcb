#ifndef FIBQKD_CHANNEL_HPP
#define FIBQKD_CHANNEL_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "fibqkd/errors.hpp"
#include "fibqkd/protocol.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/source.hpp"

namespace fibqkd {

/// Intercept-resend behaviour on Bob's quantum channel.
enum class EveStrategy : std::uint8_t {
  Passthrough,               // no interference
  ResendMeasuredValue,       // measure the OAM value, resend that eigenstate
  ResendRandomSuperposition, // measure, then resend one of the states Alice's pair could imply
};

inline const char* to_string(EveStrategy s) noexcept {
  switch (s) {
    case EveStrategy::Passthrough: return "passthrough";
    case EveStrategy::ResendMeasuredValue: return "resend_measured_value";
    case EveStrategy::ResendRandomSuperposition: return "resend_random_superposition";
  }
  return "?";
}

inline EveStrategy parse_eve_strategy(const std::string& s) {
  if (s == "none" || s == "passthrough") return EveStrategy::Passthrough;
  if (s == "resend_measured_value" || s == "measured") return EveStrategy::ResendMeasuredValue;
  if (s == "resend_random_superposition" || s == "superposition") return EveStrategy::ResendRandomSuperposition;
  throw ConfigError("unknown eve strategy: " + s);
}

/// Parameters both peers share. The window's interior pumps are exactly the
/// code set, so every key round maps to a block.
struct SessionConfig {
  std::uint64_t seed = 0;
  std::uint32_t rounds = 0;
  unsigned set_size = 8;
  Index window_lo = 4;
  Index window_hi = 0; // 0 selects window_lo + set_size + 3
  double check_fraction = 0.1;
  EdgeConvention convention = kDefaultConvention;
  double channel_noise = 0.0;
  EveStrategy eve = EveStrategy::Passthrough;

  Index hi() const noexcept {
    return window_hi != 0 ? window_hi : window_lo + static_cast<Index>(set_size) + 3;
  }
  PumpWindow window() const noexcept { return {window_lo, hi()}; }
  ExchangeRules rules() const noexcept { return {window(), convention}; }
  BlockCode block_code() const { return BlockCode(set_size, window_lo + 2); }
  CodeTable table() const { return CodeTable(hi()); }

  SourceConfig source() const {
    SourceConfig s;
    s.n_lo = window_lo;
    s.n_hi = hi();
    s.check_fraction = check_fraction;
    s.seed = seed;
    return s;
  }

  void validate() const {
    if (set_size < 2 || !std::has_single_bit(set_size)) throw ConfigError("set size N must be a power of two >= 2");
    if (window_lo < 4) throw ConfigError("window must start at n >= 4");
    if (hi() > kMaxIndex) throw ConfigError("window exceeds 64-bit OAM values");
    if (hi() - window_lo - 3 != static_cast<Index>(set_size))
      throw ConfigError("window [" + std::to_string(window_lo) + ", " + std::to_string(hi()) +
                        "] has " + std::to_string(hi() - window_lo - 3) + " interior pumps; N = " +
                        std::to_string(set_size) + " requires exactly N");
    if (!(check_fraction >= 0.0 && check_fraction <= 1.0)) throw ConfigError("check fraction must lie in [0, 1]");
    if (!(channel_noise >= 0.0 && channel_noise <= 1.0)) throw ConfigError("channel noise must lie in [0, 1]");
  }
};

/// Alice pairs whose consecutive triple would leave Bob holding index bob_n.
inline std::vector<std::array<Index, 2>> alice_pairs_given_bob(Index bob_n, const PumpWindow& window) {
  std::vector<std::array<Index, 2>> out;
  for (Index pump = bob_n + 1; pump <= bob_n + 3; ++pump) {
    if (pump < 4 || !window.contains(pump)) continue;
    out.push_back(World{pump, bob_n}.alice_n());
  }
  return out;
}

/// Everything the simulated quantum layer hands the two parties in one round.
/// Alice reads the event's pair, check flag, and her latent coin; Bob reads
/// only his measured index, his photon state and his check draw.
struct RoundInputs {
  TripleEvent event;
  Bit alice_latent = 0;
  Index bob_measured_n = 0;
  OamState bob_state;
  double bob_check_draw = 0.0;
  Index eve_measured_n = 0; // 0 when Eve is passive
};

inline OamState eigenstate(Index n) { return OamState{{tribonacci(n)}}; }

inline OamState predicted_state(const std::array<Index, 2>& alice_n, const PumpWindow& window) {
  OamState st;
  for (Index pump : pumps_for_alice_pair(alice_n[0], alice_n[1], window))
    for (Index b = pump - 3; b <= pump - 1; ++b)
      if (b != alice_n[0] && b != alice_n[1]) st.support.push_back(tribonacci(b));
  std::sort(st.support.begin(), st.support.end());
  return st;
}

inline RoundInputs feed_round(const SessionConfig& cfg, std::uint64_t round_id) {
  RoundInputs in;
  const PumpWindow window = cfg.window();
  in.event = emit_event(cfg.source(), round_id);
  in.alice_latent = Rng::for_stream(cfg.seed, round_id, StreamTag::AliceLatent).coin() ? 1 : 0;
  in.bob_check_draw = Rng::for_stream(cfg.seed, round_id, StreamTag::BobCheck).uniform();
  in.bob_measured_n = in.event.bob_n;
  in.bob_state = predicted_state(in.event.alice_n, window);

  switch (cfg.eve) {
    case EveStrategy::Passthrough:
      break;
    case EveStrategy::ResendMeasuredValue:
      in.eve_measured_n = in.event.bob_n;
      in.bob_state = eigenstate(in.event.bob_n);
      break;
    case EveStrategy::ResendRandomSuperposition: {
      in.eve_measured_n = in.event.bob_n;
      Rng rng = Rng::for_stream(cfg.seed, round_id, StreamTag::Eve);
      const auto pairs = alice_pairs_given_bob(in.event.bob_n, window);
      const auto& guess = pairs[static_cast<std::size_t>(rng.uniform() * static_cast<double>(pairs.size())) %
                                pairs.size()];
      in.bob_state = predicted_state(guess, window);
      // Bob's value readout collapses the resent superposition.
      const auto& sup = in.bob_state.support;
      const Value v = sup[static_cast<std::size_t>(rng.uniform() * static_cast<double>(sup.size())) % sup.size()];
      in.bob_measured_n = *CodeTable(window.hi).index_of(v);
      break;
    }
  }
  return in;
}

/// Bob's projective test against the state Alice's revealed pair predicts.
inline bool bob_check_passes(const RoundInputs& in, const std::array<Value, 2>& revealed, const CodeTable& table,
                             const PumpWindow& window, double channel_noise) {
  const OamState expected = predict_bob_state(revealed, table, window);
  return in.bob_check_draw < (1.0 - channel_noise) * fidelity(in.bob_state, expected);
}

} // namespace fibqkd

#endif // FIBQKD_CHANNEL_HPP
