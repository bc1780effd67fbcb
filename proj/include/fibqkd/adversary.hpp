#ifndef FIBQKD_ADVERSARY_HPP
#define FIBQKD_ADVERSARY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fibqkd/errors.hpp"
#include "fibqkd/protocol.hpp"
#include "fibqkd/tribonacci.hpp"

namespace fibqkd {

/// How the parties turn a resolved round into a key value, and what Eve sees.
enum class KeyStrategy : std::uint8_t {
  V0_PumpSum,                  // key = pump value
  V1_RandomFlag_SmallestTwoSum, // Alice's first bit randomized when her pair is discontinuous;
                                // key = sum of the two smallest triple values
  V2_CaseDependent,             // V1 transcripts; digits and add/multiply chosen by n3 mod 4
  V3_RetainBest,                // V2, keeping only the transcript class with the most candidate keys
};

inline const char* to_string(KeyStrategy s) noexcept {
  switch (s) {
    case KeyStrategy::V0_PumpSum: return "v0";
    case KeyStrategy::V1_RandomFlag_SmallestTwoSum: return "v1";
    case KeyStrategy::V2_CaseDependent: return "v2";
    case KeyStrategy::V3_RetainBest: return "v3";
  }
  return "?";
}

inline KeyStrategy parse_key_strategy(const std::string& s) {
  if (s == "v0" || s == "V0") return KeyStrategy::V0_PumpSum;
  if (s == "v1" || s == "V1") return KeyStrategy::V1_RandomFlag_SmallestTwoSum;
  if (s == "v2" || s == "V2") return KeyStrategy::V2_CaseDependent;
  if (s == "v3" || s == "V3") return KeyStrategy::V3_RetainBest;
  throw ConfigError("unknown key strategy: " + s);
}

inline bool randomizes_first_bit(KeyStrategy s) noexcept { return s != KeyStrategy::V0_PumpSum; }

/// Key value a strategy assigns to a resolved world.
inline Value strategy_key(KeyStrategy s, const World& w) {
  const Value lo = tribonacci(w.pump - 3);
  const Value mid = tribonacci(w.pump - 2);
  const Value hi = tribonacci(w.pump - 1);
  switch (s) {
    case KeyStrategy::V0_PumpSum: return lo + mid + hi;
    case KeyStrategy::V1_RandomFlag_SmallestTwoSum: return lo + mid;
    case KeyStrategy::V2_CaseDependent:
    case KeyStrategy::V3_RetainBest:
      switch (w.bob_n % 4) {
        case 0: return lo + mid;
        case 1: return lo * mid;
        case 2: return mid + hi;
        default: return lo * hi;
      }
  }
  return 0;
}

/// Eve's prior over the latent variables of a round.
struct Priors {
  std::vector<double> pump_weights;           // empty means uniform over the window
  std::array<double, 3> bob_weights{1, 1, 1}; // largest, middle, smallest member to Bob
  double latent_first_p = 0.5;                // P(Alice sends B_{n1} first under OwnBits)
  double random_bit_one_p = 0.5;              // P(randomized first bit = 1)
};

struct EnumeratedWorld {
  World world;
  Bit latent = 0;
  std::optional<Bit> random_first_bit;
  double probability = 0.0;
  Transcript transcript;
  Value key = 0;
};

struct TranscriptPosterior {
  Transcript transcript;
  double probability = 0.0;       // P(t)
  std::map<Value, double> keys;   // P(k | t)
  Value best_key = 0;
  double best_guess_p = 0.0;      // max_k P(k | t)
};

class WorldDistribution {
public:
  WorldDistribution(std::vector<EnumeratedWorld> worlds, bool retain_best_class) : worlds_(std::move(worlds)) {
    double total = 0.0;
    for (const auto& w : worlds_) {
      if (!(w.probability >= 0.0)) throw DomainError("world probabilities must be nonnegative");
      total += w.probability;
    }
    if (!(total > 0.0)) throw DomainError("world distribution has no mass");

    // Posteriors come from the raw weights so that equal weights give exact
    // ratios; only P(t) and the stored world probabilities are normalized.
    std::map<unsigned, TranscriptPosterior> by_code;
    for (const auto& w : worlds_) {
      auto& tp = by_code[w.transcript.code()];
      tp.transcript = w.transcript;
      tp.probability += w.probability;
      tp.keys[w.key] += w.probability;
    }
    for (auto& [code, tp] : by_code) {
      for (auto& [k, p] : tp.keys) {
        p /= tp.probability;
        if (p > tp.best_guess_p) {
          tp.best_guess_p = p;
          tp.best_key = k;
        }
      }
      tp.probability /= total;
      transcripts_.push_back(tp);
    }
    for (auto& w : worlds_) w.probability /= total;
    if (retain_best_class) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < transcripts_.size(); ++i)
        if (transcripts_[i].keys.size() > transcripts_[best].keys.size()) best = i;
      retained_ = transcripts_[best].transcript;
    }
  }

  const std::vector<EnumeratedWorld>& worlds() const noexcept { return worlds_; }
  const std::vector<TranscriptPosterior>& transcripts() const noexcept { return transcripts_; }
  const std::optional<Transcript>& retained() const noexcept { return retained_; }

  const TranscriptPosterior* find(const Transcript& t) const noexcept {
    for (const auto& tp : transcripts_)
      if (tp.transcript == t) return &tp;
    return nullptr;
  }

  /// Keys consistent with a transcript, ascending.
  std::vector<Value> candidate_keys(const Transcript& t) const {
    std::vector<Value> out;
    if (const auto* tp = find(t))
      for (const auto& [k, p] : tp->keys) out.push_back(k);
    return out;
  }

private:
  std::vector<EnumeratedWorld> worlds_;
  std::vector<TranscriptPosterior> transcripts_;
  std::optional<Transcript> retained_;
};

/// Every (pump, Bob member, latent choice[, random bit]) world over the window
/// with its forward-simulated transcript and strategy key.
inline WorldDistribution enumerate_worlds(const PumpWindow& window, KeyStrategy strategy, const Priors& priors = {},
                                          EdgeConvention convention = kDefaultConvention) {
  const Index lo = std::max<Index>(window.lo, 4);
  if (window.hi < lo) throw DomainError("enumerate_worlds: window has no valid pump");
  const auto width = static_cast<std::size_t>(window.hi - lo + 1);
  if (!priors.pump_weights.empty() && priors.pump_weights.size() != width)
    throw ConfigError("enumerate_worlds: pump weight count does not match the window");

  std::vector<EnumeratedWorld> out;
  for (Index pump = lo; pump <= window.hi; ++pump) {
    const double wp = priors.pump_weights.empty() ? 1.0 : priors.pump_weights[static_cast<std::size_t>(pump - lo)];
    for (int member = 0; member < 3; ++member) {
      const World w{pump, pump - 1 - member};
      const double wb = priors.bob_weights[static_cast<std::size_t>(member)];
      const auto a = w.alice_n();
      const bool randomize = randomizes_first_bit(strategy) && a[1] == a[0] + 2;
      for (Bit latent : {Bit{0}, Bit{1}}) {
        const double wl = latent == 0 ? priors.latent_first_p : 1.0 - priors.latent_first_p;
        const Transcript honest = forward_transcript(w, latent, convention);
        auto emit = [&](std::optional<Bit> rb, double wr) {
          EnumeratedWorld ew;
          ew.world = w;
          ew.latent = latent;
          ew.random_first_bit = rb;
          ew.probability = wp * wb * wl * wr;
          ew.transcript = honest;
          if (rb) {
            ew.transcript.alice_bit_1 = *rb;
            ew.transcript.bob_bit = bob_response(w.bob_n, *rb, convention);
          }
          ew.key = strategy_key(strategy, w);
          out.push_back(ew);
        };
        if (randomize) {
          emit(Bit{0}, 1.0 - priors.random_bit_one_p);
          emit(Bit{1}, priors.random_bit_one_p);
        } else {
          emit(std::nullopt, 1.0);
        }
      }
    }
  }
  return WorldDistribution(std::move(out), strategy == KeyStrategy::V3_RetainBest);
}

/// Bayes-optimal probability that Eve names the key from the transcript alone:
/// sum_t P(t) max_k P(k|t), restricted to the retained class when there is one.
inline double eve_guess_rate(const WorldDistribution& dist) {
  if (const auto& keep = dist.retained()) return dist.find(*keep)->best_guess_p;
  double rate = 0.0;
  for (const auto& tp : dist.transcripts()) rate += tp.probability * tp.best_guess_p;
  return rate;
}

/// Unweighted mean over transcript classes of 1/|candidate keys|.
inline double transcript_averaged_rate(const WorldDistribution& dist) {
  double s = 0.0;
  for (const auto& tp : dist.transcripts()) s += 1.0 / static_cast<double>(tp.keys.size());
  return s / static_cast<double>(dist.transcripts().size());
}

/// Idealised guess rate for a coding space of N values: 9 / (10 (N + 1)).
inline double guess_rate_formula(unsigned n) {
  if (n < 2) throw DomainError("guess_rate_formula: N must be >= 2");
  return 9.0 / (10.0 * (static_cast<double>(n) + 1.0));
}

enum class EntropyVariant : std::uint8_t { Base, Restricted };

/// Bits per photon: log2 N for the plain block code, log2(10 (N+1) / 9) when
/// only the best transcript class is kept.
inline double entropy_per_photon(unsigned n, EntropyVariant v) {
  if (n < 2) throw DomainError("entropy_per_photon: N must be >= 2");
  if (v == EntropyVariant::Base) return std::log2(static_cast<double>(n));
  return std::log2(10.0 * (static_cast<double>(n) + 1.0) / 9.0);
}

/// Reference candidate-key sets for the eight-pump window n = 4..11 under the
/// pump-value key, indexed by transcript code (alice bit 1, bob bit, alice bit 2).
inline const std::array<std::vector<Value>, 8>& reference_candidate_keys() {
  static const std::array<std::vector<Value>, 8> ref{{
      {6, 11},                // 000
      {20, 423},              // 001
      {11, 20, 68, 125, 423}, // 010
      {20, 37, 230},          // 011
      {37, 230},              // 100
      {68, 125},              // 101
      {20, 37, 230, 423},     // 110
      {6, 11, 37, 125, 230},  // 111
  }};
  return ref;
}

struct CandidateKeyDiff {
  Transcript transcript;
  std::vector<Value> missing; // listed in the reference, not produced by enumeration
  std::vector<Value> extra;   // produced by enumeration, absent from the reference
};

/// Smallest pump window whose pump values cover every reference key.
inline PumpWindow reference_window() {
  Value lo = ~Value{0}, hi = 0;
  for (const auto& ks : reference_candidate_keys())
    for (Value k : ks) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  const CodeTable table(kMaxIndex);
  return {*table.index_of(lo), *table.index_of(hi)};
}

inline std::vector<CandidateKeyDiff> diff_against_reference(const WorldDistribution& dist) {
  std::vector<CandidateKeyDiff> out;
  const auto& ref = reference_candidate_keys();
  for (unsigned code = 0; code < 8; ++code) {
    const Transcript t{static_cast<Bit>((code >> 2) & 1), static_cast<Bit>((code >> 1) & 1), static_cast<Bit>(code & 1)};
    const auto got = dist.candidate_keys(t);
    CandidateKeyDiff d{t, {}, {}};
    std::set_difference(ref[code].begin(), ref[code].end(), got.begin(), got.end(), std::back_inserter(d.missing));
    std::set_difference(got.begin(), got.end(), ref[code].begin(), ref[code].end(), std::back_inserter(d.extra));
    if (!d.missing.empty() || !d.extra.empty()) out.push_back(std::move(d));
  }
  return out;
}

} // namespace fibqkd

#endif // FIBQKD_ADVERSARY_HPP
