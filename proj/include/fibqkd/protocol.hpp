#ifndef FIBQKD_PROTOCOL_HPP
#define FIBQKD_PROTOCOL_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fibqkd/errors.hpp"
#include "fibqkd/source.hpp"
#include "fibqkd/tribonacci.hpp"

namespace fibqkd {

/// What Bob sends when Alice's first bit equals his own edge bit.
///
/// ProseLeftOne: a left edge answers 1, a right edge 0.
/// FormulaMod4: answer !(n3 mod 4), i.e. 1 when n3 mod 4 == 0 (a right edge).
/// The two are complements of each other; both parties must agree on one.
enum class EdgeConvention : std::uint8_t { ProseLeftOne = 0, FormulaMod4 = 1 };

inline constexpr EdgeConvention kDefaultConvention = EdgeConvention::FormulaMod4;

inline const char* to_string(EdgeConvention c) noexcept {
  return c == EdgeConvention::ProseLeftOne ? "prose" : "formula";
}

struct ExchangeRules {
  PumpWindow window{};
  EdgeConvention convention = kDefaultConvention;
};

enum class AliceRule : std::uint8_t {
  InvertedTwice, // n2 = n1 + 2 with equal bits p: send !p, then !p
  OwnBits,       // otherwise: send B_{n1} and B_{n2} in latent order
};

inline AliceRule alice_rule(Index n1, Index n2) noexcept {
  return (n2 == n1 + 2 && bit_alloc(n1) == bit_alloc(n2)) ? AliceRule::InvertedTwice : AliceRule::OwnBits;
}

struct AliceKnowledge {
  Index n1 = 0;
  Index n2 = 0;
  Bit latent_order_choice = 0; // 0: B_{n1} goes first under OwnBits
  std::vector<Bit> sent_bits;
  std::optional<Bit> received_bit;

  void validate() const {
    if (n1 < 1 || n2 - n1 < 1 || n2 - n1 > 2)
      throw DomainError("alice: pair indices must satisfy n2 - n1 in {1, 2}");
    if (latent_order_choice > 1) throw DomainError("alice: latent choice must be a bit");
  }
};

struct BobKnowledge {
  Index n3 = 0;
  std::vector<Bit> received_bits;
  std::optional<Bit> sent_bit;
};

struct Transcript {
  Bit alice_bit_1 = 0;
  Bit bob_bit = 0;
  Bit alice_bit_2 = 0;

  std::string str() const {
    return {static_cast<char>('0' + alice_bit_1), static_cast<char>('0' + bob_bit),
            static_cast<char>('0' + alice_bit_2)};
  }
  unsigned code() const noexcept { return (alice_bit_1 << 2U) | (bob_bit << 1U) | alice_bit_2; }

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

inline Bit alice_first_bit(const AliceKnowledge& k) {
  k.validate();
  if (alice_rule(k.n1, k.n2) == AliceRule::InvertedTwice) return static_cast<Bit>(1 - bit_alloc(k.n1));
  return k.latent_order_choice == 0 ? bit_alloc(k.n1) : bit_alloc(k.n2);
}

inline Bit alice_second_bit(const AliceKnowledge& k) {
  k.validate();
  if (alice_rule(k.n1, k.n2) == AliceRule::InvertedTwice) return static_cast<Bit>(1 - bit_alloc(k.n1));
  return k.latent_order_choice == 0 ? bit_alloc(k.n2) : bit_alloc(k.n1);
}

inline Bit bob_response(Index n3, Bit received, EdgeConvention convention) {
  if (n3 < 1) throw DomainError("bob: index must be >= 1");
  const Bit own = bit_alloc(n3);
  if (received != own) return 1;
  if (position_class(n3) == Position::Center) return 0;
  if (convention == EdgeConvention::ProseLeftOne) return edge_side(n3) == Side::Left ? 1 : 0;
  return (n3 % 4 == 0) ? 1 : 0;
}

inline Bit bob_response(const BobKnowledge& k, Bit received, EdgeConvention convention) {
  return bob_response(k.n3, received, convention);
}

/// (-1)^(3 - (n3 mod 4)): the direction towards Bob's nearest opposite bit
/// when his index is a center index.
inline int direction_sign(Index n3) {
  if (n3 < 1) throw DomainError("direction_sign: index must be >= 1");
  return ((3 - n3 % 4) % 2 == 0) ? 1 : -1;
}

/// One candidate explanation of a round: the pump and which index Bob holds.
struct World {
  Index pump = 0;
  Index bob_n = 0;

  std::array<Index, 2> alice_n() const noexcept {
    std::array<Index, 2> a{};
    std::size_t k = 0;
    for (Index i = pump - 3; i <= pump - 1; ++i)
      if (i != bob_n) a[k++] = i;
    return a;
  }

  friend bool operator==(const World&, const World&) = default;
  friend auto operator<=>(const World&, const World&) = default;
};

/// Forward model: the transcript an honest round in world w produces.
inline Transcript forward_transcript(const World& w, Bit latent, EdgeConvention convention) {
  const auto a = w.alice_n();
  AliceKnowledge k{a[0], a[1], latent, {}, {}};
  const Bit first = alice_first_bit(k);
  return {first, bob_response(w.bob_n, first, convention), alice_second_bit(k)};
}

class WorldSet {
public:
  WorldSet() = default;
  explicit WorldSet(std::vector<World> c) : candidates_(std::move(c)) {
    std::sort(candidates_.begin(), candidates_.end());
    candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
  }

  const std::vector<World>& candidates() const noexcept { return candidates_; }
  std::size_t size() const noexcept { return candidates_.size(); }
  bool empty() const noexcept { return candidates_.empty(); }
  bool resolved() const noexcept { return candidates_.size() == 1; }

  const World& world() const {
    if (!resolved())
      throw StateError("world set is not resolved (" + std::to_string(candidates_.size()) + " candidates)");
    return candidates_.front();
  }

private:
  std::vector<World> candidates_;
};

/// Worlds consistent with Bob's photon and the full transcript.
inline WorldSet deduce_bob(const BobKnowledge& k, const Transcript& t, const ExchangeRules& rules) {
  std::vector<World> out;
  for (Index pump = k.n3 + 1; pump <= k.n3 + 3; ++pump) {
    if (pump < 4 || !rules.window.contains(pump)) continue;
    const World w{pump, k.n3};
    for (Bit latent : {Bit{0}, Bit{1}}) {
      if (forward_transcript(w, latent, rules.convention) == t) {
        out.push_back(w);
        break;
      }
    }
  }
  if (out.empty()) throw ProtocolViolation("bob: transcript " + t.str() + " is inconsistent with every world");
  return WorldSet(std::move(out));
}

/// Worlds consistent with Alice's pair, the first bit she sent, and Bob's reply.
inline WorldSet deduce_alice(const AliceKnowledge& k, Bit bob_bit, const ExchangeRules& rules) {
  k.validate();
  const Bit sent = k.sent_bits.empty() ? alice_first_bit(k) : k.sent_bits.front();
  std::vector<World> out;
  for (Index pump : pumps_for_alice_pair(k.n1, k.n2, rules.window)) {
    Index bob_n = 0;
    for (Index i = pump - 3; i <= pump - 1; ++i)
      if (i != k.n1 && i != k.n2) bob_n = i;
    if (bob_n < 1) continue;
    if (bob_response(bob_n, sent, rules.convention) == bob_bit) out.push_back({pump, bob_n});
  }
  if (out.empty())
    throw ProtocolViolation("alice: response bit " + std::to_string(bob_bit) + " is inconsistent with every world");
  return WorldSet(std::move(out));
}

inline BitBlock derive_key_segment(const WorldSet& worlds, const BlockCode& code) {
  return code.encode(tribonacci(worlds.world().pump));
}

/// Rounds whose pump sits at least two steps inside the window: every world
/// either party could entertain then lies inside the window too.
inline bool is_interior(Index pump, const PumpWindow& window) noexcept {
  return pump - 2 >= window.lo && pump + 2 <= window.hi;
}

/// Structural case of a round as laid out in the combined rule table.
struct CaseClass {
  AliceRule rule;
  Position bob_position;
  bool first_bit_matches_bob;

  friend bool operator==(const CaseClass&, const CaseClass&) = default;
};

inline CaseClass classify_case(const World& w, Bit latent) {
  const auto a = w.alice_n();
  AliceKnowledge k{a[0], a[1], latent, {}, {}};
  return {alice_rule(a[0], a[1]), position_class(w.bob_n), alice_first_bit(k) == bit_alloc(w.bob_n)};
}

/// Alice's side of one exchange round.
class AliceRound {
public:
  AliceRound(Index n1, Index n2, Bit latent, const ExchangeRules& rules) : rules_(rules) {
    k_.n1 = n1;
    k_.n2 = n2;
    k_.latent_order_choice = latent;
    k_.validate();
  }

  const AliceKnowledge& knowledge() const noexcept { return k_; }

  Bit first_bit() {
    if (!k_.sent_bits.empty()) throw StateError("alice: first bit already sent");
    const Bit b = alice_first_bit(k_);
    k_.sent_bits.push_back(b);
    return b;
  }

  /// Records Bob's reply, resolves his value and returns the second bit.
  /// Throws ProtocolViolation when no world explains the reply.
  Bit on_bob_response(Bit bob_bit) {
    if (k_.sent_bits.size() != 1 || k_.received_bit) throw StateError("alice: unexpected response");
    k_.received_bit = bob_bit;
    worlds_ = deduce_alice(k_, bob_bit, rules_);
    const Bit b = alice_second_bit(k_);
    k_.sent_bits.push_back(b);
    return b;
  }

  const WorldSet& worlds() const {
    if (!worlds_) throw StateError("alice: round not finished");
    return *worlds_;
  }

  Transcript transcript() const {
    if (k_.sent_bits.size() != 2) throw StateError("alice: round not finished");
    return {k_.sent_bits[0], *k_.received_bit, k_.sent_bits[1]};
  }

private:
  ExchangeRules rules_;
  AliceKnowledge k_;
  std::optional<WorldSet> worlds_;
};

/// Bob's side of one exchange round.
class BobRound {
public:
  BobRound(Index n3, const ExchangeRules& rules) : rules_(rules) {
    if (n3 < 1) throw DomainError("bob: index must be >= 1");
    k_.n3 = n3;
  }

  const BobKnowledge& knowledge() const noexcept { return k_; }

  Bit on_first_bit(Bit b) {
    if (!k_.received_bits.empty()) throw StateError("bob: first bit already received");
    k_.received_bits.push_back(b);
    k_.sent_bit = bob_response(k_, b, rules_.convention);
    return *k_.sent_bit;
  }

  /// Throws ProtocolViolation when the transcript fits no world.
  const WorldSet& on_second_bit(Bit b) {
    if (k_.received_bits.size() != 1) throw StateError("bob: unexpected second bit");
    k_.received_bits.push_back(b);
    worlds_ = deduce_bob(k_, transcript(), rules_);
    return *worlds_;
  }

  const WorldSet& worlds() const {
    if (!worlds_) throw StateError("bob: round not finished");
    return *worlds_;
  }

  Transcript transcript() const {
    if (k_.received_bits.size() != 2) throw StateError("bob: round not finished");
    return {k_.received_bits[0], *k_.sent_bit, k_.received_bits[1]};
  }

private:
  ExchangeRules rules_;
  BobKnowledge k_;
  std::optional<WorldSet> worlds_;
};

} // namespace fibqkd

#endif // FIBQKD_PROTOCOL_HPP
