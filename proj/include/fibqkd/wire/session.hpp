#ifndef FIBQKD_WIRE_SESSION_HPP
#define FIBQKD_WIRE_SESSION_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fibqkd/channel.hpp"
#include "fibqkd/key.hpp"
#include "fibqkd/protocol.hpp"
#include "fibqkd/report.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/wire/frame.hpp"
#include "fibqkd/wire/transport.hpp"

namespace fibqkd::wire {

enum class Role : std::uint8_t { Alice, Bob };

inline const char* to_string(Role r) noexcept { return r == Role::Alice ? "alice" : "bob"; }

struct SessionOptions {
  std::chrono::milliseconds round_timeout{5000};
  std::uint32_t session_id = 1;
  bool keep_traces = false;
};

struct SessionOutcome {
  SessionReport report;
  KeyMaterial key;
  std::vector<RoundTrace> traces;
};

/// Handshake parameters derived from a session configuration. The event-feed
/// seed itself never crosses the wire, only a fingerprint of it.
inline Hello hello_for(const SessionConfig& cfg) {
  Hello h;
  h.set_size = static_cast<std::uint16_t>(cfg.set_size);
  h.window_lo = static_cast<std::uint16_t>(cfg.window_lo);
  h.window_hi = static_cast<std::uint16_t>(cfg.hi());
  h.convention = static_cast<std::uint8_t>(cfg.convention);
  h.digest_alg = static_cast<std::uint8_t>(DigestAlgorithm::Sha256);
  h.check_fraction_ppm = static_cast<std::uint32_t>(std::lround(cfg.check_fraction * 1e6));
  h.feed_fingerprint = splitmix64(cfg.seed ^ 0x66656564ULL);
  h.rounds = cfg.rounds;
  return h;
}

namespace detail {

struct SessionAbort {
  AbortReason reason;
  std::string message;
  bool notify_peer;
};

struct PeerClosed {};

class MessageChannel {
public:
  MessageChannel(Transport& t, const SessionOptions& opt) : t_(t), opt_(opt) {}

  void send(const Message& m) { t_.send(encode_message(m, opt_.session_id)); }

  Message receive() {
    for (;;) {
      std::optional<Frame> f;
      try {
        f = reader_.next();
      } catch (const FrameError& e) {
        throw SessionAbort{AbortReason::OrderViolation, e.what(), true};
      }
      if (f) {
        if (f->session_id != opt_.session_id)
          throw SessionAbort{AbortReason::OrderViolation, "frame for foreign session", true};
        Message m = from_frame(*f);
        if (const auto* a = std::get_if<Abort>(&m)) {
          const AbortReason why = a->reason == AbortReason::None ? AbortReason::PeerAbort : a->reason;
          throw SessionAbort{why, std::string("peer aborted: ") + to_string(a->reason), false};
        }
        return m;
      }
      std::array<std::uint8_t, 4096> buf{};
      std::size_t n = 0;
      try {
        n = t_.receive(buf, opt_.round_timeout);
      } catch (const TimeoutError&) {
        throw SessionAbort{AbortReason::Timeout, "no message within the round timeout", true};
      }
      if (n == 0) throw PeerClosed{};
      reader_.feed(std::span<const std::uint8_t>(buf.data(), n));
    }
  }

  template <class T>
  T expect(const char* what) {
    Message m = receive();
    if (auto* v = std::get_if<T>(&m)) return *v;
    throw SessionAbort{AbortReason::OrderViolation, std::string("expected ") + what, true};
  }

  BitMessage expect_bit(MessageType type, std::uint32_t round) {
    auto b = expect<BitMessage>(to_string(type));
    if (b.type != type || b.round_id != round)
      throw SessionAbort{AbortReason::OrderViolation,
                         std::string("expected ") + to_string(type) + " for round " + std::to_string(round), true};
    return b;
  }

private:
  Transport& t_;
  const SessionOptions& opt_;
  FrameReader reader_;
};

inline void finish_key(SessionOutcome& out) {
  out.report.key_bits = out.key.size();
  out.report.digest_hex = to_hex(out.key.digest());
}

inline void run_alice(MessageChannel& ch, const SessionConfig& cfg, const SessionOptions& opt, SessionOutcome& out) {
  out.report.role = "alice";
  const ExchangeRules rules = cfg.rules();
  const BlockCode code = cfg.block_code();

  const Hello mine = hello_for(cfg);
  ch.send(mine);
  if (ch.expect<Hello>("HELLO") != mine) throw SessionAbort{AbortReason::ConfigMismatch, "peer parameters differ", true};

  for (std::uint32_t r = 0; r < cfg.rounds; ++r) {
    const RoundInputs in = feed_round(cfg, r);
    RoundTrace tr;
    tr.round_id = r;
    tr.pair = in.event.alice_n;
    tr.check_mode = in.event.check_mode;
    ch.send(RoundOpen{r});
    if (in.event.check_mode) {
      ch.send(CheckReveal{r, in.event.alice_pair[0], in.event.alice_pair[1]});
      const auto res = ch.expect<CheckResult>("CHECK_RESULT");
      if (res.round_id != r) throw SessionAbort{AbortReason::OrderViolation, "check result for wrong round", true};
      ++out.report.check_rounds;
      if (!res.pass) ++out.report.check_failures;
      tr.check_passed = res.pass;
    } else {
      AliceRound alice(in.event.alice_n[0], in.event.alice_n[1], in.alice_latent, rules);
      ch.send(BitMessage{MessageType::AliceBit1, r, alice.first_bit()});
      const auto resp = ch.expect_bit(MessageType::BobResponse, r);
      Bit second = 0;
      try {
        second = alice.on_bob_response(resp.bit);
      } catch (const ProtocolViolation& e) {
        throw SessionAbort{AbortReason::Tamper, e.what(), true};
      }
      if (!alice.worlds().resolved())
        throw SessionAbort{AbortReason::Tamper, "ambiguous world set in round " + std::to_string(r), true};
      ch.send(BitMessage{MessageType::AliceBit2, r, second});
      const Index pump = alice.worlds().world().pump;
      tr.transcript = alice.transcript();
      tr.deduced_pump = pump;
      if (is_interior(pump, rules.window)) {
        const BitBlock seg = code.encode(tribonacci(pump));
        out.key.append(seg);
        tr.segment = seg.str();
        ++out.report.key_rounds;
      } else {
        ++out.report.boundary_rounds;
      }
    }
    ++out.report.rounds_completed;
    if (opt.keep_traces) out.traces.push_back(tr);
  }

  finish_key(out);
  const Digest mine_digest = out.key.digest();
  ch.send(KeyConfirm{mine_digest});
  const auto theirs = ch.expect<KeyConfirm>("KEY_CONFIRM");
  out.report.digests_match = theirs.digest == mine_digest;
  if (!*out.report.digests_match)
    throw SessionAbort{AbortReason::KeyMismatch, "key confirmation digests differ", true};
}

inline void run_bob(MessageChannel& ch, const SessionConfig& cfg, const SessionOptions& opt, SessionOutcome& out) {
  out.report.role = "bob";
  const ExchangeRules rules = cfg.rules();
  const BlockCode code = cfg.block_code();
  const CodeTable table = cfg.table();

  const Hello mine = hello_for(cfg);
  if (ch.expect<Hello>("HELLO") != mine) throw SessionAbort{AbortReason::ConfigMismatch, "peer parameters differ", true};
  ch.send(mine);

  for (std::uint32_t r = 0; r < cfg.rounds; ++r) {
    const auto open = ch.expect<RoundOpen>("ROUND_OPEN");
    if (open.round_id != r) throw SessionAbort{AbortReason::OrderViolation, "round opened out of sequence", true};
    const RoundInputs in = feed_round(cfg, r);
    RoundTrace tr;
    tr.round_id = r;
    tr.n3 = in.bob_measured_n;

    Message m = ch.receive();
    if (const auto* rev = std::get_if<CheckReveal>(&m)) {
      if (rev->round_id != r) throw SessionAbort{AbortReason::OrderViolation, "check reveal for wrong round", true};
      bool pass = false;
      try {
        pass = bob_check_passes(in, {rev->first, rev->second}, table, rules.window, cfg.channel_noise);
      } catch (const DomainError& e) {
        throw SessionAbort{AbortReason::Tamper, e.what(), true};
      }
      ch.send(CheckResult{r, pass});
      tr.check_mode = true;
      tr.check_passed = pass;
      ++out.report.check_rounds;
      if (!pass) ++out.report.check_failures;
    } else if (const auto* b1 = std::get_if<BitMessage>(&m);
               b1 && b1->type == MessageType::AliceBit1 && b1->round_id == r) {
      BobRound bob(in.bob_measured_n, rules);
      ch.send(BitMessage{MessageType::BobResponse, r, bob.on_first_bit(b1->bit)});
      const auto b2 = ch.expect_bit(MessageType::AliceBit2, r);
      try {
        bob.on_second_bit(b2.bit);
      } catch (const ProtocolViolation& e) {
        throw SessionAbort{AbortReason::Tamper, e.what(), true};
      }
      if (!bob.worlds().resolved())
        throw SessionAbort{AbortReason::Tamper, "ambiguous world set in round " + std::to_string(r), true};
      const Index pump = bob.worlds().world().pump;
      tr.transcript = bob.transcript();
      tr.deduced_pump = pump;
      if (is_interior(pump, rules.window)) {
        const BitBlock seg = code.encode(tribonacci(pump));
        out.key.append(seg);
        tr.segment = seg.str();
        ++out.report.key_rounds;
      } else {
        ++out.report.boundary_rounds;
      }
    } else {
      throw SessionAbort{AbortReason::OrderViolation, "expected ALICE_BIT1 or CHECK_REVEAL", true};
    }
    ++out.report.rounds_completed;
    if (opt.keep_traces) out.traces.push_back(tr);
  }

  finish_key(out);
  const Digest mine_digest = out.key.digest();
  const auto theirs = ch.expect<KeyConfirm>("KEY_CONFIRM");
  out.report.digests_match = theirs.digest == mine_digest;
  if (!*out.report.digests_match)
    throw SessionAbort{AbortReason::KeyMismatch, "key confirmation digests differ", true};
  ch.send(KeyConfirm{mine_digest});
}

} // namespace detail

/// Runs one party of a session over a connected transport. Never throws for
/// protocol or transport failures; they are reflected in the report.
inline SessionOutcome run_session(Role role, Transport& transport, const SessionConfig& cfg,
                                  const SessionOptions& opt = {}) {
  cfg.validate();
  detail::MessageChannel ch(transport, opt);
  SessionOutcome partial;
  partial.report.role = to_string(role);
  try {
    if (role == Role::Alice)
      detail::run_alice(ch, cfg, opt, partial);
    else
      detail::run_bob(ch, cfg, opt, partial);
    return partial;
  } catch (const detail::SessionAbort& a) {
    if (a.notify_peer) {
      try {
        ch.send(Abort{a.reason});
      } catch (const TransportError&) {
      }
    }
    partial.report.status = SessionStatus::Aborted;
    partial.report.abort_reason = a.reason;
    partial.report.message = a.message;
  } catch (const detail::PeerClosed&) {
    partial.report.status = SessionStatus::TransportError;
    partial.report.message = "peer closed the connection mid-session";
  } catch (const TransportError& e) {
    partial.report.status = SessionStatus::TransportError;
    partial.report.message = e.what();
  }
  detail::finish_key(partial);
  return partial;
}

} // namespace fibqkd::wire

#endif // FIBQKD_WIRE_SESSION_HPP
