#ifndef FIBQKD_SIMULATION_HPP
#define FIBQKD_SIMULATION_HPP

#include <vector>

#include "fibqkd/channel.hpp"
#include "fibqkd/key.hpp"
#include "fibqkd/protocol.hpp"
#include "fibqkd/report.hpp"

namespace fibqkd {

struct SimulationResult {
  SessionReport alice;
  SessionReport bob;
  KeyMaterial alice_key;
  KeyMaterial bob_key;
  std::vector<RoundTrace> traces;
  std::uint64_t eve_resolved_segments = 0; // key rounds whose pump Eve could deduce
};

/// Runs both parties in one process, calling the exchange rules directly.
inline SimulationResult simulate_session(const SessionConfig& cfg, bool keep_traces = false) {
  cfg.validate();
  SimulationResult res;
  res.alice.role = "alice";
  res.bob.role = "bob";
  const ExchangeRules rules = cfg.rules();
  const BlockCode code = cfg.block_code();
  const CodeTable table = cfg.table();

  auto abort_both = [&](AbortReason why, const std::string& msg) {
    for (SessionReport* r : {&res.alice, &res.bob}) {
      r->status = SessionStatus::Aborted;
      r->abort_reason = why;
      r->message = msg;
    }
  };

  for (std::uint64_t r = 0; r < cfg.rounds; ++r) {
    const RoundInputs in = feed_round(cfg, r);
    RoundTrace tr;
    tr.round_id = r;
    tr.n3 = in.bob_measured_n;
    tr.pair = in.event.alice_n;
    tr.check_mode = in.event.check_mode;

    if (in.event.check_mode) {
      const bool pass = bob_check_passes(in, in.event.alice_pair, table, cfg.window(), cfg.channel_noise);
      tr.check_passed = pass;
      for (SessionReport* rep : {&res.alice, &res.bob}) {
        ++rep->check_rounds;
        if (!pass) ++rep->check_failures;
        ++rep->rounds_completed;
      }
      if (keep_traces) res.traces.push_back(tr);
      continue;
    }

    AliceRound alice(in.event.alice_n[0], in.event.alice_n[1], in.alice_latent, rules);
    BobRound bob(in.bob_measured_n, rules);
    try {
      const Bit b1 = alice.first_bit();
      const Bit bb = bob.on_first_bit(b1);
      const Bit b2 = alice.on_bob_response(bb);
      bob.on_second_bit(b2);
    } catch (const ProtocolViolation& e) {
      abort_both(AbortReason::Tamper, e.what());
      break;
    }
    if (!alice.worlds().resolved() || !bob.worlds().resolved()) {
      abort_both(AbortReason::Tamper, "round " + std::to_string(r) + " left an ambiguous world set");
      break;
    }
    const Transcript t = alice.transcript();
    tr.transcript = t;
    const Index pa = alice.worlds().world().pump;
    const Index pb = bob.worlds().world().pump;
    tr.deduced_pump = pa;

    if (is_interior(pa, rules.window)) {
      const BitBlock seg = code.encode(tribonacci(pa));
      res.alice_key.append(seg);
      ++res.alice.key_rounds;
      tr.segment = seg.str();
    } else {
      ++res.alice.boundary_rounds;
    }
    if (is_interior(pb, rules.window)) {
      res.bob_key.append(code.encode(tribonacci(pb)));
      ++res.bob.key_rounds;
    } else {
      ++res.bob.boundary_rounds;
    }
    ++res.alice.rounds_completed;
    ++res.bob.rounds_completed;

    if (in.eve_measured_n != 0 && is_interior(pa, rules.window)) {
      try {
        const WorldSet eve = deduce_bob(BobKnowledge{in.eve_measured_n, {}, {}}, t, rules);
        if (eve.resolved() && eve.world().pump == pa) ++res.eve_resolved_segments;
      } catch (const ProtocolViolation&) {
      }
    }
    if (keep_traces) res.traces.push_back(tr);
  }

  res.alice.key_bits = res.alice_key.size();
  res.bob.key_bits = res.bob_key.size();
  res.alice.digest_hex = to_hex(res.alice_key.digest());
  res.bob.digest_hex = to_hex(res.bob_key.digest());
  if (res.alice.status == SessionStatus::Completed) {
    const bool match = res.alice.digest_hex == res.bob.digest_hex;
    res.alice.digests_match = match;
    res.bob.digests_match = match;
    if (!match) abort_both(AbortReason::KeyMismatch, "key confirmation digests differ");
  }
  return res;
}

} // namespace fibqkd

#endif // FIBQKD_SIMULATION_HPP
