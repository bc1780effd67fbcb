#ifndef FIBQKD_SERIALIZE_HPP
#define FIBQKD_SERIALIZE_HPP

#include <cstdio>
#include <string>

#include <json.hpp>

#include "fibqkd/adversary.hpp"
#include "fibqkd/detection.hpp"
#include "fibqkd/report.hpp"
#include "fibqkd/source.hpp"
#include "fibqkd/tribonacci.hpp"

namespace fibqkd {

using nlohmann::json;

inline json to_json(const CodeEntry& e) {
  json j{{"n", e.n}, {"value", e.value}, {"bit", e.bit}, {"pos", e.pos == Position::Center ? "c" : "e"}};
  if (e.side)
    j["side"] = *e.side == Side::Left ? "left" : "right";
  else
    j["side"] = nullptr;
  return j;
}

inline json to_json(const CodeTable& t) {
  json arr = json::array();
  for (const auto& e : t.entries()) arr.push_back(to_json(e));
  return arr;
}

/// Event-log line: {round_id, pump_n, l_b, alice_pair:[a,b], check_mode}.
inline json to_json(const TripleEvent& ev) {
  return {{"round_id", ev.round_id},
          {"pump_n", ev.pump_n},
          {"l_b", ev.l_b},
          {"alice_pair", {ev.alice_pair[0], ev.alice_pair[1]}},
          {"check_mode", ev.check_mode}};
}

inline TripleEvent event_from_json(const json& j) {
  TripleEvent ev;
  ev.round_id = j.at("round_id").get<std::uint64_t>();
  ev.pump_n = j.at("pump_n").get<Index>();
  ev.l_b = j.at("l_b").get<Value>();
  ev.alice_pair = {j.at("alice_pair").at(0).get<Value>(), j.at("alice_pair").at(1).get<Value>()};
  ev.check_mode = j.at("check_mode").get<bool>();
  const CodeTable table(std::min<Index>(ev.pump_n, kMaxIndex));
  ev.bob_n = table.index_of(ev.l_b).value_or(0);
  ev.alice_n = {table.index_of(ev.alice_pair[0]).value_or(0), table.index_of(ev.alice_pair[1]).value_or(0)};
  return ev;
}

/// Session-trace line: {round_id, n3, pair:[n1,n2], transcript:[b1,bb,b2], deduced_pump, segment}.
inline json to_json(const RoundTrace& t) {
  json j{{"round_id", t.round_id}, {"n3", t.n3}, {"pair", {t.pair[0], t.pair[1]}}};
  if (t.transcript)
    j["transcript"] = {t.transcript->alice_bit_1, t.transcript->bob_bit, t.transcript->alice_bit_2};
  else
    j["transcript"] = nullptr;
  j["deduced_pump"] = t.deduced_pump ? json(*t.deduced_pump) : json(nullptr);
  j["segment"] = t.segment ? json(*t.segment) : json(nullptr);
  if (t.check_mode) j["check_passed"] = t.check_passed.value_or(false);
  return j;
}

inline json to_json(const SessionReport& r) {
  json j{{"role", r.role},
         {"status", to_string(r.status)},
         {"abort_reason", to_string(r.abort_reason)},
         {"message", r.message},
         {"rounds_completed", r.rounds_completed},
         {"key_rounds", r.key_rounds},
         {"check_rounds", r.check_rounds},
         {"boundary_rounds", r.boundary_rounds},
         {"check_failures", r.check_failures},
         {"key_bits", r.key_bits},
         {"digest_sha256", r.digest_hex}};
  j["digests_match"] = r.digests_match ? json(*r.digests_match) : json(nullptr);
  return j;
}

inline json to_json(const WorldDistribution& d, KeyStrategy s, const PumpWindow& w) {
  json ts = json::array();
  for (const auto& tp : d.transcripts()) {
    json keys = json::array(), post = json::array();
    for (const auto& [k, p] : tp.keys) {
      keys.push_back(k);
      post.push_back(p);
    }
    ts.push_back({{"bits", tp.transcript.str()},
                  {"probability", tp.probability},
                  {"keys", keys},
                  {"posterior", post},
                  {"best_guess_p", tp.best_guess_p},
                  {"retained", !d.retained() || *d.retained() == tp.transcript}});
  }
  return {{"variant", to_string(s)}, {"window", {w.lo, w.hi}}, {"transcripts", ts}, {"average_rate", eve_guess_rate(d)}};
}

inline json to_json(const DetectionReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"strategy", to_string(r.strategy)},
          {"check_rounds", r.check_rounds},
          {"trials", r.trials},
          {"failure_threshold", r.failure_threshold},
          {"per_event_disturbance", r.per_event_disturbance},
          {"per_event_disturbance_exact", r.per_event_disturbance_exact},
          {"aggregate_analytic", opt(r.aggregate_analytic)},
          {"detection_rate", opt(r.detection_rate)},
          {"detection_lower_bound", opt(r.detection_lower_bound)},
          {"flagged", r.flagged}};
}

/// Shortest round-trippable decimal form, for CSV cells.
inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace fibqkd

#endif // FIBQKD_SERIALIZE_HPP
