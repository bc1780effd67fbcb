#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "fibqkd/serialize.hpp"
#include "fibqkd/source.hpp"

using namespace fibqkd;

namespace {

double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

} // namespace

TEST(Source, MiddleMemberExample) {
  const TripleEvent ev = make_event(0, 6, BobMember::Middle, false);
  EXPECT_EQ(ev.l_b, 6U);
  EXPECT_EQ(ev.alice_pair, (std::array<Value, 2>{3, 11}));
  EXPECT_EQ(ev.pump_value(), 20U);
  EXPECT_EQ(ev.alice_n, (std::array<Index, 2>{3, 5}));
}

TEST(Source, EveryEventConservesThePump) {
  SourceConfig cfg;
  cfg.seed = 99;
  cfg.n_hi = 30;
  for (std::uint64_t r = 0; r < 5000; ++r) {
    const auto ev = emit_event(cfg, r);
    EXPECT_EQ(ev.pump_value(), tribonacci(ev.pump_n));
    EXPECT_LT(ev.alice_pair[0], ev.alice_pair[1]);
    EXPECT_GE(ev.pump_n, cfg.n_lo);
    EXPECT_LE(ev.pump_n, cfg.n_hi);
    EXPECT_GE(ev.bob_n, ev.pump_n - 3);
    EXPECT_LE(ev.bob_n, ev.pump_n - 1);
  }
}

TEST(Source, DeterministicPerSeedAndRound) {
  SourceConfig a;
  a.seed = 5;
  SourceConfig b = a;
  for (std::uint64_t r = 0; r < 200; ++r) EXPECT_EQ(emit_event(a, r), emit_event(b, r));
  b.seed = 6;
  int differ = 0;
  for (std::uint64_t r = 0; r < 200; ++r) differ += emit_event(a, r) == emit_event(b, r) ? 0 : 1;
  EXPECT_GT(differ, 150);
}

TEST(Source, JsonRoundTrip) {
  SourceConfig cfg;
  cfg.seed = 1;
  const auto ev = emit_event(cfg, 17);
  const auto back = event_from_json(to_json(ev));
  EXPECT_EQ(back.pump_value(), ev.pump_value());
  EXPECT_EQ(back.alice_pair, ev.alice_pair);
  EXPECT_EQ(back.l_b, ev.l_b);
  EXPECT_EQ(back.round_id, ev.round_id);
}

TEST(Source, UniformPumpAndMemberFrequencies) {
  SourceConfig cfg;
  cfg.seed = 2024;
  cfg.check_fraction = 0.25;
  const std::size_t n = 60000;
  std::vector<double> pumps(cfg.window_size(), 0.0), members(3, 0.0);
  double checks = 0.0;
  for (std::uint64_t r = 0; r < n; ++r) {
    const auto ev = emit_event(cfg, r);
    pumps[static_cast<std::size_t>(ev.pump_n - cfg.n_lo)] += 1.0;
    members[static_cast<std::size_t>(ev.pump_n - 1 - ev.bob_n)] += 1.0;
    checks += ev.check_mode ? 1.0 : 0.0;
  }
  EXPECT_GT(chi_square_p(pumps, std::vector<double>(pumps.size(), double(n) / double(pumps.size()))), 1e-3);
  EXPECT_GT(chi_square_p(members, std::vector<double>(3, double(n) / 3.0)), 1e-3);
  EXPECT_NEAR(checks / double(n), 0.25, 0.01);
}

TEST(Source, WeightedPumps) {
  SourceConfig cfg;
  cfg.seed = 3;
  cfg.n_lo = 5;
  cfg.n_hi = 7;
  cfg.pump_weights = {1.0, 0.0, 3.0};
  std::vector<double> seen(3, 0.0);
  for (std::uint64_t r = 0; r < 20000; ++r) seen[static_cast<std::size_t>(emit_event(cfg, r).pump_n - 5)] += 1.0;
  EXPECT_EQ(seen[1], 0.0);
  EXPECT_GT(chi_square_p({seen[0], seen[2]}, {5000.0, 15000.0}), 1e-3);
}

TEST(Source, ConfigValidation) {
  SourceConfig cfg;
  cfg.n_lo = 3;
  EXPECT_THROW(PhotonSource{cfg}, ConfigError);
  cfg = {};
  cfg.pump_weights = {1.0};
  EXPECT_THROW(PhotonSource{cfg}, ConfigError);
  cfg = {};
  cfg.bob_weights = {0, 0, 0};
  EXPECT_THROW(PhotonSource{cfg}, ConfigError);
  cfg = {};
  cfg.check_fraction = 1.5;
  EXPECT_THROW(PhotonSource{cfg}, ConfigError);
}

TEST(Source, PulseMatesAreIndependentEvents) {
  SourceConfig cfg;
  cfg.seed = 8;
  const auto pulse = emit_pulse(cfg, 4, 3);
  ASSERT_EQ(pulse.size(), 3U);
  for (const auto& ev : pulse) EXPECT_EQ(ev.pump_value(), tribonacci(ev.pump_n));
}

TEST(Sorter, PassesOnlyTableValues) {
  const CodeTable t(20);
  EXPECT_TRUE(sorter_filter(20, t));
  EXPECT_FALSE(sorter_filter(4, t));
  EXPECT_TRUE(sorter_filter(423, t));
  EXPECT_FALSE(sorter_filter(0, t));
}

TEST(Prediction, ConditionalBobStates) {
  const CodeTable t(20);
  EXPECT_EQ(predict_bob_state({6, 20}, t).support, (std::vector<Value>{11}));
  EXPECT_EQ(predict_bob_state({3, 6}, t).support, (std::vector<Value>{2, 11}));
  EXPECT_EQ(predict_bob_state({20, 37}, t).support, (std::vector<Value>{11, 68}));
  EXPECT_THROW(predict_bob_state({3, 20}, t), DomainError);
  EXPECT_THROW(predict_bob_state({3, 7}, t), DomainError);
}

TEST(Prediction, WindowTrimsTheSupport) {
  const CodeTable t(20);
  // Pump 10 is outside [4, 9], so only pump 9 explains {37, 68}.
  EXPECT_EQ(predict_bob_state({37, 68}, t, PumpWindow{4, 9}).support, (std::vector<Value>{20}));
}

TEST(Prediction, Fidelity) {
  const OamState a{{2, 11}};
  const OamState b{{11}};
  EXPECT_DOUBLE_EQ(fidelity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(fidelity(a, b), 0.5);
  EXPECT_DOUBLE_EQ(fidelity(b, OamState{{2}}), 0.0);
  EXPECT_DOUBLE_EQ(a.probability(2), 0.5);
}
