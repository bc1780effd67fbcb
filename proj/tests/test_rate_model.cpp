#include <gtest/gtest.h>

#include "fibqkd/rate_model.hpp"

using namespace fibqkd;

TEST(RateModel, ClickProbabilityAtZeroDistance) {
  const ChannelParams p;
  EXPECT_NEAR(click_probability(p), -std::expm1(-0.01) + 1e-13, 1e-16);
  const auto r = key_rate(p, 3.0);
  EXPECT_NEAR(r.sifted_rate, 1e7 * click_probability(p) * 3.0, 1e-6);
  EXPECT_NEAR(r.secret_rate, 0.5 * r.sifted_rate, 1e-9);
  EXPECT_LE(r.secret_rate, r.sifted_rate);
  EXPECT_LE(r.sifted_rate, r.raw_click_rate * r.bits_per_detection * (1 + 1e-15));
}

TEST(RateModel, DarkFloorWithoutLight) {
  ChannelParams p;
  p.mean_photons = 0.0;
  EXPECT_EQ(click_probability(p), dark_probability(p));
  EXPECT_DOUBLE_EQ(key_rate(p, 3.0).secret_rate, dark_floor_rate(p, 3.0, 1.0, 0.5));
}

TEST(RateModel, RatiosFollowCodingBits) {
  const std::vector<CodingSpace> spaces{{"sam", 2}, {"oam8", 8}, {"oam480", 480}};
  std::vector<double> grid;
  for (int d = 0; d <= 200; d += 10) grid.push_back(d);
  const auto rows = rate_sweep(ChannelParams{}, grid, spaces);
  ASSERT_EQ(rows.size(), 3 * grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double sam = rows[i].point.secret_rate;
    EXPECT_NEAR(rows[grid.size() + i].point.secret_rate / sam, 3.0, 1e-12);
    EXPECT_NEAR(rows[2 * grid.size() + i].point.secret_rate / sam, std::log2(480.0), 1e-12);
  }
  EXPECT_NEAR(rows[2 * grid.size()].point.bits_per_detection, 8.906890595608519, 1e-12);
}

TEST(RateModel, MonotoneDownToTheFloor) {
  std::vector<double> grid;
  for (int d = 0; d <= 2000; d += 5) grid.push_back(d);
  const auto rows = rate_sweep(ChannelParams{}, grid, {{"oam8", 8}});
  const double floor = dark_floor_rate(ChannelParams{}, 3.0, 1.0, 0.5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].point.secret_rate, rows[i - 1].point.secret_rate);
    EXPECT_GE(rows[i].point.secret_rate, floor);
  }
  EXPECT_NEAR(rows.back().point.secret_rate / floor, 1.0, 1e-6);
}

TEST(RateModel, PulseRateScalesLinearly) {
  ChannelParams a;
  a.distance_km = 40;
  ChannelParams b = a;
  b.pulse_rate_hz *= 2;
  EXPECT_DOUBLE_EQ(key_rate(b, 3).secret_rate, 2 * key_rate(a, 3).secret_rate);
  EXPECT_DOUBLE_EQ(key_rate(b, 3).raw_click_rate, 2 * key_rate(a, 3).raw_click_rate);
}

TEST(RateModel, Validation) {
  ChannelParams p;
  p.fiber_loss_db_per_km = -1;
  EXPECT_THROW(key_rate(p, 3), ConfigError);
  EXPECT_THROW(key_rate(ChannelParams{}, 3, 1.5), ConfigError);
  EXPECT_THROW(rate_sweep(ChannelParams{}, {}, {{"x", 2}}), ConfigError);
  EXPECT_THROW(rate_sweep(ChannelParams{}, {0}, {{"x", 1}}), ConfigError);
}

TEST(EntropySweep, FormulaValues) {
  std::vector<unsigned> ns;
  for (unsigned n = 2; n <= 512; n *= 2) ns.push_back(n);
  const auto rows = entropy_detection_sweep(ns);
  EXPECT_NEAR(rows[0].detection_rate, 0.70, 1e-15);
  EXPECT_NEAR(rows[2].detection_rate, 0.90, 1e-15);
  EXPECT_DOUBLE_EQ(rows[2].entropy_base, 3.0);
  EXPECT_DOUBLE_EQ(rows[0].baseline_detection, 0.25);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].entropy_base, rows[i - 1].entropy_base);
    EXPECT_GT(rows[i].entropy_restricted, rows[i - 1].entropy_restricted);
    EXPECT_GT(rows[i].detection_rate, rows[i - 1].detection_rate);
    EXPECT_GT(rows[i].baseline_detection, rows[i - 1].baseline_detection);
  }
}
