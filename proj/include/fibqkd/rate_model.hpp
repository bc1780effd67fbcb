#ifndef FIBQKD_RATE_MODEL_HPP
#define FIBQKD_RATE_MODEL_HPP

#include <cmath>
#include <string>
#include <vector>

#include "fibqkd/adversary.hpp"
#include "fibqkd/errors.hpp"

namespace fibqkd {

struct ChannelParams {
  double pulse_rate_hz = 1e7;
  double mean_photons = 0.1;
  double fiber_loss_db_per_km = 0.2;
  double detector_efficiency = 0.1;
  double dark_count_rate = 1e-4; // per second
  double distance_km = 0.0;
  double gate_window_s = 1e-9;

  void validate() const {
    for (double v : {pulse_rate_hz, mean_photons, fiber_loss_db_per_km, detector_efficiency, dark_count_rate,
                     distance_km, gate_window_s})
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("channel parameters must be finite and nonnegative");
  }

  /// Mean photon number above the weak-pulse regime.
  bool strong_pulse() const noexcept { return mean_photons > 1.0; }
};

struct RatePoint {
  double distance_km = 0.0;
  double raw_click_rate = 0.0; // Hz
  double sifted_rate = 0.0;    // bits/s
  double secret_rate = 0.0;    // bits/s
  double bits_per_detection = 0.0;
};

inline constexpr const char* kRateFormulaId =
    "T=eta*10^(-alpha*L/10); p_click=1-exp(-mu*T)+dark*gate; sifted=f*p_click*sift*bits; secret=sifted*ecpa";

inline double transmittance(const ChannelParams& p) {
  return p.detector_efficiency * std::pow(10.0, -p.fiber_loss_db_per_km * p.distance_km / 10.0);
}

inline double dark_probability(const ChannelParams& p) { return p.dark_count_rate * p.gate_window_s; }

inline double click_probability(const ChannelParams& p) {
  return -std::expm1(-p.mean_photons * transmittance(p)) + dark_probability(p);
}

inline RatePoint key_rate(const ChannelParams& p, double coding_bits, double sift_factor = 1.0,
                          double ec_pa_factor = 0.5) {
  p.validate();
  if (!(coding_bits >= 0.0) || !(sift_factor >= 0.0 && sift_factor <= 1.0) ||
      !(ec_pa_factor >= 0.0 && ec_pa_factor <= 1.0))
    throw ConfigError("key_rate: factors out of range");
  RatePoint r;
  r.distance_km = p.distance_km;
  r.bits_per_detection = coding_bits;
  r.raw_click_rate = p.pulse_rate_hz * click_probability(p);
  r.sifted_rate = r.raw_click_rate * sift_factor * coding_bits;
  r.secret_rate = r.sifted_rate * ec_pa_factor;
  return r;
}

/// Rate as the distance grows without bound: dark counts only.
inline double dark_floor_rate(const ChannelParams& p, double coding_bits, double sift_factor, double ec_pa_factor) {
  return p.pulse_rate_hz * dark_probability(p) * sift_factor * coding_bits * ec_pa_factor;
}

struct CodingSpace {
  std::string label;
  unsigned states = 2;
  double bits() const { return std::log2(static_cast<double>(states)); }
};

struct SweepRow {
  std::string config;
  RatePoint point;
};

inline std::vector<SweepRow> rate_sweep(const ChannelParams& base, const std::vector<double>& distances,
                                        const std::vector<CodingSpace>& configs, double sift_factor = 1.0,
                                        double ec_pa_factor = 0.5) {
  if (distances.empty() || configs.empty()) throw ConfigError("rate_sweep: empty grid");
  std::vector<SweepRow> rows;
  for (const auto& c : configs) {
    if (c.states < 2) throw ConfigError("rate_sweep: coding space needs at least 2 states");
    for (double d : distances) {
      ChannelParams p = base;
      p.distance_km = d;
      rows.push_back({c.label, key_rate(p, c.bits(), sift_factor, ec_pa_factor)});
    }
  }
  return rows;
}

struct EntropyRow {
  unsigned n = 0;
  double entropy_base = 0.0;
  double entropy_restricted = 0.0;
  double detection_rate = 0.0;
  double baseline_detection = 0.0;
};

/// Detection probability per checked event of a d-dimensional two-basis
/// protocol under intercept-resend: 1 - (1/2 + 1/(2N)).
inline double baseline_detection(unsigned n) {
  if (n < 2) throw DomainError("baseline_detection: N must be >= 2");
  return 1.0 - (0.5 + 0.5 / static_cast<double>(n));
}

inline std::vector<EntropyRow> entropy_detection_sweep(const std::vector<unsigned>& ns) {
  std::vector<EntropyRow> rows;
  for (unsigned n : ns) {
    rows.push_back({n, entropy_per_photon(n, EntropyVariant::Base), entropy_per_photon(n, EntropyVariant::Restricted),
                    1.0 - guess_rate_formula(n), baseline_detection(n)});
  }
  return rows;
}

} // namespace fibqkd

#endif // FIBQKD_RATE_MODEL_HPP
