#ifndef FIBQKD_DETECTION_HPP
#define FIBQKD_DETECTION_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "fibqkd/channel.hpp"
#include "fibqkd/parallel.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/source.hpp"

namespace fibqkd {

struct DetectionConfig {
  SessionConfig session;       // window, seed and noise; check_fraction is ignored
  std::uint32_t check_rounds = 500; // check events per simulated session
  std::uint32_t trials = 200;       // simulated sessions
  double significance = 0.001;
  unsigned jobs = 1;
};

struct DetectionReport {
  EveStrategy strategy = EveStrategy::Passthrough;
  std::uint32_t check_rounds = 0;
  std::uint32_t trials = 0;
  std::uint64_t failure_threshold = 0;      // flag a session when failures exceed this
  double per_event_disturbance = 0.0;       // empirical failure fraction over all check events
  double per_event_disturbance_exact = 0.0; // enumerated expectation under the source priors
  std::optional<double> aggregate_analytic; // 1 - (1 - p)^m, undefined for m = 0
  std::optional<double> detection_rate;     // flagged sessions / trials
  std::optional<double> detection_lower_bound; // one-sided Clopper-Pearson bound at the significance level
  std::uint64_t flagged = 0;
};

/// Smallest c with P(Binomial(m, noise) > c) <= alpha.
inline std::uint64_t failure_threshold(std::uint32_t m, double noise, double alpha) {
  if (m == 0 || noise <= 0.0) return 0;
  if (noise >= 1.0) return m;
  const boost::math::binomial_distribution<double> b(m, noise);
  for (std::uint64_t c = 0; c < m; ++c)
    if (boost::math::cdf(boost::math::complement(b, static_cast<double>(c))) <= alpha) return c;
  return m;
}

/// Expected check-failure probability of one event, by enumerating every
/// (pump, Bob member) under uniform priors and every resend choice of Eve.
inline double exact_disturbance(const SessionConfig& cfg) {
  const PumpWindow window = cfg.window();
  double total = 0.0;
  double weight = 0.0;
  for (Index pump = window.lo; pump <= window.hi; ++pump) {
    for (int member = 0; member < 3; ++member) {
      const World w{pump, pump - 1 - member};
      const OamState expected = predicted_state(w.alice_n(), window);
      double pass = 0.0;
      switch (cfg.eve) {
        case EveStrategy::Passthrough: pass = 1.0; break;
        case EveStrategy::ResendMeasuredValue: pass = fidelity(eigenstate(w.bob_n), expected); break;
        case EveStrategy::ResendRandomSuperposition: {
          const auto pairs = alice_pairs_given_bob(w.bob_n, window);
          for (const auto& p : pairs) pass += fidelity(predicted_state(p, window), expected);
          pass /= static_cast<double>(pairs.size());
          break;
        }
      }
      total += 1.0 - (1.0 - cfg.channel_noise) * pass;
      weight += 1.0;
    }
  }
  return total / weight;
}

/// Monte Carlo of check-mode rounds under an intercept-resend Eve. Each trial
/// is one session of check_rounds events; a session is flagged when its
/// failure count exceeds the binomial threshold of an honest noisy channel.
inline DetectionReport intercept_resend_sim(const DetectionConfig& dc) {
  DetectionReport rep;
  rep.strategy = dc.session.eve;
  rep.check_rounds = dc.check_rounds;
  rep.trials = dc.trials;
  rep.failure_threshold = failure_threshold(dc.check_rounds, dc.session.channel_noise, dc.significance);
  rep.per_event_disturbance_exact = exact_disturbance(dc.session);
  if (dc.check_rounds == 0 || dc.trials == 0) return rep;

  const CodeTable table = dc.session.table();
  struct Acc {
    std::uint64_t failures = 0;
    std::uint64_t flagged = 0;
  };
  const Acc acc = parallel_reduce<Acc>(
      dc.trials, dc.jobs,
      [&](std::uint64_t lo, std::uint64_t hi, Acc& a) {
        for (std::uint64_t trial = lo; trial < hi; ++trial) {
          SessionConfig cfg = dc.session;
          cfg.check_fraction = 1.0;
          cfg.seed = Rng::for_stream(dc.session.seed, trial, StreamTag::Trial).next_u64();
          std::uint64_t fails = 0;
          for (std::uint32_t r = 0; r < dc.check_rounds; ++r) {
            const RoundInputs in = feed_round(cfg, r);
            if (!bob_check_passes(in, in.event.alice_pair, table, cfg.window(), cfg.channel_noise)) ++fails;
          }
          a.failures += fails;
          if (fails > rep.failure_threshold) ++a.flagged;
        }
      },
      [](Acc& into, const Acc& part) {
        into.failures += part.failures;
        into.flagged += part.flagged;
      });

  rep.flagged = acc.flagged;
  rep.per_event_disturbance =
      static_cast<double>(acc.failures) / (static_cast<double>(dc.trials) * static_cast<double>(dc.check_rounds));
  rep.aggregate_analytic = 1.0 - std::pow(1.0 - rep.per_event_disturbance_exact, dc.check_rounds);
  rep.detection_rate = static_cast<double>(acc.flagged) / static_cast<double>(dc.trials);
  rep.detection_lower_bound = boost::math::binomial_distribution<double>::find_lower_bound_on_p(
      dc.trials, static_cast<double>(acc.flagged), dc.significance);
  return rep;
}

/// Plug-in mutual information (bits) of a joint histogram.
inline double mutual_information(const std::map<std::pair<Index, Index>, std::uint64_t>& joint) {
  std::map<Index, double> px, py;
  double n = 0.0;
  for (const auto& [xy, c] : joint) {
    px[xy.first] += static_cast<double>(c);
    py[xy.second] += static_cast<double>(c);
    n += static_cast<double>(c);
  }
  if (n == 0.0) return 0.0;
  double mi = 0.0;
  for (const auto& [xy, c] : joint) {
    const double pxy = static_cast<double>(c) / n;
    mi += pxy * std::log2(pxy * n * n / (px[xy.first] * py[xy.second]));
  }
  return std::max(0.0, mi);
}

struct PnsConfig {
  SourceConfig source;
  unsigned photons_per_pulse = 2;
  std::uint64_t trials = 100000;
  bool correlated = false; // ablation: every photon of a pulse shares one pump draw
  unsigned jobs = 1;
};

/// Mean mutual information (bits) between the pump value of the siphoned
/// photon (the first of a pulse) and that of each pulse-mate.
inline double pns_immunity_stat(const PnsConfig& pc) {
  if (pc.photons_per_pulse < 1) throw DomainError("pns: a pulse holds at least one photon");
  pc.source.validate();
  if (pc.photons_per_pulse == 1) return 0.0;
  using Joint = std::vector<std::map<std::pair<Index, Index>, std::uint64_t>>;
  const unsigned mates = pc.photons_per_pulse - 1;
  const Joint joint = parallel_reduce<Joint>(
      pc.trials, pc.jobs,
      [&](std::uint64_t lo, std::uint64_t hi, Joint& acc) {
        acc.resize(mates);
        for (std::uint64_t t = lo; t < hi; ++t) {
          auto pulse = emit_pulse(pc.source, t, pc.photons_per_pulse);
          for (unsigned j = 0; j < mates; ++j) {
            const Index mate = pc.correlated ? pulse[0].pump_n : pulse[j + 1].pump_n;
            ++acc[j][{pulse[0].pump_n, mate}];
          }
        }
      },
      [&](Joint& into, const Joint& part) {
        into.resize(mates);
        for (std::size_t j = 0; j < part.size(); ++j)
          for (const auto& [k, c] : part[j]) into[j][k] += c;
      });
  double mi = 0.0;
  for (const auto& h : joint) mi += mutual_information(h);
  return mi / static_cast<double>(mates);
}

} // namespace fibqkd

#endif // FIBQKD_DETECTION_HPP
