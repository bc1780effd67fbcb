// Command-line front end: table dumps, local simulation, two-process exchange,
// adversary analysis and parameter sweeps.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fibqkd.hpp"

using fibqkd::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAbort = 2;

const std::vector<std::string> kSubcommands{"tables",       "simulate",   "exchange",     "eve-analysis",
                                            "detect-sim",   "rate-sweep", "entropy-sweep"};

/// JSON configuration files. Top-level scalars apply to whichever subcommand
/// runs; objects named after a subcommand apply only to it. Keys are long
/// flag names without the leading dashes.
class JsonConfig : public CLI::Config {
public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        for (const auto& [k2, v2] : value.items()) items.push_back(item({key}, k2, v2));
      } else {
        for (const auto& sub : kSubcommands) items.push_back(item({sub}, key, value));
      }
    }
    return items;
  }

private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const json& v) {
    CLI::ConfigItem it;
    it.parents = std::move(parents);
    it.name = name;
    if (v.is_array()) {
      for (const auto& e : v) it.inputs.push_back(scalar(e));
    } else {
      it.inputs.push_back(scalar(v));
    }
    return it;
  }
};

/// Writes to --out when given, stdout otherwise.
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw fibqkd::ConfigError("cannot open output file " + path);
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

std::pair<fibqkd::Index, fibqkd::Index> parse_window(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw fibqkd::ConfigError("window must be lo:hi, got '" + s + "'");
  try {
    std::size_t a = 0, b = 0;
    const int lo = std::stoi(s.substr(0, colon), &a);
    const int hi = std::stoi(s.substr(colon + 1), &b);
    if (a != colon || b != s.size() - colon - 1) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw fibqkd::ConfigError("window must be lo:hi, got '" + s + "'");
  }
}

fibqkd::EdgeConvention parse_convention(const std::string& s) {
  if (s == "prose") return fibqkd::EdgeConvention::ProseLeftOne;
  if (s == "formula") return fibqkd::EdgeConvention::FormulaMod4;
  throw fibqkd::ConfigError("convention must be prose or formula");
}

const char* convention_flag(fibqkd::EdgeConvention c) {
  return c == fibqkd::EdgeConvention::ProseLeftOne ? "prose" : "formula";
}

std::string join(const std::vector<fibqkd::Value>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s.push_back(sep);
    s += std::to_string(v[i]);
  }
  return s;
}

// ---------------------------------------------------------------- session flags

struct SessionArgs {
  std::uint64_t seed = 0;
  std::uint32_t rounds = 1000;
  unsigned set_size = 8;
  std::string window;
  double check_fraction = 0.1;
  std::string convention = "formula";
  std::string eve = "passthrough";
  double noise = 0.0;

  void attach(CLI::App* app, bool with_eve) {
    app->add_option("--seed", seed, "Seed of the shared event feed")->envname("QKD_SEED");
    app->add_option("--rounds", rounds, "Number of source events")->capture_default_str();
    app->add_option("--n-set-size,--n", set_size, "Key alphabet size N (power of two)")->capture_default_str();
    app->add_option("--window", window, "Pump window lo:hi (default lo=4, hi=lo+N+3)");
    app->add_option("--check-fraction", check_fraction, "Probability of a check-mode round")->capture_default_str();
    app->add_option("--convention", convention, "Edge reply convention")
        ->check(CLI::IsMember({"prose", "formula"}))
        ->capture_default_str();
    if (with_eve) {
      app->add_option("--eve", eve, "Eavesdropper on Bob's photon")
          ->check(CLI::IsMember({"passthrough", "resend_measured_value", "resend_random_superposition"}))
          ->capture_default_str();
      app->add_option("--noise", noise, "Channel noise probability on checks")->capture_default_str();
    }
  }

  fibqkd::SessionConfig build() const {
    fibqkd::SessionConfig cfg;
    cfg.seed = seed;
    cfg.rounds = rounds;
    cfg.set_size = set_size;
    if (!window.empty()) {
      const auto [lo, hi] = parse_window(window);
      cfg.window_lo = lo;
      cfg.window_hi = hi;
    }
    cfg.check_fraction = check_fraction;
    cfg.convention = parse_convention(convention);
    cfg.eve = fibqkd::parse_eve_strategy(eve);
    cfg.channel_noise = noise;
    cfg.validate();
    return cfg;
  }
};

json session_params(const fibqkd::SessionConfig& cfg) {
  return {{"seed", cfg.seed},
          {"rounds", cfg.rounds},
          {"n_set_size", cfg.set_size},
          {"window", {cfg.window_lo, cfg.hi()}},
          {"check_fraction", cfg.check_fraction},
          {"convention", convention_flag(cfg.convention)},
          {"eve", fibqkd::to_string(cfg.eve)},
          {"noise", cfg.channel_noise}};
}

bool session_failed(const fibqkd::SessionReport& r) { return r.status != fibqkd::SessionStatus::Completed; }

// ---------------------------------------------------------------- tables

struct TablesArgs {
  std::string table;
  fibqkd::Index n = 10;
  std::string window = "4:11";
  std::string convention = "formula";
  std::string format = "csv";
  std::string out;
};

void table_t1(const TablesArgs& a, std::ostream& os) {
  const fibqkd::CodeTable t(a.n);
  if (a.format == "json") {
    os << json{{"table", "t1"}, {"n", a.n}, {"rows", fibqkd::to_json(t)}}.dump(2) << "\n";
    return;
  }
  os << "# fibqkd tables --table t1 --n " << a.n << "\n";
  os << "n,value,bit,pos,side\n";
  for (const auto& e : t.entries()) {
    os << e.n << "," << e.value << "," << int(e.bit) << "," << (e.pos == fibqkd::Position::Center ? "c" : "e") << ","
       << (e.side ? (*e.side == fibqkd::Side::Left ? "left" : "right") : "-") << "\n";
  }
}

void table_t2(const TablesArgs& a, std::ostream& os) {
  const auto [lo, hi] = parse_window(a.window);
  const fibqkd::PumpWindow w{lo, hi};
  const fibqkd::CodeTable t(hi);
  json rows = json::array();
  for (fibqkd::Index n1 = std::max(1, lo - 3); n1 < hi; ++n1) {
    for (fibqkd::Index gap : {1, 2}) {
      const fibqkd::Index n2 = n1 + gap;
      if (fibqkd::pumps_for_alice_pair(n1, n2, w).empty()) continue;
      const auto pred = fibqkd::predict_bob_state({t.value(n1), t.value(n2)}, t, w);
      rows.push_back({{"pair_n", {n1, n2}},
                      {"pair", {t.value(n1), t.value(n2)}},
                      {"bits", {fibqkd::bit_alloc(n1), fibqkd::bit_alloc(n2)}},
                      {"kind", gap == 1 ? "adjacent" : "discontinuous"},
                      {"rule", fibqkd::alice_rule(n1, n2) == fibqkd::AliceRule::InvertedTwice ? 1 : 2},
                      {"bob_candidates", pred.support}});
    }
  }
  if (a.format == "json") {
    os << json{{"table", "t2"}, {"window", {lo, hi}}, {"rows", rows}}.dump(2) << "\n";
    return;
  }
  os << "# fibqkd tables --table t2 --window " << lo << ":" << hi << "\n";
  os << "n1,n2,value1,value2,bits,kind,rule,bob_candidates\n";
  for (const auto& r : rows) {
    os << r["pair_n"][0] << "," << r["pair_n"][1] << "," << r["pair"][0] << "," << r["pair"][1] << ","
       << r["bits"][0] << r["bits"][1] << "," << r["kind"].get<std::string>() << "," << r["rule"] << ","
       << join(r["bob_candidates"].get<std::vector<fibqkd::Value>>(), '/') << "\n";
  }
}

void table_t5(const TablesArgs& a, std::ostream& os) {
  const auto [lo, hi] = parse_window(a.window);
  const auto conv = parse_convention(a.convention);
  struct Row {
    int count = 0;
    std::set<std::string> transcripts;
  };
  std::map<std::tuple<int, std::string, std::string>, Row> rows;
  for (fibqkd::Index pump = std::max(lo, 4); pump <= hi; ++pump) {
    for (fibqkd::Index b = pump - 3; b <= pump - 1; ++b) {
      const fibqkd::World w{pump, b};
      const auto p = w.alice_n();
      const bool r1 = fibqkd::alice_rule(p[0], p[1]) == fibqkd::AliceRule::InvertedTwice;
      for (fibqkd::Bit latent : r1 ? std::vector<fibqkd::Bit>{0} : std::vector<fibqkd::Bit>{0, 1}) {
        const auto c = fibqkd::classify_case(w, latent);
        auto& row = rows[{r1 ? 1 : 2, c.bob_position == fibqkd::Position::Center ? "center" : "edge",
                          c.first_bit_matches_bob ? "match" : "mismatch"}];
        ++row.count;
        row.transcripts.insert(fibqkd::forward_transcript(w, latent, conv).str());
      }
    }
  }
  json out = json::array();
  for (int rule : {1, 2})
    for (const char* pos : {"center", "edge"})
      for (const char* m : {"match", "mismatch"}) {
        const auto it = rows.find({rule, pos, m});
        const Row r = it == rows.end() ? Row{} : it->second;
        out.push_back({{"rule", rule},
                       {"bob_position", pos},
                       {"first_bit", m},
                       {"count", r.count},
                       {"transcripts", std::vector<std::string>(r.transcripts.begin(), r.transcripts.end())}});
      }
  if (a.format == "json") {
    os << json{{"table", "t5"}, {"window", {lo, hi}}, {"convention", a.convention}, {"rows", out}}.dump(2) << "\n";
    return;
  }
  os << "# fibqkd tables --table t5 --window " << lo << ":" << hi << " --convention " << a.convention << "\n";
  os << "rule,bob_position,first_bit,count,transcripts\n";
  for (const auto& r : out) {
    std::string ts;
    for (const auto& t : r["transcripts"]) ts += (ts.empty() ? "" : "/") + t.get<std::string>();
    os << r["rule"] << "," << r["bob_position"].get<std::string>() << "," << r["first_bit"].get<std::string>() << ","
       << r["count"] << "," << (ts.empty() ? "-" : ts) << "\n";
  }
}

void table_t6(const TablesArgs& a, std::ostream& os) {
  const auto [lo, hi] = parse_window(a.window);
  const auto d = fibqkd::enumerate_worlds({lo, hi}, fibqkd::KeyStrategy::V0_PumpSum, {}, parse_convention(a.convention));
  const auto diffs = fibqkd::diff_against_reference(d);
  const auto& ref = fibqkd::reference_candidate_keys();
  json rows = json::array();
  for (unsigned code = 0; code < 8; ++code) {
    const fibqkd::Transcript t{fibqkd::Bit((code >> 2) & 1), fibqkd::Bit((code >> 1) & 1), fibqkd::Bit(code & 1)};
    json row{{"bits", t.str()}, {"keys", d.candidate_keys(t)}, {"reference", ref[code]}};
    row["missing"] = json::array();
    row["extra"] = json::array();
    for (const auto& df : diffs)
      if (df.transcript == t) {
        row["missing"] = df.missing;
        row["extra"] = df.extra;
      }
    rows.push_back(row);
  }
  if (a.format == "json") {
    os << json{{"table", "t6"}, {"window", {lo, hi}}, {"convention", a.convention}, {"rows", rows}}.dump(2) << "\n";
    return;
  }
  os << "# fibqkd tables --table t6 --window " << lo << ":" << hi << " --convention " << a.convention << "\n";
  os << "transcript,keys,reference,missing,extra\n";
  for (const auto& r : rows) {
    auto cell = [](const json& v) {
      const auto xs = v.get<std::vector<fibqkd::Value>>();
      return xs.empty() ? std::string("-") : join(xs, '/');
    };
    os << r["bits"].get<std::string>() << "," << cell(r["keys"]) << "," << cell(r["reference"]) << ","
       << cell(r["missing"]) << "," << cell(r["extra"]) << "\n";
  }
}

int run_tables(const TablesArgs& a) {
  Sink sink(a.out);
  if (a.table == "t1") table_t1(a, sink.out());
  else if (a.table == "t2") table_t2(a, sink.out());
  else if (a.table == "t5") table_t5(a, sink.out());
  else table_t6(a, sink.out());
  return kExitOk;
}

// ---------------------------------------------------------------- simulate / exchange

int run_simulate(const SessionArgs& s, const std::string& out, const std::string& trace_out) {
  const auto cfg = s.build();
  const auto res = fibqkd::simulate_session(cfg, !trace_out.empty());
  json j{{"command", "simulate"},
         {"params", session_params(cfg)},
         {"alice", fibqkd::to_json(res.alice)},
         {"bob", fibqkd::to_json(res.bob)},
         {"eve_resolved_segments", res.eve_resolved_segments}};
  Sink sink(out);
  sink.out() << j.dump(2) << "\n";
  if (!trace_out.empty()) {
    Sink traces(trace_out);
    for (const auto& t : res.traces) traces.out() << fibqkd::to_json(t).dump() << "\n";
  }
  return session_failed(res.alice) || session_failed(res.bob) ? kExitAbort : kExitOk;
}

struct ExchangeArgs {
  std::string role;
  std::string listen;
  std::string connect;
  unsigned timeout_ms = 5000;
  unsigned connect_wait_ms = 10000;
  std::uint32_t session_id = 1;
  std::string out;
  std::string trace_out;
};

int run_exchange(const SessionArgs& s, const ExchangeArgs& e) {
  using namespace std::chrono;
  const auto cfg = s.build();
  if (e.listen.empty() == e.connect.empty()) throw fibqkd::ConfigError("give exactly one of --listen or --connect");
  std::unique_ptr<fibqkd::wire::Transport> transport;
  try {
    if (!e.listen.empty()) {
      fibqkd::wire::TcpListener listener(fibqkd::wire::parse_endpoint(e.listen));
      std::cerr << "listening on port " << listener.port() << "\n";
      transport = listener.accept(milliseconds(e.connect_wait_ms));
    } else {
      transport = fibqkd::wire::TcpTransport::connect(fibqkd::wire::parse_endpoint(e.connect),
                                                      milliseconds(e.connect_wait_ms));
    }
  } catch (const fibqkd::wire::TransportError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitAbort;
  }
  fibqkd::wire::SessionOptions opt;
  opt.round_timeout = milliseconds(e.timeout_ms);
  opt.session_id = e.session_id;
  opt.keep_traces = !e.trace_out.empty();
  const auto role = e.role == "alice" ? fibqkd::wire::Role::Alice : fibqkd::wire::Role::Bob;
  const auto outcome = fibqkd::wire::run_session(role, *transport, cfg, opt);
  transport->close();

  json params = session_params(cfg);
  params.erase("eve");
  params.erase("noise");
  Sink sink(e.out);
  sink.out() << json{{"command", "exchange"}, {"params", params}, {"report", fibqkd::to_json(outcome.report)}}.dump(2)
             << "\n";
  if (!e.trace_out.empty()) {
    Sink traces(e.trace_out);
    for (const auto& t : outcome.traces) traces.out() << fibqkd::to_json(t).dump() << "\n";
  }
  return session_failed(outcome.report) ? kExitAbort : kExitOk;
}

// ---------------------------------------------------------------- analysis and sweeps

struct EveArgs {
  std::string variant = "v0";
  std::string window = "4:11";
  std::string convention = "formula";
  unsigned n = 8;
  bool dump_worlds = false;
  std::string out;
};

int run_eve(const EveArgs& a) {
  const auto [lo, hi] = parse_window(a.window);
  const auto strategy = fibqkd::parse_key_strategy(a.variant);
  const fibqkd::PumpWindow w{lo, hi};
  const auto d = fibqkd::enumerate_worlds(w, strategy, {}, parse_convention(a.convention));
  json j = fibqkd::to_json(d, strategy, w);
  j["convention"] = a.convention;
  j["transcript_averaged_rate"] = fibqkd::transcript_averaged_rate(d);
  j["formula_rate"] = fibqkd::guess_rate_formula(a.n);
  j["formula_n"] = a.n;
  if (d.retained()) j["retained_transcript"] = d.retained()->str();
  if (a.dump_worlds) {
    json ws = json::array();
    for (const auto& ew : d.worlds()) {
      ws.push_back({{"pump", ew.world.pump},
                    {"bob_n", ew.world.bob_n},
                    {"latent", ew.latent},
                    {"random_first_bit", ew.random_first_bit ? json(*ew.random_first_bit) : json(nullptr)},
                    {"probability", ew.probability},
                    {"transcript", ew.transcript.str()},
                    {"key", ew.key}});
    }
    j["worlds"] = ws;
  }
  Sink sink(a.out);
  sink.out() << j.dump(2) << "\n";
  return kExitOk;
}

struct DetectArgs {
  std::uint64_t seed = 0;
  std::string eve = "resend_measured_value";
  std::vector<std::uint32_t> check_rounds{1, 2, 5, 10, 20, 50, 100, 200, 500};
  std::uint32_t trials = 200;
  double significance = 0.001;
  double noise = 0.0;
  unsigned set_size = 8;
  std::string window;
  unsigned jobs = 1;
  std::string out;
};

int run_detect(const DetectArgs& a) {
  fibqkd::DetectionConfig dc;
  dc.session.seed = a.seed;
  dc.session.set_size = a.set_size;
  if (!a.window.empty()) {
    const auto [lo, hi] = parse_window(a.window);
    dc.session.window_lo = lo;
    dc.session.window_hi = hi;
  }
  dc.session.eve = fibqkd::parse_eve_strategy(a.eve);
  dc.session.channel_noise = a.noise;
  dc.session.validate();
  dc.trials = a.trials;
  dc.significance = a.significance;
  dc.jobs = a.jobs;
  Sink sink(a.out);
  auto& os = sink.out();
  os << "# fibqkd detect-sim --seed " << a.seed << " --eve " << a.eve << " --trials " << a.trials
     << " --significance " << fibqkd::fmt_double(a.significance) << " --noise " << fibqkd::fmt_double(a.noise)
     << " --n " << a.set_size << " --window " << dc.session.window_lo << ":" << dc.session.hi() << "\n";
  os << "# detection_probability = flagged sessions / trials; a session is flagged when its check failures exceed "
        "the binomial threshold of an honest channel at the significance level\n";
  os << "check_rounds,detection_probability,detection_lower_bound,aggregate_analytic,per_event_disturbance,"
        "per_event_disturbance_exact,failure_threshold\n";
  for (std::uint32_t m : a.check_rounds) {
    dc.check_rounds = m;
    const auto r = intercept_resend_sim(dc);
    auto opt = [](const std::optional<double>& v) { return v ? fibqkd::fmt_double(*v) : std::string("nan"); };
    os << m << "," << opt(r.detection_rate) << "," << opt(r.detection_lower_bound) << "," << opt(r.aggregate_analytic)
       << "," << fibqkd::fmt_double(r.per_event_disturbance) << "," << fibqkd::fmt_double(r.per_event_disturbance_exact)
       << "," << r.failure_threshold << "\n";
  }
  return kExitOk;
}

struct RateArgs {
  fibqkd::ChannelParams channel;
  double distance_max = 200.0;
  double distance_step = 10.0;
  std::vector<unsigned> states{2, 8, 480};
  double sift = 1.0;
  double ecpa = 0.5;
  std::string out;
};

int run_rate(const RateArgs& a) {
  if (!(a.distance_step > 0.0) || !(a.distance_max >= 0.0)) throw fibqkd::ConfigError("invalid distance grid");
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double d = static_cast<double>(i) * a.distance_step;
    if (d > a.distance_max + 1e-9) break;
    grid.push_back(d);
  }
  std::vector<fibqkd::CodingSpace> spaces;
  for (unsigned s : a.states) spaces.push_back({s == 2 ? "sam" : "oam" + std::to_string(s), s});
  const auto rows = fibqkd::rate_sweep(a.channel, grid, spaces, a.sift, a.ecpa);
  Sink sink(a.out);
  auto& os = sink.out();
  const auto& c = a.channel;
  os << "# fibqkd rate-sweep pulse_rate_hz=" << fibqkd::fmt_double(c.pulse_rate_hz)
     << " mean_photons=" << fibqkd::fmt_double(c.mean_photons)
     << " fiber_loss_db_per_km=" << fibqkd::fmt_double(c.fiber_loss_db_per_km)
     << " detector_efficiency=" << fibqkd::fmt_double(c.detector_efficiency)
     << " dark_count_rate=" << fibqkd::fmt_double(c.dark_count_rate)
     << " gate_window_s=" << fibqkd::fmt_double(c.gate_window_s) << " sift=" << fibqkd::fmt_double(a.sift)
     << " ecpa=" << fibqkd::fmt_double(a.ecpa) << "\n";
  os << "# formula: " << fibqkd::kRateFormulaId << "\n";
  os << "distance_km,config,bits_per_detection,sifted_bps,secret_bps\n";
  for (const auto& r : rows) {
    os << fibqkd::fmt_double(r.point.distance_km) << "," << r.config << ","
       << fibqkd::fmt_double(r.point.bits_per_detection) << "," << fibqkd::fmt_double(r.point.sifted_rate) << ","
       << fibqkd::fmt_double(r.point.secret_rate) << "\n";
  }
  return kExitOk;
}

int run_entropy(const std::vector<unsigned>& ns, const std::string& out) {
  const auto rows = fibqkd::entropy_detection_sweep(ns);
  Sink sink(out);
  auto& os = sink.out();
  os << "# fibqkd entropy-sweep\n";
  os << "# entropy_base=log2(N); entropy_restricted=log2(10*(N+1)/9); detection_rate=1-9/(10*(N+1)); "
        "baseline_detection=1-(1/2+1/(2N)) for a two-basis N-dimensional protocol\n";
  os << "N,entropy_base,entropy_restricted,detection_rate,baseline_detection\n";
  for (const auto& r : rows) {
    os << r.n << "," << fibqkd::fmt_double(r.entropy_base) << "," << fibqkd::fmt_double(r.entropy_restricted) << ","
       << fibqkd::fmt_double(r.detection_rate) << "," << fibqkd::fmt_double(r.baseline_detection) << "\n";
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tribonacci OAM key distribution simulator"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option defaults; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  TablesArgs tables;
  auto* t = app.add_subcommand("tables", "Reproduce the code table, pair table, case split or candidate-key table");
  t->add_option("--table", tables.table, "t1 | t2 | t5 | t6")->required()->check(CLI::IsMember({"t1", "t2", "t5", "t6"}));
  t->add_option("--n", tables.n, "Rows of the code table")->check(CLI::Range(1, fibqkd::kMaxIndex))->capture_default_str();
  t->add_option("--window", tables.window, "Pump window lo:hi")->capture_default_str();
  t->add_option("--convention", tables.convention)->check(CLI::IsMember({"prose", "formula"}))->capture_default_str();
  t->add_option("--format", tables.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  t->add_option("--out", tables.out, "Output file (stdout when absent)");

  SessionArgs sim;
  std::string sim_out, sim_traces;
  auto* s = app.add_subcommand("simulate", "Run both peers in process, optionally with an eavesdropper");
  sim.attach(s, true);
  s->add_option("--out", sim_out, "Report file (stdout when absent)");
  s->add_option("--trace-out", sim_traces, "Per-round JSON-lines trace file");

  SessionArgs ex;
  ExchangeArgs exa;
  auto* e = app.add_subcommand("exchange", "Run one peer over TCP");
  ex.attach(e, false);
  e->add_option("--role", exa.role)->required()->check(CLI::IsMember({"alice", "bob"}));
  e->add_option("--listen", exa.listen, "host:port to accept one peer on");
  e->add_option("--connect", exa.connect, "host:port of the listening peer");
  e->add_option("--timeout-ms", exa.timeout_ms, "Per-message timeout")->capture_default_str();
  e->add_option("--connect-wait-ms", exa.connect_wait_ms, "How long to wait for the peer")->capture_default_str();
  e->add_option("--session-id", exa.session_id)->capture_default_str();
  e->add_option("--out", exa.out, "Report file (stdout when absent)");
  e->add_option("--trace-out", exa.trace_out, "Per-round JSON-lines trace file");

  EveArgs eve;
  auto* v = app.add_subcommand("eve-analysis", "Enumerate what a transcript-reading eavesdropper learns");
  v->add_option("--variant", eve.variant)->check(CLI::IsMember({"v0", "v1", "v2", "v3"}))->capture_default_str();
  v->add_option("--window", eve.window, "Pump window lo:hi")->capture_default_str();
  v->add_option("--convention", eve.convention)->check(CLI::IsMember({"prose", "formula"}))->capture_default_str();
  v->add_option("--n", eve.n, "N for the closed-form rate")->check(CLI::Range(2U, 1U << 20))->capture_default_str();
  v->add_flag("--dump-worlds", eve.dump_worlds, "Include the full world table");
  v->add_option("--out", eve.out, "Output file (stdout when absent)");

  DetectArgs det;
  auto* d = app.add_subcommand("detect-sim", "Monte Carlo of intercept-resend detection in check mode");
  d->add_option("--seed", det.seed)->envname("QKD_SEED");
  d->add_option("--eve", det.eve)
      ->check(CLI::IsMember({"passthrough", "resend_measured_value", "resend_random_superposition"}))
      ->capture_default_str();
  d->add_option("--check-rounds", det.check_rounds, "Check events per session (list)")->delimiter(',');
  d->add_option("--trials", det.trials)->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--significance", det.significance)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  d->add_option("--noise", det.noise)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  d->add_option("--n-set-size,--n", det.set_size)->capture_default_str();
  d->add_option("--window", det.window, "Pump window lo:hi");
  d->add_option("--jobs", det.jobs)->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--out", det.out, "Output file (stdout when absent)");

  RateArgs rate;
  auto* r = app.add_subcommand("rate-sweep", "Secret key rate versus fiber length");
  r->add_option("--distance-max", rate.distance_max)->capture_default_str();
  r->add_option("--distance-step", rate.distance_step)->capture_default_str();
  r->add_option("--states", rate.states, "Coding-space sizes (list)")->delimiter(',');
  r->add_option("--pulse-rate", rate.channel.pulse_rate_hz)->capture_default_str();
  r->add_option("--mu", rate.channel.mean_photons)->capture_default_str();
  r->add_option("--loss-db-per-km", rate.channel.fiber_loss_db_per_km)->capture_default_str();
  r->add_option("--eta", rate.channel.detector_efficiency)->capture_default_str();
  r->add_option("--dark-rate", rate.channel.dark_count_rate)->capture_default_str();
  r->add_option("--gate", rate.channel.gate_window_s)->capture_default_str();
  r->add_option("--sift", rate.sift)->capture_default_str();
  r->add_option("--ecpa", rate.ecpa)->capture_default_str();
  r->add_option("--jobs", det.jobs, "Accepted for symmetry; the sweep is closed form");
  r->add_option("--out", rate.out, "Output file (stdout when absent)");

  std::vector<unsigned> ns{2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::string ent_out;
  auto* h = app.add_subcommand("entropy-sweep", "Entropy per photon and detection rate versus N");
  h->add_option("--ns", ns, "Set sizes (list)")->delimiter(',');
  h->add_option("--out", ent_out, "Output file (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitConfig;
  }

  try {
    if (*t) return run_tables(tables);
    if (*s) return run_simulate(sim, sim_out, sim_traces);
    if (*e) return run_exchange(ex, exa);
    if (*v) return run_eve(eve);
    if (*d) return run_detect(det);
    if (*r) return run_rate(rate);
    if (*h) return run_entropy(ns, ent_out);
  } catch (const fibqkd::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const fibqkd::DomainError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::overflow_error& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
