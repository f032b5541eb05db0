#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "ambres/hybrid.hpp"
#include "ambres/gnss.hpp"
#include "ambres/matrix_io.hpp"
#include "ambres/scenario_io.hpp"
#include "csv.hpp"

namespace ambres::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

using Row = std::vector<Cell>;

std::optional<double> env_double(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const double d = std::strtod(v, &end);
  if (end == v || *end != '\0' || !std::isfinite(d)) {
    throw Error(ErrorCode::InvalidInput, fmt::format("{} is not a number: {}", name, v));
  }
  return d;
}

std::string join(const IntVector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v(i));
  return s;
}

Vector parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad number in vector: " + item);
    }
  }
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Runs f(i) for i in [0, n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < n; i = next++) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Runner {
 public:
  Runner(const Settings& s, const Constants& k) : s_(s), k_(k) {}

  void run(std::ostream& out) {
    const std::string& c = s_.command;
    if (s_.format != "csv") throw Error(ErrorCode::InvalidInput, "only csv output is supported");
    if (s_.samples < 0) throw Error(ErrorCode::InvalidInput, "--samples must be >= 0");
    if (c == "decode") {
      decode();
    } else if (c == "voronoi") {
      voronoi();
    } else if (c == "bounds") {
      bounds();
    } else if (c == "mc") {
      mc();
    } else if (c == "sweep-iono") {
      sweep_iono(s_.kinds.empty() ? std::vector<std::string>{"cold"} : s_.kinds);
    } else if (c == "init-compare") {
      sweep_iono(s_.kinds.empty() ? std::vector<std::string>{"cold", "non_self", "self"} : s_.kinds);
    } else if (c == "sweep-duration") {
      sweep_duration();
    } else if (c == "range-error") {
      range_error();
    } else {
      throw Error(ErrorCode::InvalidInput, "unknown command " + c);
    }
    table_->write(out, provenance());
  }

 private:
  std::vector<std::pair<std::string, std::string>> provenance() const {
    std::vector<std::pair<std::string, std::string>> p = {
        {"tool", fmt::format("ambres {}", kVersion)},
        {"command", s_.command},
        {"seed", std::to_string(s_.seed)},
        {"samples", std::to_string(s_.samples)},
        {"decoder_c", fmt::format("{:g}", k_.decoder_c)},
        {"voronoi_c", k_.voronoi_c ? fmt::format("{:g}", *k_.voronoi_c) : std::string("2*a_min^2+10")},
        {"facet_window", fmt::format("{:g}", k_.facet_window)},
        {"mc_window", fmt::format("{:g}", k_.mc_window)},
        {"gap_threshold", fmt::format("{:g}", k_.gap_threshold)},
    };
    if (!s_.scenario_path.empty()) p.emplace_back("scenario", s_.scenario_path);
    if (!s_.model_path.empty()) p.emplace_back("model", s_.model_path);
    if (s_.h_prime) p.emplace_back("h_prime_log_odds", fmt::format("{:g}", *s_.h_prime));
    if (s_.command == "mc") p.emplace_back("variant", s_.variant);
    return p;
  }

  std::optional<HPrime> h() const {
    if (!s_.h_prime) return std::nullopt;
    return HPrime::from_log_odds(*s_.h_prime);
  }

  DecoderOptions decoder_options() const {
    DecoderOptions d;
    d.c = k_.decoder_c;
    return d;
  }

  BoundOptions bound_options() const {
    BoundOptions b;
    b.facet_window = k_.facet_window;
    return b;
  }

  HybridOptions hybrid_options(int mc_threads) const {
    HybridOptions o;
    o.gap_threshold = k_.gap_threshold;
    o.samples = s_.samples;
    o.seed = s_.seed;
    o.voronoi_c = k_.voronoi_c;
    o.bounds = bound_options();
    o.decoder = decoder_options();
    o.mc.threads = mc_threads;
    o.mc.neighbor_window = k_.mc_window;
    return o;
  }

  gnss::Scenario scenario() const {
    if (s_.scenario_path.empty()) throw Error(ErrorCode::InvalidInput, "--scenario is required");
    return gnss::read_scenario_file(s_.scenario_path);
  }

  AmbiguityModel model() const {
    if (!s_.model_path.empty()) return read_model_file(s_.model_path);
    if (!s_.scenario_path.empty()) return gnss::build_model(scenario());
    throw Error(ErrorCode::InvalidInput, "--model or --scenario is required");
  }

  std::vector<gnss::MeasurementSet> sets(const gnss::Scenario& sc) const {
    std::vector<gnss::MeasurementSet> out;
    for (const auto& name : s_.sets) out.push_back(gnss::parse_measurement_set(name));
    if (out.empty()) out.push_back(sc.measurement_set);
    return out;
  }

  std::vector<double> grid_or(std::vector<double> fallback) const {
    std::vector<double> g = s_.grid.empty() ? std::move(fallback) : s_.grid;
    check_grid(g, "--grid");
    return g;
  }

  static void add_rate_rows(Row prefix, const HybridRate& r, std::vector<Row>& rows) {
    for (const RateRow& rr : r.rows) {
      Row row = prefix;
      row.insert(row.end(), {Cell{rr.method}, Cell{rr.value}, Cell{rr.complement}, Cell{rr.log_odds},
                             Cell{rr.log_odds_error}, Cell{rr.samples}, Cell{rr.selected}});
      rows.push_back(std::move(row));
    }
  }

  static std::vector<std::string> rate_columns(std::vector<std::string> prefix) {
    for (const char* c : {"method", "alpha", "alpha_complement", "log10_odds", "log10_odds_error", "samples",
                          "selected"}) {
      prefix.emplace_back(c);
    }
    return prefix;
  }

  void decode() {
    const AmbiguityModel m = model();
    const Decoder dec(m, decoder_options());
    std::vector<Vector> nus;
    if (!s_.nu.empty()) {
      nus.push_back(parse_vector(s_.nu));
      if (nus.back().size() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "--nu length differs from the model");
    } else {
      if (s_.count < 1) throw Error(ErrorCode::InvalidInput, "--count must be >= 1");
      for (int i = 0; i < s_.count; ++i) {
        nus.push_back(gnss::simulate_float_solution(m, IntVector::Zero(m.dim()), s_.seed + i));
      }
    }
    table_.emplace(std::vector<std::string>{"index", "method", "accepted", "chosen", "winner", "confidence",
                                            "confidence_complement", "visited_nodes"});
    const auto hp = h();
    for (std::size_t i = 0; i < nus.size(); ++i) {
      const DecisionOutcome o = hp ? dec.decide(nus[i], *hp) : dec.map(nus[i]);
      table_->add({Cell{static_cast<std::int64_t>(i)}, Cell{std::string(hp ? "conditional" : "map")},
                   Cell{o.chosen.has_value()}, Cell{o.chosen ? join(*o.chosen) : std::string()},
                   Cell{join(o.winner)}, Cell{o.confidence}, Cell{o.complement}, Cell{o.visited_nodes}});
    }
  }

  void voronoi() {
    const AmbiguityModel m = model();
    const RelevantVectorSet rv = relevant_vectors(Decoder(m, decoder_options()), k_.voronoi_c);
    table_.emplace(std::vector<std::string>{"index", "a", "a_squared", "vector"});
    for (int i = 0; i < rv.size(); ++i) {
      table_->add({Cell{std::int64_t{i}}, Cell{rv.distances[i]}, Cell{rv.distances[i] * rv.distances[i]},
                   Cell{join(rv.vectors[i])}});
    }
  }

  void bounds() {
    const AmbiguityModel m = model();
    const RelevantVectorSet rv = relevant_vectors(Decoder(m, decoder_options()), k_.voronoi_c);
    const auto hp = h();
    const RateBoundResult b = hp ? conditional_bounds(rv, *hp, bound_options()) : map_bounds(rv, bound_options());
    table_.emplace(std::vector<std::string>{"method", "quantity", "value", "complement", "log10_odds"});
    table_->add({Cell{std::string("bound-lower")}, Cell{std::string("alpha")}, Cell{b.alpha_lower},
                 Cell{b.alpha_lower_complement}, Cell{log_odds(b.alpha_lower, b.alpha_lower_complement)}});
    table_->add({Cell{std::string("bound-upper")}, Cell{std::string("alpha")}, Cell{b.alpha_upper},
                 Cell{b.alpha_upper_complement}, Cell{log_odds(b.alpha_upper, b.alpha_upper_complement)}});
    if (hp) {
      table_->add({Cell{std::string("bound-lower")}, Cell{std::string("beta")}, Cell{b.beta_lower},
                   Cell{1.0 - b.beta_lower}, Cell{log_odds(b.beta_lower)}});
      table_->add({Cell{std::string("bound-upper")}, Cell{std::string("beta")}, Cell{b.beta_upper},
                   Cell{1.0 - b.beta_upper}, Cell{log_odds(b.beta_upper)}});
    }
  }

  void mc() {
    if (s_.samples < 1) throw Error(ErrorCode::InvalidInput, "--samples must be >= 1 for mc");
    const AmbiguityModel m = model();
    const Decoder dec(m, decoder_options());
    const RelevantVectorSet rv = relevant_vectors(dec, k_.voronoi_c);
    const auto hp = h();
    McOptions mo;
    mo.threads = s_.threads;
    mo.neighbor_window = k_.mc_window;
    table_.emplace(std::vector<std::string>{"method", "quantity", "proposal", "value", "std_error", "complement",
                                            "complement_error", "log10_odds", "log10_odds_error", "samples",
                                            "truncation_estimate"});
    auto add = [&](const std::string& method, const std::string& quantity, const std::string& proposal,
                   const RateEstimate& e) {
      const bool has_c = std::isfinite(e.complement);
      const double lo = has_c ? e.log_odds() : log_odds(e.value);
      const double le = has_c ? e.log_odds_error() : e.std_error / (e.value * (1.0 - e.value) * std::log(10.0));
      table_->add({Cell{method}, Cell{quantity}, Cell{proposal}, Cell{e.value}, Cell{e.std_error},
                   Cell{has_c ? e.complement : 1.0 - e.value}, Cell{has_c ? e.complement_error : e.std_error},
                   Cell{lo}, Cell{le}, Cell{e.samples}, Cell{e.truncation_estimate}});
    };

    if (s_.variant == "v2") {
      if (!hp) throw Error(ErrorCode::InvalidInput, "variant v2 needs --h-prime");
      const std::string name = s_.proposal.empty() ? "shifted" : s_.proposal;
      ProposalForm q = ProposalForm::identity_of(m);
      if (name == "shifted") {
        q = shifted_proposal(m, *hp, rv);
      } else if (name != "model") {
        throw Error(ErrorCode::InvalidInput, "variant v2 supports --proposal shifted or model");
      }
      add("mc-v2", "beta", name, mc_rate_shifted(dec, *hp, rv, q, s_.samples, s_.seed, mo));
      return;
    }
    if (s_.variant != "v1") throw Error(ErrorCode::InvalidInput, "--variant must be v1 or v2");
    const std::string name = s_.proposal.empty() ? "optimized" : s_.proposal;
    ProposalForm q = ProposalForm::identity_of(m);
    if (name == "optimized") {
      q = optimize_proposal(m, hp, rv, q, RateTarget::Beta, {}, bound_options()).proposal;
    } else if (name == "shifted") {
      if (!hp) throw Error(ErrorCode::InvalidInput, "the shifted proposal needs --h-prime");
      q = shifted_proposal(m, *hp, rv);
    } else if (name != "model") {
      throw Error(ErrorCode::InvalidInput, "--proposal must be model, optimized or shifted");
    }
    add("mc-v1", "alpha", name, mc_rate(dec, hp, RateTarget::Alpha, q, s_.samples, s_.seed, mo));
    if (hp) add("mc-v1", "beta", name, mc_rate(dec, hp, RateTarget::Beta, q, s_.samples, s_.seed, mo));
  }

  void sweep_iono(const std::vector<std::string>& kind_names) {
    const gnss::Scenario base = scenario();
    const auto set_list = sets(base);
    const auto grid = grid_or({0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.03});
    std::vector<gnss::InitKind> kinds;
    for (const auto& k : kind_names) {
      if (k == "cold") {
        kinds.push_back(gnss::InitKind::Cold);
      } else if (k == "non_self") {
        kinds.push_back(gnss::InitKind::NonSelf);
      } else if (k == "self") {
        kinds.push_back(gnss::InitKind::Self);
      } else {
        throw Error(ErrorCode::InvalidInput, "unknown init kind " + k);
      }
    }
    struct Task {
      gnss::MeasurementSet set;
      double sigma;
      gnss::InitKind kind;
    };
    std::vector<Task> tasks;
    for (auto set : set_list)
      for (double sigma : grid)
        for (auto kind : kinds) tasks.push_back({set, sigma, kind});

    std::vector<std::vector<Row>> rows(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), s_.threads, [&](int i) {
      const Task& t = tasks[i];
      gnss::Scenario sc = base;
      sc.measurement_set = t.set;
      sc.sigma_delta_iono = t.sigma;
      if (t.kind == gnss::InitKind::Self) sc.windup_informed = true;
      const AmbiguityModel m = gnss::succeeding_init_model(sc, t.kind);
      const HybridRate r = hybrid_rate(m, h(), hybrid_options(1));
      add_rate_rows({Cell{std::string(gnss::to_string(t.set))}, Cell{t.sigma}, Cell{sc.baseline_length()},
                     Cell{std::string(gnss::to_string(t.kind))}},
                    r, rows[i]);
    });
    table_.emplace(rate_columns({"measurement_set", "sigma_delta_iono_m", "baseline_m", "init"}));
    for (auto& block : rows)
      for (auto& r : block) table_->add(std::move(r));
  }

  void sweep_duration() {
    const gnss::Scenario base = scenario();
    const auto durations = grid_or({1, 10, 25, 50});
    std::vector<double> starts = s_.starts.empty() ? std::vector<double>{0} : s_.starts;
    check_grid(starts, "--starts");
    std::vector<gnss::CoordinatesPrior> coords;
    for (const auto& c : s_.coords.empty() ? std::vector<std::string>{"static", "kinematic"} : s_.coords) {
      if (c == "static") {
        coords.push_back(gnss::CoordinatesPrior::Static);
      } else if (c == "kinematic") {
        coords.push_back(gnss::CoordinatesPrior::Kinematic);
      } else {
        throw Error(ErrorCode::InvalidInput, "unknown coordinates prior " + c);
      }
    }
    const int total = static_cast<int>(base.satellites.size());
    struct Task {
      int start;
      int epochs;
      gnss::CoordinatesPrior coords;
    };
    std::vector<Task> tasks;
    for (double st : starts) {
      for (double d : durations) {
        const int first = static_cast<int>(std::lround(st / base.epoch_interval));
        const int n = std::max(1, static_cast<int>(std::lround(d / base.epoch_interval)));
        if (first < 0 || first + n > total) {
          throw Error(ErrorCode::InvalidInput,
                      fmt::format("window start {} duration {} exceeds the scenario's {} epochs", st, d, total));
        }
        for (auto c : coords) tasks.push_back({first, n, c});
      }
    }
    std::vector<std::vector<Row>> rows(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), s_.threads, [&](int i) {
      const Task& t = tasks[i];
      gnss::Scenario sc = base;
      sc.satellites.assign(base.satellites.begin() + t.start, base.satellites.begin() + t.start + t.epochs);
      sc.n_epochs = t.epochs;
      sc.pre_measurement_epochs = 0;
      sc.coordinates_prior = t.coords;
      const HybridRate r = hybrid_rate(gnss::build_model(sc), h(), hybrid_options(1));
      add_rate_rows({Cell{t.start * base.epoch_interval}, Cell{t.epochs * base.epoch_interval},
                     Cell{std::string(gnss::to_string(t.coords))}},
                    r, rows[i]);
    });
    table_.emplace(rate_columns({"start_s", "duration_s", "coordinates"}));
    for (auto& block : rows)
      for (auto& r : block) table_->add(std::move(r));
  }

  void range_error() {
    const gnss::Scenario base = scenario();
    const auto set_list = sets(base);
    const auto grid = grid_or({0.0, 0.005, 0.01, 0.02, 0.03});
    table_.emplace(std::vector<std::string>{"measurement_set", "sigma_delta_iono_m", "epoch", "variance_m2",
                                            "std_m"});
    for (auto set : set_list) {
      for (double sigma : grid) {
        gnss::Scenario sc = base;
        sc.measurement_set = set;
        sc.sigma_delta_iono = sigma;
        const auto v = gnss::range_error_variance(sc);
        for (std::size_t e = 0; e < v.size(); ++e) {
          table_->add({Cell{std::string(gnss::to_string(set))}, Cell{sigma}, Cell{static_cast<std::int64_t>(e)},
                       Cell{v[e]}, Cell{std::sqrt(v[e])}});
        }
      }
    }
  }

  const Settings& s_;
  const Constants& k_;
  std::optional<CsvTable> table_;
};

}  // namespace

Constants constants_from_env() {
  Constants k;
  if (auto v = env_double("AMBRES_DECODER_C")) k.decoder_c = *v;
  if (auto v = env_double("AMBRES_VORONOI_C")) k.voronoi_c = *v;
  if (auto v = env_double("AMBRES_FACET_WINDOW")) k.facet_window = *v;
  if (auto v = env_double("AMBRES_MC_WINDOW")) k.mc_window = *v;
  if (auto v = env_double("AMBRES_GAP_THRESHOLD")) k.gap_threshold = *v;
  return k;
}

void check_grid(const std::vector<double>& grid, const std::string& what) {
  if (grid.empty()) throw Error(ErrorCode::InvalidInput, what + " must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw Error(ErrorCode::InvalidInput, what + " has a non-finite value");
    if (i && !(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidInput, what + " must be strictly increasing");
  }
}

void run_command(const Settings& s, const Constants& k, std::ostream& out) { Runner(s, k).run(out); }

}  // namespace ambres::cli
