#include "hitstat/experiments.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "hitstat/lawcheck.hpp"
#include "hitstat/measure.hpp"
#include "hitstat/recurrence.hpp"
#include "hitstat/systems.hpp"

namespace hitstat {

namespace fs = std::filesystem;

namespace {

const double kDefaultTarget = std::sqrt(2.0) - 1.0;

class IoError : public Error {
 public:
  using Error::Error;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

class CsvFile {
 public:
  CsvFile(const ExperimentConfig& cfg, const std::string& subcommand, const std::string& name,
          const std::string& columns)
      : path_(fs::path(cfg.out_dir) / name), out_(path_) {
    if (!out_) throw IoError("cannot write " + path_.string());
    out_ << "# config_hash=" << cfg.hash() << " seed=" << cfg.seed
         << " subcommand=" << subcommand << "\n"
         << columns << "\n";
  }

  template <class... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    auto put = [&](const auto& f) {
      if (!first) out_ << ',';
      first = false;
      using T = std::decay_t<decltype(f)>;
      if constexpr (std::is_floating_point_v<T>) {
        out_ << num(f);
      } else {
        out_ << f;
      }
    };
    (put(fields), ...);
    out_ << '\n';
  }

  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

 private:
  fs::path path_;
  std::ofstream out_;
};

class Run {
 public:
  Run(const ExperimentConfig& cfg, std::string subcommand)
      : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
    cfg_.validate();
    std::error_code ec;
    fs::create_directories(cfg_.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg_.out_dir);
    result_.manifest.subcommand = std::move(subcommand);
    result_.manifest.config_hash = cfg_.hash();
    result_.manifest.seed = cfg_.seed;
    result_.manifest.workers = cfg_.effective_workers();
  }

  const ExperimentConfig& cfg() const { return cfg_; }
  RunManifest& manifest() { return result_.manifest; }
  CsvFile csv(const std::string& name, const std::string& columns) {
    return CsvFile(cfg_, result_.manifest.subcommand, name, columns);
  }

  RunResult finish(bool pass) {
    auto& m = result_.manifest;
    m.pass = pass;
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(fs::path(cfg_.out_dir) / "manifest.json");
    if (!out) throw IoError("cannot write manifest.json");
    out << m.to_json().dump(2) << "\n";
    result_.exit_code = pass ? ExitCode::ok : ExitCode::check_failed;
    return result_;
  }

 private:
  ExperimentConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  RunResult result_;
};

double target_of(const ExperimentConfig& cfg) { return cfg.target.value_or(kDefaultTarget); }

std::vector<double> radii_or(const ExperimentConfig& cfg, std::vector<double> fallback) {
  return cfg.radii.empty() ? fallback : cfg.radii;
}

MeasureEstimate stationary_for(const RandomSystem& system, const ExperimentConfig& cfg,
                               bool force_empirical) {
  StationaryOptions opt;
  opt.burn_in = cfg.system.burn_in;
  opt.samples = cfg.measure_samples;
  opt.seed = derive_stream_seed(cfg.seed, "measure", 0);
  opt.force_empirical = force_empirical;
  opt.workers = cfg.effective_workers();
  return estimate_stationary(system, opt);
}

RunResult run_law(const ExperimentConfig& cfg, const std::string& subcommand, StartLaw law,
                  double default_tolerance) {
  Run run(cfg, subcommand);
  const RandomSystem system(cfg.system);
  const auto radii = radii_or(cfg, {0.005});
  if (radii.size() != 1) {
    throw ConfigError(ConfigError::Kind::out_of_range, "radius",
                      "radius: " + subcommand + " takes exactly one radius");
  }
  const Ball target(target_of(cfg), radii.front());
  const MeasureEstimate nu = stationary_for(system, cfg, cfg.empirical);
  const MassEstimate mass = nu.ball_mass(target);
  if (law == StartLaw::conditional && !nu.analytic() && mass.mass < 1e-6) {
    throw RejectionStall("conditional acceptance rate below 1e-6");
  }
  if (!(mass.mass > 0.0)) throw ZeroMass("target ball has zero estimated mass");

  BatchOptions opt;
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  opt.tag = subcommand;
  opt.start = law;
  opt.cutoff = cfg.cutoff.value_or(CutoffRule{std::nullopt, cfg.cutoff_factor}.for_mass(mass.mass));
  opt.workers = cfg.effective_workers();
  const auto samples = simulate_hitting_times(system, nu, target, opt);

  {
    CsvFile out = run.csv("samples.csv", "sample_id,tau,rescaled_tau,censored");
    for (const auto& s : samples) out.row(s.sample_id, s.tau, s.rescaled(), s.censored ? 1 : 0);
  }
  const auto grid = parse_t_grid(cfg.t_grid);
  const SurvivalCurve curve = survival_curve(samples, grid);
  {
    CsvFile out = run.csv("survival.csv", "t,empirical_survival,exp_neg_t,abs_diff");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double e = std::exp(-grid[i]);
      out.row(grid[i], curve.survival[i], e, std::fabs(curve.survival[i] - e));
    }
  }
  const double ks = ks_exponential(curve);
  {
    std::ofstream tail(fs::path(cfg.out_dir) / "survival.csv", std::ios::app);
    tail << "# ks=" << num(ks) << "\n";
  }
  const double tolerance = cfg.ks_tolerance.value_or(default_tolerance);
  const bool censor_ok = static_cast<double>(curve.censor_count) <
                         1e-3 * static_cast<double>(curve.n_samples) ||
                         curve.censor_count == 0;

  auto& m = run.manifest();
  m.samples = samples.size();
  m.censored = curve.censor_count;
  m.summary = {
      {"ks", ks},
      {"ks_tolerance", tolerance},
      {"target", target.center().value()},
      {"radius", target.radius()},
      {"ball_mass", mass.mass},
      {"ball_mass_stderr", mass.std_error},
      {"measure", nu.analytic() ? "analytic_lebesgue" : "empirical"},
      {"cutoff", opt.cutoff},
      {"censor_ok", censor_ok},
  };
  return run.finish(ks <= tolerance && censor_ok);
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  return {
      {"subcommand", subcommand}, {"config_hash", config_hash}, {"version", version},
      {"seed", seed},             {"wall_seconds", wall_seconds}, {"samples", samples},
      {"censored", censored},     {"workers", workers},           {"pass", pass},
      {"summary", summary},
  };
}

RunResult run_hitting_law(const ExperimentConfig& cfg) {
  return run_law(cfg, "hitting-law", StartLaw::invariant, 0.02);
}

RunResult run_return_law(const ExperimentConfig& cfg) {
  return run_law(cfg, "return-law", StartLaw::conditional, 0.03);
}

RunResult run_orbit(const ExperimentConfig& cfg) {
  Run run(cfg, "orbit");
  const RandomSystem system(cfg.system);
  Rng rng(cfg.seed, "orbit", 0);
  Orbit orbit = cfg.target ? system.start(CirclePoint(*cfg.target), rng)
                           : system.sample_invariant(rng);
  CsvFile out = run.csv("orbit.csv", "step,driver,x");
  auto driver = [&] {
    return system.family() == Family::theta_skew ? orbit.driver().omega
                                                 : static_cast<double>(orbit.driver().label);
  };
  out.row(std::uint64_t{0}, driver(), orbit.x());
  for (std::uint64_t k = 1; k <= cfg.steps; ++k) {
    orbit.step();
    out.row(k, driver(), orbit.x());
  }
  run.manifest().samples = cfg.steps;
  return run.finish(true);
}

RunResult run_rate(const ExperimentConfig& cfg) {
  Run run(cfg, "recurrence-rate");
  const RandomSystem system(cfg.system);
  std::vector<double> fallback;
  for (int e = 5; e <= 12; ++e) fallback.push_back(std::ldexp(1.0, -e));
  const auto radii = radii_or(cfg, fallback);
  const CutoffRule cutoff{cfg.cutoff, cfg.cutoff_factor};

  CsvFile summary = run.csv("rate_summary.csv", "start,x,slope,lower_slope,upper_slope");
  CsvFile rows = run.csv("rate.csv", "r,tau,log2_r,log2_tau");
  double slope_sum = 0.0;
  std::size_t censored = 0;
  for (std::size_t s = 0; s < cfg.starts; ++s) {
    Rng rng(cfg.seed, "rate-start", s);
    StartPoint x = (cfg.target && s == 0) ? StartPoint(CirclePoint(*cfg.target))
                   : system.exact_phase()
                       ? StartPoint(ExactCirclePoint::random(rng, system.coprime_modulus()))
                       : StartPoint(system.sample_invariant(rng).point());
    const RateEstimate est =
        recurrence_rate(system, x, radii, derive_stream_seed(cfg.seed, "rate", s), cutoff);
    const double x_value = std::visit(
        [](const auto& p) {
          if constexpr (std::is_same_v<std::decay_t<decltype(p)>, CirclePoint>) {
            return p.value();
          } else {
            return p.to_double();
          }
        },
        x);
    summary.row(s, x_value, est.slope, est.lower_slope, est.upper_slope);
    if (s == 0) {
      for (std::size_t i = 0; i < radii.size(); ++i) {
        const auto& t = est.times[i];
        rows.row(radii[i], t.tau, std::log2(radii[i]),
                 std::log2(static_cast<double>(t.tau)));
      }
    }
    for (const auto& t : est.times) censored += t.censored ? 1 : 0;
    slope_sum += est.slope;
  }
  const double mean_slope = slope_sum / static_cast<double>(cfg.starts);
  auto& m = run.manifest();
  m.samples = cfg.starts;
  m.censored = censored;
  m.summary = {{"mean_slope", mean_slope},
               {"expected_dimension", 1.0},
               {"rate_tolerance", cfg.rate_tolerance}};
  return run.finish(std::fabs(mean_slope - 1.0) <= cfg.rate_tolerance);
}

RunResult run_delta(const ExperimentConfig& cfg) {
  Run run(cfg, "delta");
  const RandomSystem system(cfg.system);
  auto radii = radii_or(cfg, {0.1, 0.01, 0.001});
  std::sort(radii.begin(), radii.end(), std::greater<>());
  const MeasureEstimate nu = stationary_for(system, cfg, cfg.empirical);
  const double x0 = target_of(cfg);

  CsvFile blocks = run.csv("delta.csv", "k,surv_uncond,surv_cond,abs_diff");
  CsvFile summary = run.csv("delta_summary.csv", "r,ball_mass,k_max,delta_hat,stderr");
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> deltas;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    DeltaOptions opt;
    opt.k_max = cfg.k_max;
    opt.samples = cfg.samples;
    opt.seed = derive_stream_seed(cfg.seed, "delta", i);
    opt.workers = cfg.effective_workers();
    const DeltaEstimate est = delta_estimator(system, nu, Ball(x0, radii[i]), opt).estimate;
    blocks.comment(fmt::format("r={}", num(radii[i])));
    for (std::uint64_t k = 1; k <= est.k_max; ++k) {
      const double su = est.surv_uncond[k - 1];
      const double sc = est.surv_cond[k - 1];
      blocks.row(k, su, sc, std::fabs(su - sc));
    }
    summary.row(radii[i], est.ball_mass, est.k_max, est.delta_hat, est.std_error);
    rows.push_back({{"r", radii[i]}, {"delta_hat", est.delta_hat}, {"stderr", est.std_error}});
    deltas.push_back(est.delta_hat);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < deltas.size(); ++i) decreasing = decreasing && deltas[i] < deltas[i - 1];
  const bool small = deltas.back() <= cfg.delta_tolerance;
  auto& m = run.manifest();
  m.samples = cfg.samples;
  m.summary = {{"radii", rows}, {"strictly_decreasing", decreasing},
               {"delta_tolerance", cfg.delta_tolerance}};
  return run.finish(decreasing && small);
}

RunResult run_correlations(const ExperimentConfig& cfg) {
  Run run(cfg, "correlations");
  const RandomSystem system(cfg.system);
  std::vector<std::uint64_t> lags = cfg.lags;
  if (lags.empty()) {
    for (std::uint64_t n = 0; n <= 10; ++n) lags.push_back(n);
  }
  CorrelationOptions opt;
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  opt.workers = cfg.effective_workers();
  const CorrelationSeries series = correlation_estimator(
      system, Observable::parse(cfg.psi), Observable::parse(cfg.phi), lags, opt);
  {
    CsvFile out = run.csv("correlations.csv", "n,estimate,stderr");
    for (std::size_t i = 0; i < lags.size(); ++i) {
      out.row(lags[i], series.estimates[i], series.std_errors[i]);
    }
  }
  const auto fits = superpoly_fit(series, cfg.p_list);
  bool pass = true;
  nlohmann::json fit_rows = nlohmann::json::array();
  for (const auto& f : fits) {
    fit_rows.push_back({{"p", f.p}, {"pass", f.pass}});
    pass = pass && f.pass;
  }
  std::size_t within = 0, lagged = 0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] == 0) continue;
    ++lagged;
    if (std::fabs(series.estimates[i]) <= 3.0 * series.std_errors[i]) ++within;
  }
  auto& m = run.manifest();
  m.samples = cfg.samples;
  m.summary = {{"psi", series.psi},
               {"phi", series.phi},
               {"superpolynomial", fit_rows},
               {"lagged_within_3sigma_of_zero", within},
               {"lagged_total", lagged}};
  return run.finish(pass);
}

RunResult run_annulus(const ExperimentConfig& cfg) {
  Run run(cfg, "annulus-check");
  const RandomSystem system(cfg.system);
  const auto radii = radii_or(cfg, {0.125, 0.0625, 0.03125});
  std::vector<double> rho = cfg.rho;
  if (rho.empty()) {
    for (double r : radii) {
      for (double f : {0.5, 0.25, 0.125}) rho.push_back(r * f);
    }
    std::sort(rho.begin(), rho.end());
    rho.erase(std::unique(rho.begin(), rho.end()), rho.end());
  }
  const MeasureEstimate nu = stationary_for(system, cfg, cfg.empirical);
  const AnnulusReport rep =
      annulus_check(nu, CirclePoint(target_of(cfg)), cfg.annulus_a, cfg.annulus_b, radii, rho);
  {
    CsvFile out = run.csv("annulus.csv", "r,rho,mass,bound,ratio");
    for (const auto& c : rep.cells) out.row(c.r, c.rho, c.mass, c.bound, c.ratio);
  }
  auto& m = run.manifest();
  m.samples = nu.analytic() ? 0 : nu.size();
  m.summary = {{"a", rep.a},
               {"b", rep.b},
               {"worst_ratio", rep.worst_ratio},
               {"measure", nu.analytic() ? "analytic_lebesgue" : "empirical"}};
  return run.finish(rep.pass);
}

RunResult run_stationary(const ExperimentConfig& cfg) {
  Run run(cfg, "stationary");
  const RandomSystem system(cfg.system);
  const MeasureEstimate nu = stationary_for(system, cfg, true);
  constexpr std::size_t kBins = 100;
  std::vector<std::size_t> counts(kBins, 0);
  for (double x : nu.samples()) {
    counts[std::min(kBins - 1, static_cast<std::size_t>(x * kBins))]++;
  }
  {
    CsvFile out = run.csv("stationary.csv", "bin_lo,bin_hi,mass,density");
    const double n = static_cast<double>(nu.size());
    for (std::size_t b = 0; b < kBins; ++b) {
      const double mass = static_cast<double>(counts[b]) / n;
      out.row(static_cast<double>(b) / kBins, static_cast<double>(b + 1) / kBins, mass,
              mass * kBins);
    }
  }
  const KsResult push = stationarity_check(system, nu, derive_stream_seed(cfg.seed, "push", 0),
                                           cfg.alpha, cfg.effective_workers());
  const KsResult uniform = ks_uniform_test(nu.samples(), cfg.alpha);
  bool pass = push.pass;
  if (system.lebesgue_stationary()) pass = pass && uniform.pass;
  auto& m = run.manifest();
  m.samples = nu.size();
  m.summary = {{"pushforward_ks", push.statistic},
               {"pushforward_p", push.p_value},
               {"uniform_ks", uniform.statistic},
               {"uniform_p", uniform.p_value},
               {"lebesgue_stationary", system.lebesgue_stationary()},
               {"alpha", cfg.alpha}};
  return run.finish(pass);
}

RunResult run_subcommand(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "orbit") return run_orbit(cfg);
  if (name == "hitting-law") return run_hitting_law(cfg);
  if (name == "return-law") return run_return_law(cfg);
  if (name == "recurrence-rate") return run_rate(cfg);
  if (name == "delta") return run_delta(cfg);
  if (name == "correlations") return run_correlations(cfg);
  if (name == "annulus-check") return run_annulus(cfg);
  if (name == "stationary") return run_stationary(cfg);
  throw InvalidArgument("unknown subcommand '" + name + "'");
}

ExitCode exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return ExitCode::config_error;
  if (dynamic_cast<const IoError*>(&e)) return ExitCode::io_error;
  if (dynamic_cast<const RejectionStall*>(&e)) return ExitCode::rejection_stall;
  if (dynamic_cast<const ZeroMass*>(&e)) return ExitCode::zero_mass;
  if (dynamic_cast<const InsufficientData*>(&e)) return ExitCode::insufficient_data;
  if (dynamic_cast<const QuadratureFailure*>(&e) || dynamic_cast<const Overflow*>(&e) ||
      dynamic_cast<const SingularChain*>(&e)) {
    return ExitCode::numerical_failure;
  }
  if (dynamic_cast<const InvalidArgument*>(&e)) return ExitCode::config_error;
  return ExitCode::internal_error;
}

}  // namespace hitstat
