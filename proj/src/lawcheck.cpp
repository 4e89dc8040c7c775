#include "hitstat/lawcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hitstat/parallel.hpp"

namespace hitstat {

std::vector<double> geometric_t_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw InvalidArgument("bad t grid specification");
  std::vector<double> grid{0.0};
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(points - 1));
  for (std::size_t i = 0; i < points; ++i) {
    grid.push_back(i + 1 == points ? hi : lo * std::pow(ratio, static_cast<double>(i)));
  }
  return grid;
}

// ---- survival curves --------------------------------------------------------

SurvivalCurve survival_curve(std::span<const HittingSample> samples,
                             std::span<const double> t_grid) {
  if (samples.empty()) throw InsufficientData("survival curve needs at least one sample");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("t grid must be increasing");
  }
  SurvivalCurve c;
  c.rescale = samples.front().rescale;
  c.n_samples = samples.size();
  for (const auto& s : samples) {
    if (s.rescale != c.rescale) throw MixedRescale("samples carry different rescale factors");
    if (s.censored) {
      ++c.censor_count;
      c.horizon = std::min(c.horizon, s.rescaled());
      c.taus_.push_back(s.tau);
    } else {
      c.rescaled_.push_back(s.rescaled());
    }
  }
  // taus_ holds censoring cutoffs first, then every uncensored tau.
  const std::size_t n_cut = c.taus_.size();
  for (const auto& s : samples) {
    if (!s.censored) c.taus_.push_back(s.tau);
  }
  std::sort(c.taus_.begin(), c.taus_.begin() + static_cast<std::ptrdiff_t>(n_cut));
  std::sort(c.taus_.begin() + static_cast<std::ptrdiff_t>(n_cut), c.taus_.end());
  std::sort(c.rescaled_.begin(), c.rescaled_.end());
  c.t_grid.assign(t_grid.begin(), t_grid.end());
  for (double t : c.t_grid) c.survival.push_back(c.survival_at(t));
  return c;
}

double SurvivalCurve::survival_at(double t) const {
  const auto above = rescaled_.end() - std::upper_bound(rescaled_.begin(), rescaled_.end(), t);
  const std::size_t survivors = static_cast<std::size_t>(above) + (t < horizon ? censor_count : 0);
  return static_cast<double>(survivors) / static_cast<double>(n_samples);
}

double SurvivalCurve::survival_steps(std::uint64_t k) const {
  const auto cut_begin = taus_.begin();
  const auto cut_end = taus_.begin() + static_cast<std::ptrdiff_t>(censor_count);
  // Censored at cutoff c means tau > c >= k.
  const auto censored_alive = cut_end - std::lower_bound(cut_begin, cut_end, k);
  const auto uncensored_alive = taus_.end() - std::upper_bound(cut_end, taus_.end(), k);
  return static_cast<double>(censored_alive + uncensored_alive) /
         static_cast<double>(n_samples);
}

double ks_exponential(const SurvivalCurve& curve) {
  const double n = static_cast<double>(curve.n_samples);
  const auto jumps = curve.jumps();
  const double uncensored = static_cast<double>(jumps.size());
  double d = 0.0;
  for (std::size_t g = 0; g < curve.t_grid.size(); ++g) {
    if (curve.t_grid[g] < curve.horizon) {
      d = std::max(d, std::fabs(curve.survival[g] - std::exp(-curve.t_grid[g])));
    }
  }
  const double censored = static_cast<double>(curve.censor_count);
  std::size_t i = 0;
  while (i < jumps.size()) {
    const double v = jumps[i];
    if (!(v < curve.horizon)) break;
    std::size_t j = i;
    while (j < jumps.size() && jumps[j] == v) ++j;
    const double e = std::exp(-v);
    const double left = (uncensored - static_cast<double>(i) + censored) / n;
    const double right = (uncensored - static_cast<double>(j) + censored) / n;
    d = std::max({d, std::fabs(left - e), std::fabs(right - e)});
    i = j;
  }
  if (std::isfinite(curve.horizon)) {
    // S is constant on the last interval before the horizon.
    d = std::max(d, std::fabs(curve.survival_at(std::nextafter(curve.horizon, 0.0)) -
                              std::exp(-curve.horizon)));
  }
  return d;
}

GeometricGapReport geometric_law_gap(const SurvivalCurve& curve, double ball_mass,
                                     std::span<const std::uint64_t> n_grid) {
  if (!(ball_mass > 0.0 && ball_mass < 1.0)) throw InvalidArgument("ball mass must lie in (0,1)");
  GeometricGapReport rep;
  const double n_samples = static_cast<double>(curve.n_samples);
  for (std::uint64_t n : n_grid) {
    GeometricGapRow row;
    row.n = n;
    row.empirical = curve.survival_steps(n);
    row.reference = std::pow(1.0 - ball_mass, static_cast<double>(n));
    row.gap = std::fabs(row.empirical - row.reference);
    row.std_error = std::sqrt(row.empirical * (1.0 - row.empirical) / n_samples);
    rep.max_gap = std::max(rep.max_gap, row.gap);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- delta ----------------------------------------------------------------------

std::uint64_t default_delta_k(double ball_mass) {
  if (!(ball_mass > 0.0)) throw ZeroMass("delta needs a ball of positive mass");
  return static_cast<std::uint64_t>(std::ceil(20.0 / ball_mass));
}

namespace {

std::vector<double> survival_by_step(std::span<const HitOutcome> batch, std::uint64_t k_max) {
  std::vector<std::size_t> hits_at(k_max + 1, 0);
  for (const auto& h : batch) {
    if (h.censored) {
      if (h.tau < k_max) throw InvalidArgument("batch censored before k_max");
    } else if (h.tau <= k_max) {
      ++hits_at[h.tau];
    }
  }
  std::vector<double> surv(k_max);
  std::size_t hit = 0;
  const double n = static_cast<double>(batch.size());
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    hit += hits_at[k];
    surv[k - 1] = static_cast<double>(batch.size() - hit) / n;
  }
  return surv;
}

}  // namespace

DeltaEstimate delta_from_samples(std::span<const HitOutcome> uncond,
                                 std::span<const HitOutcome> cond, std::uint64_t k_max) {
  if (k_max < 1) throw InvalidArgument("k_max must be at least 1");
  if (uncond.empty() || cond.empty()) throw InsufficientData("delta needs both batches");
  DeltaEstimate est;
  est.k_max = k_max;
  est.samples = uncond.size();
  est.surv_uncond = survival_by_step(uncond, k_max);
  est.surv_cond = survival_by_step(cond, k_max);
  est.std_errors.resize(k_max);
  const double nu = static_cast<double>(uncond.size());
  const double nc = static_cast<double>(cond.size());
  for (std::uint64_t k = 0; k < k_max; ++k) {
    const double su = est.surv_uncond[k];
    const double sc = est.surv_cond[k];
    est.std_errors[k] = std::sqrt(su * (1 - su) / nu + sc * (1 - sc) / nc);
    const double gap = std::fabs(su - sc);
    if (gap > est.delta_hat || est.argmax_k == 0) {
      est.delta_hat = gap;
      est.argmax_k = k + 1;
      est.std_error = est.std_errors[k];
    }
  }
  return est;
}

DeltaRun delta_estimator(const RandomSystem& system, const MeasureEstimate& nu,
                         const Ball& target, const DeltaOptions& opt) {
  const double mass = nu.ball_mass(target).mass;
  const std::uint64_t k_max = opt.k_max > 0 ? opt.k_max : default_delta_k(mass);
  if (opt.samples == 0) throw InsufficientData("delta needs samples >= 1");

  std::vector<HitOutcome> uncond(opt.samples);
  std::vector<HitOutcome> cond(opt.samples);
  parallel_for(opt.samples, opt.workers, [&](std::size_t i) {
    Rng rng(opt.seed, "delta-uncond", i);
    Orbit orbit = system.sample_invariant(rng);
    uncond[i] = hitting_time(orbit, target, k_max);
  });
  parallel_for(opt.samples, opt.workers, [&](std::size_t i) {
    Rng rng(opt.seed, "delta-cond", i);
    Orbit orbit = sample_conditional(system, nu, target, rng);
    cond[i] = hitting_time(orbit, target, k_max);
  });

  DeltaRun run;
  run.estimate = delta_from_samples(uncond, cond, k_max);
  run.estimate.ball_mass = mass;
  if (opt.keep_samples) {
    run.uncond = std::move(uncond);
    run.cond = std::move(cond);
  }
  return run;
}

// ---- correlations ---------------------------------------------------------------

double Observable::operator()(double x) const {
  switch (kind) {
    case Kind::cosine: return std::cos(2.0 * std::numbers::pi * x);
    case Kind::indicator:
      if (lo <= hi) return (x >= lo && x <= hi) ? 1.0 : 0.0;
      return (x >= lo || x <= hi) ? 1.0 : 0.0;
    case Kind::sawtooth: return x;
    case Kind::triangle: return circle_dist(CirclePoint(x), CirclePoint(0.0));
    case Kind::constant: return value;
  }
  return 0.0;
}

double Observable::sup_norm() const {
  switch (kind) {
    case Kind::cosine:
    case Kind::indicator:
    case Kind::sawtooth: return 1.0;
    case Kind::triangle: return 0.5;
    case Kind::constant: return std::fabs(value);
  }
  return 0.0;
}

double Observable::lipschitz_norm() const {
  switch (kind) {
    case Kind::cosine: return 2.0 * std::numbers::pi;
    case Kind::triangle: return 1.0;
    case Kind::constant: return 0.0;
    case Kind::indicator:
    case Kind::sawtooth: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

std::string Observable::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::cosine: return "cos";
    case Kind::indicator: os << "indicator:" << lo << ":" << hi; return os.str();
    case Kind::sawtooth: return "sawtooth";
    case Kind::triangle: return "triangle";
    case Kind::constant: os << "const:" << value; return os.str();
  }
  return "unknown";
}

Observable Observable::parse(const std::string& text) {
  auto fields = [&] {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) out.push_back(item);
    return out;
  }();
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw InvalidArgument("bad number in observable '" + text + "'");
    return v;
  };
  Observable o;
  if (fields.empty()) throw InvalidArgument("empty observable");
  const std::string& head = fields[0];
  if (head == "cos" && fields.size() == 1) {
    o.kind = Kind::cosine;
  } else if (head == "sawtooth" && fields.size() == 1) {
    o.kind = Kind::sawtooth;
  } else if (head == "triangle" && fields.size() == 1) {
    o.kind = Kind::triangle;
  } else if (head == "indicator" && fields.size() == 3) {
    o.kind = Kind::indicator;
    o.lo = wrap_unit(number(fields[1]));
    o.hi = number(fields[2]);
    o.hi = o.hi == 1.0 ? 1.0 : wrap_unit(o.hi);
  } else if (head == "const" && fields.size() == 2) {
    o.kind = Kind::constant;
    o.value = number(fields[1]);
  } else {
    throw InvalidArgument("unknown observable '" + text + "'");
  }
  return o;
}

namespace {

// Raw moment sums for one lag.
struct LagSums {
  double phi = 0, psi_phi = 0, phi2 = 0, psi2_phi = 0, psi_phi2 = 0, psi2_phi2 = 0;
};

struct BlockSums {
  double psi = 0, psi2 = 0;
  std::vector<LagSums> lags;
};

}  // namespace

CorrelationSeries correlation_estimator(const RandomSystem& system, const Observable& psi,
                                        const Observable& phi,
                                        std::span<const std::uint64_t> n_grid,
                                        const CorrelationOptions& opt) {
  if (!std::isfinite(psi.lipschitz_norm())) {
    throw InvalidArgument("psi must be a Lipschitz observable, got " + psi.name());
  }
  if (n_grid.empty()) throw InvalidArgument("empty lag grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (!(n_grid[i] > n_grid[i - 1])) throw InvalidArgument("lag grid must be increasing");
  }
  if (opt.samples < 2) throw InsufficientData("correlations need at least 2 samples");

  const std::size_t lags = n_grid.size();
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (opt.samples + kBlock - 1) / kBlock;
  std::vector<BlockSums> partial(blocks);

  parallel_blocks(opt.samples, kBlock, opt.workers,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    BlockSums sums;
                    sums.lags.resize(lags);
                    for (std::size_t i = begin; i < end; ++i) {
                      Rng rng(opt.seed, "correlations", i);
                      Orbit orbit = system.sample_invariant(rng);
                      const double p = psi(orbit.x());
                      sums.psi += p;
                      sums.psi2 += p * p;
                      std::uint64_t at = 0;
                      for (std::size_t l = 0; l < lags; ++l) {
                        orbit.advance(n_grid[l] - at);
                        at = n_grid[l];
                        const double f = phi(orbit.x());
                        LagSums& s = sums.lags[l];
                        s.phi += f;
                        s.psi_phi += p * f;
                        s.phi2 += f * f;
                        s.psi2_phi += p * p * f;
                        s.psi_phi2 += p * f * f;
                        s.psi2_phi2 += p * p * f * f;
                      }
                    }
                    partial[b] = std::move(sums);
                  });

  BlockSums total;
  total.lags.resize(lags);
  for (const auto& b : partial) {
    total.psi += b.psi;
    total.psi2 += b.psi2;
    for (std::size_t l = 0; l < lags; ++l) {
      LagSums& t = total.lags[l];
      const LagSums& s = b.lags[l];
      t.phi += s.phi;
      t.psi_phi += s.psi_phi;
      t.phi2 += s.phi2;
      t.psi2_phi += s.psi2_phi;
      t.psi_phi2 += s.psi_phi2;
      t.psi2_phi2 += s.psi2_phi2;
    }
  }

  CorrelationSeries out;
  out.n_grid.assign(n_grid.begin(), n_grid.end());
  out.psi = psi.name();
  out.phi = phi.name();
  out.samples = opt.samples;
  const double n = static_cast<double>(opt.samples);
  const double a = total.psi / n;
  for (const auto& s : total.lags) {
    const double b = s.phi / n;
    const double cov = s.psi_phi / n - a * b;
    // E[((psi - a)(phi - b))^2] from raw moments.
    const double m2 = s.psi2_phi2 / n - 2 * b * s.psi2_phi / n + b * b * total.psi2 / n -
                      2 * a * s.psi_phi2 / n + 4 * a * b * s.psi_phi / n -
                      2 * a * b * b * total.psi / n + a * a * s.phi2 / n -
                      2 * a * a * b * s.phi / n + a * a * b * b;
    out.estimates.push_back(cov);
    out.std_errors.push_back(std::sqrt(std::max(0.0, m2 - cov * cov) / n));
  }
  return out;
}

std::vector<SuperpolyRow> superpoly_fit(const CorrelationSeries& series,
                                        std::span<const double> p_list) {
  // Tail: last third of the lags (at least two) with n >= 1. Transients such
  // as n^4 2^-n peak near n = 6 before the decay shows.
  const std::size_t size = series.n_grid.size();
  const std::size_t keep = std::min(size, std::max<std::size_t>(2, size / 3));
  std::vector<std::size_t> tail;
  for (std::size_t i = size - keep; i < size; ++i) {
    if (series.n_grid[i] >= 1) tail.push_back(i);
  }
  std::vector<SuperpolyRow> rows;
  for (double p : p_list) {
    SuperpolyRow row{p, true};
    for (std::size_t t = 1; t < tail.size(); ++t) {
      const std::size_t i = tail[t - 1];
      const std::size_t j = tail[t];
      const double wi = std::pow(static_cast<double>(series.n_grid[i]), p);
      const double wj = std::pow(static_cast<double>(series.n_grid[j]), p);
      const double gi = std::fabs(series.estimates[i]) * wi;
      const double gj = std::fabs(series.estimates[j]) * wj;
      const double noise = 3.0 * (series.std_errors[i] * wi + series.std_errors[j] * wj);
      if (gj - gi > noise) row.pass = false;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hitstat
