#include "hitstat/measure.hpp"

#include <algorithm>
#include <cmath>

#include "hitstat/parallel.hpp"
#include "hitstat/regression.hpp"

namespace hitstat {

MeasureEstimate MeasureEstimate::empirical(std::vector<double> samples, MeasureProvenance prov) {
  if (samples.empty()) throw InvalidArgument("empirical measure needs at least one sample");
  for (double& s : samples) s = wrap_unit(s);
  std::sort(samples.begin(), samples.end());
  MeasureEstimate est;
  est.analytic_ = false;
  est.samples_ = std::move(samples);
  est.provenance_ = std::move(prov);
  return est;
}

// Number of samples in the open arc (center - radius, center + radius),
// radius <= 1/2, split into at most two intervals of [0,1).
std::size_t MeasureEstimate::count_open_arc(double center, double radius) const {
  if (radius <= 0.0) return 0;
  auto count_open = [&](double lo, double hi) -> std::size_t {
    if (!(hi > lo)) return 0;
    auto first = std::upper_bound(samples_.begin(), samples_.end(), lo);
    auto last = std::lower_bound(samples_.begin(), samples_.end(), hi);
    return last > first ? static_cast<std::size_t>(last - first) : 0;
  };
  // Closed at the seam: a sample at 0 is inside when the arc covers 0.
  auto count_half_open = [&](double lo, double hi) -> std::size_t {
    auto first = std::lower_bound(samples_.begin(), samples_.end(), lo);
    auto last = std::lower_bound(samples_.begin(), samples_.end(), hi);
    return last > first ? static_cast<std::size_t>(last - first) : 0;
  };
  const double lo = center - radius;
  const double hi = center + radius;
  if (lo >= 0.0 && hi <= 1.0) return count_open(lo, hi);
  if (lo < 0.0) return count_half_open(0.0, hi) + count_open(lo + 1.0, 1.0);
  return count_open(lo, 1.0) + count_half_open(0.0, hi - 1.0);
}

MassEstimate MeasureEstimate::from_count(std::size_t count) const {
  const double n = static_cast<double>(samples_.size());
  MassEstimate m;
  m.mass = static_cast<double>(count) / n;
  m.std_error = std::sqrt(m.mass * (1.0 - m.mass) / n);
  m.empty = count == 0;
  return m;
}

MassEstimate MeasureEstimate::ball_mass(const Ball& b) const {
  if (analytic_) return {lebesgue_ball_mass(b), 0.0, false};
  return from_count(count_open_arc(b.center().value(), b.radius()));
}

MassEstimate MeasureEstimate::annulus_mass(const Annulus& a) const {
  if (analytic_) return {2.0 * (a.outer() - a.inner()), 0.0, false};
  const std::size_t outer = count_open_arc(a.center().value(), a.outer());
  const std::size_t inner = count_open_arc(a.center().value(), a.inner());
  return from_count(outer - inner);
}

MeasureEstimate estimate_stationary(const RandomSystem& system, const StationaryOptions& opt) {
  if (system.lebesgue_stationary() && !opt.force_empirical) {
    return MeasureEstimate::analytic_lebesgue();
  }
  if (opt.samples == 0) throw InvalidArgument("stationary estimate needs samples >= 1");
  const std::size_t chains = std::max<std::size_t>(1, std::min(opt.chains, opt.samples));
  const std::size_t per_chain = (opt.samples + chains - 1) / chains;
  const std::uint32_t thin = std::max<std::uint32_t>(1, opt.thin);

  std::vector<double> points(chains * per_chain);
  parallel_for(chains, opt.workers, [&](std::size_t c) {
    Rng rng(opt.seed, "stationary", c);
    Orbit orbit = system.start_uniform(rng);
    orbit.advance(opt.burn_in);
    for (std::size_t k = 0; k < per_chain; ++k) {
      orbit.advance(thin);
      points[c * per_chain + k] = orbit.x();
    }
  });
  points.resize(opt.samples);
  return MeasureEstimate::empirical(
      std::move(points),
      {std::string(to_string(system.family())), opt.burn_in, opt.seed});
}

double ks_uniform_statistic(std::span<const double> samples) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - sorted[i], sorted[i] - di / n});
  }
  return d;
}

double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

KsResult finish_ks(double d, double n_eff, double alpha) {
  const double root = std::sqrt(n_eff);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_tail((root + 0.12 + 0.11 / root) * d);
  r.pass = r.p_value >= alpha;
  return r;
}

}  // namespace

KsResult ks_uniform_test(std::span<const double> samples, double alpha) {
  return finish_ks(ks_uniform_statistic(samples), static_cast<double>(samples.size()), alpha);
}

KsResult ks_two_sample_test(std::span<const double> a, std::span<const double> b,
                            double alpha) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return finish_ks(ks_two_sample_statistic(a, b), na * nb / (na + nb), alpha);
}

KsResult stationarity_check(const RandomSystem& system, const MeasureEstimate& est,
                            std::uint64_t seed, double alpha, unsigned workers) {
  if (est.analytic()) throw InvalidArgument("stationarity check needs an empirical estimate");
  const auto original = est.samples();
  std::vector<double> pushed(original.size());
  parallel_for(original.size(), workers, [&](std::size_t i) {
    Rng rng(seed, "stationarity-push", i);
    Orbit orbit = system.start(CirclePoint(original[i]), rng);
    orbit.step();
    pushed[i] = orbit.x();
  });
  return ks_two_sample_test(original, pushed, alpha);
}

DimensionEstimate pointwise_dimension(const MeasureEstimate& est, CirclePoint y,
                                      std::span<const double> radii) {
  if (radii.size() < 3) throw InsufficientData("pointwise dimension needs at least 3 radii");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] < radii[i - 1])) throw InvalidArgument("radii must be strictly decreasing");
  }
  DimensionEstimate out;
  out.point = y;
  out.radii.assign(radii.begin(), radii.end());
  std::vector<double> log_r, log_m;
  for (double r : radii) {
    const MassEstimate m = est.ball_mass(Ball(y, r));
    if (m.mass <= 0.0) throw ZeroMass("ball of radius " + std::to_string(r) + " has zero mass");
    out.masses.push_back(m.mass);
    log_r.push_back(std::log(r));
    log_m.push_back(std::log(m.mass));
  }
  const SlopeRange s = suffix_slopes(log_r, log_m);
  out.slope = s.full;
  out.lower_dim = s.lower;
  out.upper_dim = s.upper;
  return out;
}

AnnulusReport annulus_check(const MeasureEstimate& est, CirclePoint y, double a, double b,
                            std::span<const double> r_grid, std::span<const double> rho_grid) {
  if (!(a > 0.0) || !(b >= 0.0)) throw InvalidArgument("annulus check needs a > 0, b >= 0");
  AnnulusReport rep;
  rep.point = y;
  rep.a = a;
  rep.b = b;
  for (double r : r_grid) {
    for (double rho : rho_grid) {
      if (!(rho > 0.0 && rho < r)) continue;
      AnnulusCell cell;
      cell.r = r;
      cell.rho = rho;
      const MassEstimate m = est.annulus_mass(Annulus(y, r, r - rho));
      cell.mass = m.mass;
      cell.bound = std::pow(r, -b) * std::pow(rho, a);
      cell.ratio = cell.mass / cell.bound;
      cell.margin = est.analytic() ? 0.0 : 3.0 * m.std_error;
      cell.pass = cell.mass <= cell.bound + cell.margin;
      rep.worst_ratio = std::max(rep.worst_ratio, cell.ratio);
      rep.pass = rep.pass && cell.pass;
      rep.cells.push_back(cell);
    }
  }
  if (rep.cells.empty()) throw InsufficientData("annulus grid has no cell with 0 < rho < r");
  return rep;
}

}  // namespace hitstat
