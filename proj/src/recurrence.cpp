#include "hitstat/recurrence.hpp"

#include <cmath>

#include "hitstat/parallel.hpp"
#include "hitstat/regression.hpp"

namespace hitstat {

std::uint64_t CutoffRule::for_mass(double mass) const {
  if (fixed) return *fixed;
  if (!(mass > 0.0)) throw ZeroMass("cutoff undefined for a zero-mass ball");
  return static_cast<std::uint64_t>(std::ceil(factor / mass));
}

HitOutcome hitting_time(Orbit& orbit, const Ball& target, std::uint64_t cutoff) {
  if (cutoff == 0) throw InvalidArgument("cutoff must be at least 1");
  const double c = target.center().value();
  const double r = target.radius();
  for (std::uint64_t k = 1; k <= cutoff; ++k) {
    orbit.step();
    double d = std::fabs(orbit.x() - c);
    if (d > 0.5) d = 1.0 - d;
    if (d < r) return {k, false};
  }
  return {cutoff, true};
}

HitOutcome return_time(Orbit& orbit, double r, std::uint64_t cutoff) {
  return hitting_time(orbit, Ball(orbit.point(), r), cutoff);
}

Orbit sample_conditional(const RandomSystem& system, const MeasureEstimate& nu,
                         const Ball& target, Rng& rng) {
  if (nu.analytic()) return system.start_uniform_in_ball(target, rng);
  const double mass = nu.ball_mass(target).mass;
  if (mass < 1e-6) {
    throw RejectionStall("conditional acceptance rate below 1e-6 (ball mass " +
                         std::to_string(mass) + ")");
  }
  // Give up after 100 times the expected number of attempts at rate 1e-6.
  constexpr std::uint64_t kMaxAttempts = 100'000'000;
  for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Orbit orbit = system.sample_invariant(rng);
    if (in_ball(orbit.point(), target)) return orbit;
  }
  throw RejectionStall("conditional sampling exhausted its attempt budget");
}

std::vector<HittingSample> simulate_hitting_times(const RandomSystem& system,
                                                  const MeasureEstimate& nu,
                                                  const Ball& target, const BatchOptions& opt) {
  const MassEstimate mass = nu.ball_mass(target);
  // conditioning on an (empirically) empty ball is a stalled rejection sampler
  if (opt.start == StartLaw::conditional && !nu.analytic() && mass.mass < 1e-6) {
    throw RejectionStall("conditional acceptance rate below 1e-6");
  }
  if (!(mass.mass > 0.0)) throw ZeroMass("target ball has zero estimated mass");
  const std::uint64_t cutoff = opt.cutoff > 0 ? opt.cutoff : CutoffRule{}.for_mass(mass.mass);

  std::vector<HittingSample> out(opt.samples);
  parallel_for(opt.samples, opt.workers, [&](std::size_t i) {
    Rng rng(opt.seed, opt.tag, i);
    Orbit orbit = opt.start == StartLaw::conditional ? sample_conditional(system, nu, target, rng)
                                                     : system.sample_invariant(rng);
    const HitOutcome hit = hitting_time(orbit, target, cutoff);
    out[i] = {i, hit.tau, hit.censored, mass.mass, opt.seed, i};
  });
  return out;
}

RateEstimate rate_from_times(std::span<const double> radii, std::span<const HitOutcome> times) {
  if (radii.size() != times.size()) throw InvalidArgument("one return time per radius");
  RateEstimate est;
  est.radii.assign(radii.begin(), radii.end());
  est.times.assign(times.begin(), times.end());
  std::vector<double> x, y;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (times[i].censored) {
      est.censored_excluded = true;
      continue;
    }
    x.push_back(-std::log(radii[i]));
    y.push_back(std::log(static_cast<double>(times[i].tau)));
  }
  if (x.size() < 3) throw InsufficientData("fewer than 3 uncensored return times");
  const SlopeRange s = suffix_slopes(x, y);
  est.slope = s.full;
  est.lower_slope = s.lower;
  est.upper_slope = s.upper;
  return est;
}

RateEstimate recurrence_rate(const RandomSystem& system, const StartPoint& x,
                             std::span<const double> radii, std::uint64_t seed,
                             const CutoffRule& cutoff) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0 && radii[i] < 0.5)) throw InvalidArgument("radii must lie in (0, 0.5)");
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw InvalidArgument("radii must be strictly decreasing");
    }
  }
  std::vector<HitOutcome> times(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    Rng rng(seed, "rate", i);
    Orbit orbit = system.start(x, rng);
    times[i] = return_time(orbit, radii[i], cutoff.for_mass(2.0 * radii[i]));
  }
  return rate_from_times(radii, times);
}

UpperBoundReport hitting_upper_bound_check(std::span<const HittingSample> samples,
                                           double ball_mass, std::uint64_t n) {
  UpperBoundReport rep;
  rep.n = n;
  rep.bound = static_cast<double>(n) * ball_mass;
  if (samples.empty()) {
    rep.vacuous = true;
    return rep;
  }
  std::size_t hits = 0;
  for (const auto& s : samples) {
    // A censored sample with cutoff >= n certainly exceeds n.
    if (!s.censored && s.tau <= n) ++hits;
  }
  const double count = static_cast<double>(samples.size());
  rep.fraction = static_cast<double>(hits) / count;
  if (rep.bound >= 1.0) {
    rep.pass = true;
    return rep;
  }
  rep.margin = 3.0 * std::sqrt(rep.bound * (1.0 - rep.bound) / count);
  rep.pass = rep.fraction <= rep.bound + rep.margin;
  return rep;
}

}  // namespace hitstat
