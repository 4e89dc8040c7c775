#pragma once

// Hitting and return times into balls along random orbits.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hitstat/measure.hpp"
#include "hitstat/systems.hpp"

namespace hitstat {

// tau, or Censored(cutoff) when the orbit did not enter within cutoff steps.
struct HitOutcome {
  std::uint64_t tau = 0;
  bool censored = false;

  friend bool operator==(const HitOutcome&, const HitOutcome&) = default;
};

struct HittingSample {
  std::uint64_t sample_id = 0;
  std::uint64_t tau = 0;  // equals the cutoff when censored
  bool censored = false;
  double rescale = 0;  // nu(B) of the target
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  double rescaled() const { return static_cast<double>(tau) * rescale; }
};

// Cutoff per ball: fixed, or ceil(factor / mass).
struct CutoffRule {
  std::optional<std::uint64_t> fixed;
  double factor = 50.0;

  std::uint64_t for_mass(double mass) const;
};

// Smallest k in [1, cutoff] with the phase point in target after k steps.
// Consumes min(k, cutoff) steps of the orbit.
HitOutcome hitting_time(Orbit& orbit, const Ball& target, std::uint64_t cutoff);

// Hitting time into B(x, r) where x is the orbit's current phase point.
HitOutcome return_time(Orbit& orbit, double r, std::uint64_t cutoff);

enum class StartLaw {
  invariant,    // (omega, x) ~ mu
  conditional,  // mu conditioned on x in the target ball
};

struct BatchOptions {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string tag = "hitting";
  StartLaw start = StartLaw::invariant;
  std::uint64_t cutoff = 0;  // 0: CutoffRule default from the ball mass
  unsigned workers = 1;
};

// Conditional start by rejection from the invariant sampler, for measures
// without analytic conditioning. Throws RejectionStall when the acceptance
// rate falls below 1e-6.
Orbit sample_conditional(const RandomSystem& system, const MeasureEstimate& nu,
                         const Ball& target, Rng& rng);

// N hitting times into target from mu (or mu restricted to the target),
// rescaled by nu(target). Sample i uses stream hash(seed, tag, i).
std::vector<HittingSample> simulate_hitting_times(const RandomSystem& system,
                                                  const MeasureEstimate& nu,
                                                  const Ball& target, const BatchOptions& opt);

struct RateEstimate {
  std::vector<double> radii;
  std::vector<HitOutcome> times;
  double slope = 0;  // OLS of log tau against -log r
  double lower_slope = 0;
  double upper_slope = 0;
  bool censored_excluded = false;
};

// Return times tau_r(x) for each radius along a fresh orbit (stream
// hash(seed, "rate", radius index)). Throws InsufficientData when fewer than
// three uncensored pairs remain.
RateEstimate recurrence_rate(const RandomSystem& system, const StartPoint& x,
                             std::span<const double> radii, std::uint64_t seed,
                             const CutoffRule& cutoff = {});

// Slopes from already measured return times, one per radius.
RateEstimate rate_from_times(std::span<const double> radii, std::span<const HitOutcome> times);

struct UpperBoundReport {
  std::uint64_t n = 0;
  double fraction = 0;  // empirical mu(tau <= n)
  double bound = 0;     // n * mass
  double margin = 0;    // 3 sigma binomial
  bool pass = true;
  bool vacuous = false;  // no samples
};

// mu(tau_A <= n) <= n mu(A).
UpperBoundReport hitting_upper_bound_check(std::span<const HittingSample> samples,
                                           double ball_mass, std::uint64_t n);

}  // namespace hitstat
