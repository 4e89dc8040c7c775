#pragma once

// Statistics of rescaled hitting times: empirical survival curves and their
// distance to e^-t, the mixing deviation
//   delta(A) = sup_k |mu(tau_A > k) - mu_A(tau_A > k)|,
// the gap to the geometric law (1 - mu(A))^n, and correlation decay.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hitstat/measure.hpp"
#include "hitstat/recurrence.hpp"
#include "hitstat/systems.hpp"

namespace hitstat {

// 0 followed by `points` geometric values from lo to hi.
std::vector<double> geometric_t_grid(double lo = 0.05, double hi = 6.0, std::size_t points = 60);

class SurvivalCurve {
 public:
  std::vector<double> t_grid;
  std::vector<double> survival;
  std::size_t n_samples = 0;
  std::size_t censor_count = 0;
  double rescale = 0;
  // Rescaled time beyond which censored samples carry no information.
  double horizon = std::numeric_limits<double>::infinity();

  // Empirical P(tau * rescale > t), censored samples survive up to horizon.
  double survival_at(double t) const;
  // Empirical P(tau > k).
  double survival_steps(std::uint64_t k) const;
  // Sorted rescaled uncensored times (the jump points).
  std::span<const double> jumps() const { return rescaled_; }

 private:
  friend SurvivalCurve survival_curve(std::span<const HittingSample>, std::span<const double>);
  std::vector<double> rescaled_;
  std::vector<std::uint64_t> taus_;
};

// Throws MixedRescale when samples disagree on the rescale factor.
SurvivalCurve survival_curve(std::span<const HittingSample> samples,
                             std::span<const double> t_grid);

// sup_t |S(t) - e^-t| over the grid and both sides of every jump below the
// censoring horizon.
double ks_exponential(const SurvivalCurve& curve);

struct GeometricGapRow {
  std::uint64_t n = 0;
  double empirical = 0;  // P(tau > n)
  double reference = 0;  // (1 - mass)^n
  double gap = 0;
  double std_error = 0;
};

struct GeometricGapReport {
  std::vector<GeometricGapRow> rows;
  double max_gap = 0;
};

GeometricGapReport geometric_law_gap(const SurvivalCurve& curve, double ball_mass,
                                     std::span<const std::uint64_t> n_grid);

struct DeltaEstimate {
  std::uint64_t k_max = 0;
  // Index k-1 holds P(tau > k), k = 1..k_max.
  std::vector<double> surv_uncond;
  std::vector<double> surv_cond;
  std::vector<double> std_errors;
  double delta_hat = 0;
  std::uint64_t argmax_k = 0;
  double std_error = 0;  // at argmax_k
  double ball_mass = 0;
  std::size_t samples = 0;

  double stderr_at(std::uint64_t k) const { return std_errors.at(k - 1); }
};

// Default truncation of the sup over k: ceil(20 / mass).
std::uint64_t default_delta_k(double ball_mass);

// Survival arrays and sup gap from two batches of hitting times censored at
// k_max or later.
DeltaEstimate delta_from_samples(std::span<const HitOutcome> uncond,
                                 std::span<const HitOutcome> cond, std::uint64_t k_max);

struct DeltaOptions {
  std::uint64_t k_max = 0;  // 0: default_delta_k
  std::size_t samples = 50000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool keep_samples = false;
};

struct DeltaRun {
  DeltaEstimate estimate;
  std::vector<HitOutcome> uncond;  // filled when keep_samples
  std::vector<HitOutcome> cond;
};

// Draws N starts from mu and N from mu conditioned on the target ball,
// records hitting times up to k_max and compares the survival functions.
DeltaRun delta_estimator(const RandomSystem& system, const MeasureEstimate& nu,
                         const Ball& target, const DeltaOptions& opt);

// Built-in observables with known norms.
struct Observable {
  enum class Kind { cosine, indicator, sawtooth, triangle, constant };
  Kind kind = Kind::cosine;
  double lo = 0;     // indicator arc [lo, hi]
  double hi = 0.25;
  double value = 1;  // constant

  double operator()(double x) const;
  double sup_norm() const;
  // Lipschitz seminorm on the circle; infinite for discontinuous kinds.
  double lipschitz_norm() const;
  std::string name() const;

  // "cos", "indicator:LO:HI", "sawtooth", "triangle", "const:V".
  static Observable parse(const std::string& text);
};

struct CorrelationSeries {
  std::vector<std::uint64_t> n_grid;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::string psi;
  std::string phi;
  std::size_t samples = 0;
};

struct CorrelationOptions {
  std::size_t samples = 1000000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Monte Carlo estimate of int psi * phi(x_n) dmu - int psi dnu int phi(x_n) dmu
// with (omega, x) ~ mu. psi must be Lipschitz.
CorrelationSeries correlation_estimator(const RandomSystem& system, const Observable& psi,
                                        const Observable& phi,
                                        std::span<const std::uint64_t> n_grid,
                                        const CorrelationOptions& opt);

struct SuperpolyRow {
  double p = 0;
  bool pass = true;
};

// Diagnostic: for every p, |estimate(n)| n^p must not grow beyond 3 standard
// errors along the tail (last third) of the grid.
std::vector<SuperpolyRow> superpoly_fit(const CorrelationSeries& series,
                                        std::span<const double> p_list);

}  // namespace hitstat
