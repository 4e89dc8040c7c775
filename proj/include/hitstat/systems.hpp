#pragma once

// Random dynamical systems on the circle and their orbit engine.
//
// Families:
//   affine       deterministic x -> m x
//   markov_skew  fiber maps x -> 2x / x -> 3x chosen by a two-state Markov
//                chain with transition matrix A (labels sampled directly)
//   theta_skew   the same random system driven by the piecewise linear base
//                map theta on [0,1), simulated in double precision
//   beta         i.i.d. random beta transformations x -> beta x, beta ~ P
//   perturbed    x -> m x + lambda, lambda uniform on [-eps, eps], i.i.d.
//
// Integer-slope fibers run on ExactCirclePoint; beta and perturbed fibers run
// in double precision (fresh randomness each step keeps those orbits rich).

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>

#include "hitstat/exact.hpp"
#include "hitstat/random.hpp"
#include "hitstat/torus.hpp"

namespace hitstat {

enum class Family { affine, markov_skew, theta_skew, beta, perturbed };

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

// Distribution of a real fiber parameter.
struct ParameterDistribution {
  enum class Kind { point, uniform };
  Kind kind = Kind::uniform;
  double lo = 2.0;
  double hi = 3.0;

  static ParameterDistribution point_mass(double v) { return {Kind::point, v, v}; }
  static ParameterDistribution uniform_on(double lo, double hi) {
    return {Kind::uniform, lo, hi};
  }

  double sample(Rng& rng) const {
    return kind == Kind::point ? lo : rng.uniform(lo, hi);
  }
};

struct FiberMap {
  enum class Kind { affine_integer, beta, perturbed };
  Kind kind = Kind::affine_integer;
  std::uint32_t multiplier = 2;  // affine_integer and perturbed base map
  double beta = 2.0;
  double noise_amplitude = 0.0;  // perturbed only

  static FiberMap affine(std::uint32_t m) { return {Kind::affine_integer, m, 0.0, 0.0}; }
  static FiberMap beta_map(double b) { return {Kind::beta, 0, b, 0.0}; }
  static FiberMap perturbed(std::uint32_t m, double eps) {
    return {Kind::perturbed, m, 0.0, eps};
  }

  // inf |T'|
  double min_derivative() const {
    return kind == Kind::beta ? beta : static_cast<double>(multiplier);
  }
};

using Matrix2 = std::array<std::array<double, 2>, 2>;
using Prob2 = std::array<double, 2>;

// Transition matrix of the fiber labels (T1, T2) induced by theta.
inline constexpr Matrix2 kSkewTransition{{{0.5, 0.5}, {1.0 / 3.0, 2.0 / 3.0}}};

// Stationary law of an irreducible 2-state chain. Throws SingularChain.
Prob2 markov_stationary(const Matrix2& a);

// ---- fiber and base maps ------------------------------------------------

inline double eval_affine(std::uint32_t m, double x) { return wrap_unit(m * x); }
inline ExactCirclePoint eval_affine(std::uint32_t m, ExactCirclePoint x) {
  x.multiply(m);
  return x;
}

inline double eval_beta(double beta, double x) { return wrap_unit(beta * x); }

// Fiber step with a given noise value lambda.
inline double eval_perturbed(std::uint32_t m, double x, double lambda) {
  return wrap_unit(m * x + lambda);
}
// Draws lambda ~ U[-eps, eps]; consumes one draw.
inline double eval_perturbed(std::uint32_t m, double eps, double x, Rng& rng) {
  return eval_perturbed(m, x, eps * (2.0 * rng.uniform01() - 1.0));
}

// Piecewise linear base map with breakpoints 1/5, 2/5, 3/5.
double eval_theta(double omega);

// T1 (x2) on [0, 2/5), T2 (x3) on [2/5, 1).
inline FiberMap select_fiber(double omega) {
  return omega < 0.4 ? FiberMap::affine(2) : FiberMap::affine(3);
}

// Fiber label under theta: 0 for T1, 1 for T2.
inline int fiber_label(double omega) { return omega < 0.4 ? 0 : 1; }

// Integral of 1 / inf|T'_lambda| dP(lambda), adaptive Gauss-Kronrod with
// relative error <= 1e-8. `min_derivative` maps a parameter to inf|T'|.
double expanding_in_average(const ParameterDistribution& dist,
                            const std::function<double(double)>& min_derivative =
                                [](double beta) { return beta; });

// Number of solutions of m^n x = x on the circle, m^n - 1. Throws Overflow.
std::uint64_t count_periodic_points(std::uint64_t m, std::uint32_t n);

// ---- system descriptor ----------------------------------------------------

struct SystemSpec {
  Family family = Family::markov_skew;
  std::uint32_t multiplier = 2;  // affine and perturbed base map
  ParameterDistribution beta = ParameterDistribution::uniform_on(2.0, 3.0);
  double epsilon = 0.1;
  Matrix2 transition = kSkewTransition;
  std::uint32_t burn_in = 1000;  // invariant sampler for non-analytic families
};

using StartPoint = std::variant<CirclePoint, ExactCirclePoint>;

class Orbit;

class RandomSystem {
 public:
  explicit RandomSystem(SystemSpec spec);

  const SystemSpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }

  // Phase coordinate carried as ExactCirclePoint.
  bool exact_phase() const;
  // Lebesgue measure is stationary (analytic ball masses available).
  bool lebesgue_stationary() const;
  // Label law for markov_skew.
  const Prob2& label_law() const { return label_law_; }

  // Orbit from a given phase point; the driving state is drawn from P.
  Orbit start(const StartPoint& x, Rng& rng) const;
  // Phase point uniform on [0,1), driving state from P.
  Orbit start_uniform(Rng& rng) const;
  // (driving state, phase) distributed as the invariant measure mu. For
  // families without analytic stationary law the phase is obtained by
  // burn_in steps from a uniform start (i.i.d. drivers make the result a
  // product with a fresh driver).
  Orbit sample_invariant(Rng& rng) const;
  // Phase uniform on the arc of `ball` (exact conditioning of Lebesgue).
  Orbit start_uniform_in_ball(const Ball& ball, Rng& rng) const;

  // Exact denominators are drawn coprime to this value (and to 6).
  std::uint32_t coprime_modulus() const;

 private:
  SystemSpec spec_;
  Prob2 label_law_{0.4, 0.6};
};

struct DriverState {
  double omega = 0.0;  // theta_skew
  int label = 0;       // markov_skew: 0 -> T1, 1 -> T2
};

// Single-owner mutable orbit state: phase, driver, step counter and stream.
class Orbit {
 public:
  Orbit(const SystemSpec& spec, std::variant<ExactCirclePoint, double> phase,
        DriverState driver, Rng rng);

  double x() const {
    return std::holds_alternative<double>(phase_)
               ? std::get<double>(phase_)
               : std::get<ExactCirclePoint>(phase_).to_double();
  }
  CirclePoint point() const { return CirclePoint(x()); }
  const std::variant<ExactCirclePoint, double>& phase() const { return phase_; }
  const DriverState& driver() const { return driver_; }
  std::uint64_t steps() const { return steps_; }
  void reset_step_counter() { steps_ = 0; }

  // Fiber map applied by the next step.
  FiberMap current_fiber() const;

  // One skew step: fiber chosen from the current driving state, then the
  // driving state advances.
  void step();
  void advance(std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) step();
  }

 private:
  SystemSpec spec_;
  std::variant<ExactCirclePoint, double> phase_;
  DriverState driver_;
  Rng rng_;
  std::uint64_t steps_ = 0;
};

// Exact skew step on the theta-driven system with a double driving
// coordinate: returns (theta(omega), T_omega(x)).
std::pair<double, double> step_skew(double omega, double x);
std::pair<double, ExactCirclePoint> step_skew(double omega, ExactCirclePoint x);

}  // namespace hitstat
