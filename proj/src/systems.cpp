#include "hitstat/systems.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

namespace hitstat {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::affine: return "affine";
    case Family::markov_skew: return "markov_skew";
    case Family::theta_skew: return "theta_skew";
    case Family::beta: return "beta";
    case Family::perturbed: return "perturbed";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "affine") return Family::affine;
  if (name == "markov_skew") return Family::markov_skew;
  if (name == "theta_skew") return Family::theta_skew;
  if (name == "beta") return Family::beta;
  if (name == "perturbed") return Family::perturbed;
  throw InvalidArgument("unknown system family '" + std::string(name) + "'");
}

Prob2 markov_stationary(const Matrix2& a) {
  for (const auto& row : a) {
    if (row[0] < 0 || row[1] < 0 || std::fabs(row[0] + row[1] - 1.0) > 1e-12) {
      throw InvalidArgument("transition matrix rows must be probability vectors");
    }
  }
  // pi A = pi reduces to pi_0 a01 = pi_1 a10.
  const double leave0 = a[0][1];
  const double leave1 = a[1][0];
  if (leave0 + leave1 <= 0.0 || leave0 == 0.0 || leave1 == 0.0) {
    throw SingularChain("chain is reducible; stationary vector not unique");
  }
  const double s = leave0 + leave1;
  return {leave1 / s, leave0 / s};
}

double eval_theta(double omega) {
  if (omega < 0.2) return 2.0 * omega;
  if (omega < 0.4) return 3.0 * omega - 0.2;
  if (omega < 0.6) return 2.0 * omega - 0.8;
  // Last branch reaches 1 only at the excluded endpoint.
  return wrap_unit(1.5 * omega - 0.5);
}

double expanding_in_average(const ParameterDistribution& dist,
                            const std::function<double(double)>& min_derivative) {
  if (dist.kind == ParameterDistribution::Kind::point) {
    return 1.0 / min_derivative(dist.lo);
  }
  if (!(dist.hi > dist.lo)) {
    throw InvalidArgument("parameter interval is empty");
  }
  const double width = dist.hi - dist.lo;
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double lambda) { return 1.0 / (min_derivative(lambda) * width); }, dist.lo,
      dist.hi, 20, 1e-12, &error, &l1);
  if (!std::isfinite(value) || error > 1e-8 * std::fabs(value)) {
    throw QuadratureFailure("expanding-in-average integral did not reach 1e-8");
  }
  return value;
}

std::uint64_t count_periodic_points(std::uint64_t m, std::uint32_t n) {
  if (m < 2 || n < 1) throw InvalidArgument("need m >= 2 and n >= 1");
  std::uint64_t power = 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (power > std::numeric_limits<std::uint64_t>::max() / m) {
      throw Overflow("m^n exceeds 64 bits");
    }
    power *= m;
  }
  return power - 1;
}

std::pair<double, double> step_skew(double omega, double x) {
  const FiberMap fiber = select_fiber(omega);
  return {eval_theta(omega), eval_affine(fiber.multiplier, x)};
}

std::pair<double, ExactCirclePoint> step_skew(double omega, ExactCirclePoint x) {
  const FiberMap fiber = select_fiber(omega);
  return {eval_theta(omega), eval_affine(fiber.multiplier, x)};
}

// ---- RandomSystem ---------------------------------------------------------

RandomSystem::RandomSystem(SystemSpec spec) : spec_(spec) {
  switch (spec_.family) {
    case Family::affine:
    case Family::perturbed:
      if (spec_.multiplier < 2 || spec_.multiplier > kMaxExactMultiplier) {
        throw InvalidArgument("multiplier must lie in [2, 256]");
      }
      if (spec_.family == Family::perturbed && !(spec_.epsilon > 0.0)) {
        throw InvalidArgument("noise amplitude must be positive");
      }
      break;
    case Family::markov_skew:
      label_law_ = markov_stationary(spec_.transition);
      break;
    case Family::theta_skew:
      break;
    case Family::beta:
      if (!(spec_.beta.lo > 1.0) || spec_.beta.hi < spec_.beta.lo) {
        throw InvalidArgument("beta parameters must satisfy 1 < beta_min <= beta_max");
      }
      break;
  }
}

bool RandomSystem::exact_phase() const {
  return spec_.family == Family::affine || spec_.family == Family::markov_skew ||
         spec_.family == Family::theta_skew;
}

bool RandomSystem::lebesgue_stationary() const { return spec_.family != Family::beta; }

std::uint32_t RandomSystem::coprime_modulus() const {
  return spec_.family == Family::affine ? spec_.multiplier : 6;
}

namespace {

DriverState draw_driver(const SystemSpec& spec, const Prob2& label_law, Rng& rng) {
  DriverState d;
  if (spec.family == Family::theta_skew) {
    d.omega = rng.uniform01();
    d.label = fiber_label(d.omega);
  } else if (spec.family == Family::markov_skew) {
    d.label = rng.uniform01() < label_law[0] ? 0 : 1;
  }
  return d;
}

}  // namespace

Orbit RandomSystem::start(const StartPoint& x, Rng& rng) const {
  std::variant<ExactCirclePoint, double> phase = 0.0;
  if (exact_phase()) {
    if (const auto* e = std::get_if<ExactCirclePoint>(&x)) {
      phase = *e;
    } else {
      phase = ExactCirclePoint::near(std::get<CirclePoint>(x).value(), rng, coprime_modulus());
    }
  } else {
    phase = std::visit(
        [](const auto& p) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(p)>, CirclePoint>) {
            return p.value();
          } else {
            return p.to_double();
          }
        },
        x);
  }
  DriverState d = draw_driver(spec_, label_law_, rng);
  // The orbit gets its own child stream so the caller may keep drawing.
  return Orbit(spec_, phase, d, Rng(rng.next_u64()));
}

Orbit RandomSystem::start_uniform(Rng& rng) const {
  if (exact_phase()) {
    return start(ExactCirclePoint::random(rng, coprime_modulus()), rng);
  }
  return start(CirclePoint(rng.uniform01()), rng);
}

Orbit RandomSystem::sample_invariant(Rng& rng) const {
  Orbit orbit = start_uniform(rng);
  if (!lebesgue_stationary()) {
    orbit.advance(spec_.burn_in);
    orbit.reset_step_counter();
  }
  return orbit;
}

Orbit RandomSystem::start_uniform_in_ball(const Ball& ball, Rng& rng) const {
  if (exact_phase()) {
    return start(ExactCirclePoint::uniform_in_ball(ball, rng, coprime_modulus()), rng);
  }
  for (;;) {
    const double x =
        wrap_unit(ball.center().value() + ball.radius() * (2.0 * rng.uniform01() - 1.0));
    if (in_ball(CirclePoint(x), ball)) return start(CirclePoint(x), rng);
  }
}

// ---- Orbit ------------------------------------------------------------------

Orbit::Orbit(const SystemSpec& spec, std::variant<ExactCirclePoint, double> phase,
             DriverState driver, Rng rng)
    : spec_(spec), phase_(phase), driver_(driver), rng_(std::move(rng)) {}

FiberMap Orbit::current_fiber() const {
  switch (spec_.family) {
    case Family::affine: return FiberMap::affine(spec_.multiplier);
    case Family::markov_skew: return FiberMap::affine(driver_.label == 0 ? 2 : 3);
    case Family::theta_skew: return select_fiber(driver_.omega);
    case Family::beta: return FiberMap::beta_map(spec_.beta.lo);  // parameter drawn at step
    case Family::perturbed: return FiberMap::perturbed(spec_.multiplier, spec_.epsilon);
  }
  return {};
}

void Orbit::step() {
  switch (spec_.family) {
    case Family::affine:
      std::get<ExactCirclePoint>(phase_).multiply(spec_.multiplier);
      break;
    case Family::markov_skew: {
      std::get<ExactCirclePoint>(phase_).multiply(driver_.label == 0 ? 2 : 3);
      const double stay = spec_.transition[driver_.label][driver_.label];
      if (rng_.uniform01() >= stay) driver_.label = 1 - driver_.label;
      break;
    }
    case Family::theta_skew: {
      std::get<ExactCirclePoint>(phase_).multiply(fiber_label(driver_.omega) == 0 ? 2 : 3);
      driver_.omega = eval_theta(driver_.omega);
      driver_.label = fiber_label(driver_.omega);
      break;
    }
    case Family::beta: {
      const double b = spec_.beta.sample(rng_);
      phase_ = eval_beta(b, std::get<double>(phase_));
      break;
    }
    case Family::perturbed:
      phase_ = eval_perturbed(spec_.multiplier, spec_.epsilon, std::get<double>(phase_), rng_);
      break;
  }
  ++steps_;
}

}  // namespace hitstat
