#include <doctest.h>

#include <cmath>
#include <vector>

#include "hitstat/measure.hpp"

using namespace hitstat;

namespace {

MeasureEstimate tenths() {
  std::vector<double> pts;
  for (int k = 0; k < 10; ++k) pts.push_back(0.05 + 0.1 * k);
  return MeasureEstimate::empirical(pts);
}

std::vector<double> dyadic_radii(int from, int to) {
  std::vector<double> r;
  for (int e = from; e <= to; ++e) r.push_back(std::ldexp(1.0, -e));
  return r;
}

}  // namespace

TEST_CASE("ball mass examples") {
  const auto leb = MeasureEstimate::analytic_lebesgue();
  CHECK(leb.ball_mass(Ball(0.7, 0.05)).mass == doctest::Approx(0.1));
  CHECK(leb.ball_mass(Ball(0.7, 0.05)).std_error == 0.0);

  const auto emp = tenths();
  const auto m = emp.ball_mass(Ball(0.5, 0.12));
  CHECK(m.mass == doctest::Approx(0.2));
  CHECK(m.std_error == doctest::Approx(std::sqrt(0.2 * 0.8 / 10)));

  const auto empty = emp.ball_mass(Ball(0.5, 0.01));
  CHECK(empty.mass == 0.0);
  CHECK(empty.empty);
}

TEST_CASE("empirical arcs wrap around 0") {
  const auto emp = tenths();
  CHECK(emp.ball_mass(Ball(0.0, 0.06)).mass == doctest::Approx(0.2));  // 0.05 and 0.95
  CHECK(emp.ball_mass(Ball(0.99, 0.07)).mass == doctest::Approx(0.2));
  CHECK(emp.ball_mass(Ball(0.5, 0.4999)).mass == doctest::Approx(1.0));
  // open arc: 0.05 sits exactly on the boundary of B(0.1, 0.05) only up to rounding
  const auto grid = MeasureEstimate::empirical({0.25, 0.5, 0.75});
  CHECK(grid.ball_mass(Ball(0.5, 0.25)).mass == doctest::Approx(1.0 / 3));
}

TEST_CASE("ball mass monotone in the radius and additive over disjoint arcs") {
  Rng rng(41, "mass-props", 0);
  std::vector<double> pts;
  for (int i = 0; i < 20000; ++i) pts.push_back(std::pow(rng.uniform01(), 2.0));
  const auto emp = MeasureEstimate::empirical(pts);
  const auto leb = MeasureEstimate::analytic_lebesgue();
  for (int i = 0; i < 2000; ++i) {
    const double c = rng.uniform01();
    const double r1 = rng.uniform(0.0001, 0.2), r2 = r1 + rng.uniform(0.0, 0.2);
    for (const auto* est : {&emp, &leb}) {
      REQUIRE(est->ball_mass(Ball(c, r1)).mass <= est->ball_mass(Ball(c, r2)).mass);
      // B(c, r) splits into the annulus and the inner ball; and two disjoint
      // halves of width r centred at c - r/2, c + r/2 (up to boundary points)
      const double whole = est->ball_mass(Ball(c, r2)).mass;
      const double inner = est->ball_mass(Ball(c, r1)).mass;
      const double ring = est->annulus_mass(Annulus(CirclePoint(c), r2, r1)).mass;
      REQUIRE(std::fabs(whole - inner - ring) <= 1e-12);
    }
    const double left = leb.ball_mass(Ball(c - r1 / 2, r1 / 2)).mass;
    const double right = leb.ball_mass(Ball(c + r1 / 2, r1 / 2)).mass;
    REQUIRE(std::fabs(left + right - leb.ball_mass(Ball(c, r1)).mass) <= 1e-12);
  }
}

TEST_CASE("pointwise dimension of Lebesgue is 1") {
  const auto leb = MeasureEstimate::analytic_lebesgue();
  const auto radii = dyadic_radii(4, 16);
  Rng rng(42);
  for (int i = 0; i < 20; ++i) {
    const auto d = pointwise_dimension(leb, CirclePoint(rng.uniform01()), radii);
    CHECK(std::fabs(d.slope - 1.0) <= 1e-6);
    CHECK(std::fabs(d.lower_dim - 1.0) <= 1e-6);
    CHECK(std::fabs(d.upper_dim - 1.0) <= 1e-6);
    for (std::size_t k = 1; k < d.masses.size(); ++k) CHECK(d.masses[k] <= d.masses[k - 1]);
  }
}

TEST_CASE("pointwise dimension edge cases") {
  const auto atom = MeasureEstimate::empirical(std::vector<double>(100, 0.3));
  const auto radii = dyadic_radii(4, 8);
  CHECK(pointwise_dimension(atom, CirclePoint(0.3), radii).slope == doctest::Approx(0.0));
  const std::vector<double> two{0.1, 0.05};
  CHECK_THROWS_AS(pointwise_dimension(atom, CirclePoint(0.3), two), InsufficientData);
  CHECK_THROWS_AS(pointwise_dimension(atom, CirclePoint(0.7), radii), ZeroMass);
}

TEST_CASE("annulus check on Lebesgue") {
  const auto leb = MeasureEstimate::analytic_lebesgue();
  const std::vector<double> r{0.25, 0.125, 0.0625};
  const std::vector<double> rho{0.25, 0.125, 0.0625, 0.03125, 0.015625, 1e-6};
  const auto half = annulus_check(leb, CirclePoint(0.3), 0.5, 0.0, r, rho);
  CHECK(half.pass);
  for (const auto& c : half.cells) {
    CHECK(c.rho < c.r);
    CHECK(c.mass == doctest::Approx(2 * c.rho));
  }
  const auto one = annulus_check(leb, CirclePoint(0.3), 1.0, 0.0, r, rho);
  CHECK_FALSE(one.pass);
  for (const auto& c : one.cells) CHECK_FALSE(c.pass);
  CHECK(one.worst_ratio == doctest::Approx(2.0));
  // vanishing annulus column passes for any a < 1
  const std::vector<double> tiny{1e-9};
  CHECK(annulus_check(leb, CirclePoint(0.3), 0.9, 0.0, r, tiny).pass);
  CHECK_THROWS_AS(annulus_check(leb, CirclePoint(0.3), 0.0, 0.0, r, rho), InvalidArgument);
}

TEST_CASE("annulus verdict is monotone in a") {
  const auto leb = MeasureEstimate::analytic_lebesgue();
  const std::vector<double> r{0.25, 0.125, 0.0625};
  const std::vector<double> rho{0.1, 0.05, 0.01, 0.001};
  bool passed_before = false;
  for (double a = 1.0; a > 0.01; a -= 0.01) {
    const bool p = annulus_check(leb, CirclePoint(0.1), a, 0.0, r, rho).pass;
    if (passed_before) REQUIRE(p);
    passed_before = passed_before || p;
  }
  CHECK(passed_before);
}

TEST_CASE("KS helpers") {
  CHECK(kolmogorov_tail(0.1) == 1.0);
  CHECK(kolmogorov_tail(1.36) == doctest::Approx(0.0494).epsilon(0.01));
  CHECK(kolmogorov_tail(1.95) == doctest::Approx(0.001).epsilon(0.05));
  const std::vector<double> one{0.5};
  CHECK(ks_uniform_statistic(one) == doctest::Approx(0.5));
  const std::vector<double> a{0.1, 0.2}, b{0.3, 0.4};
  CHECK(ks_two_sample_statistic(a, b) == doctest::Approx(1.0));
  CHECK(ks_two_sample_statistic(a, a) == 0.0);
}

TEST_CASE("stationary estimates") {
  SystemSpec pert;
  pert.family = Family::perturbed;
  StationaryOptions opt;
  opt.samples = 100000;
  opt.seed = 43;
  CHECK(estimate_stationary(RandomSystem(pert), opt).analytic());
  CHECK(estimate_stationary(RandomSystem(SystemSpec{}), opt).analytic());

  // the analytic answer for the perturbed doubling map is confirmed by sampling
  opt.force_empirical = true;
  const auto emp = estimate_stationary(RandomSystem(pert), opt);
  CHECK_FALSE(emp.analytic());
  CHECK(emp.size() == 100000);
  CHECK(ks_uniform_test(emp.samples(), 1e-3).pass);
  CHECK(stationarity_check(RandomSystem(pert), emp, 44).pass);

  SystemSpec beta;
  beta.family = Family::beta;
  opt.force_empirical = false;
  opt.workers = 3;
  const auto nu = estimate_stationary(RandomSystem(beta), opt);
  CHECK_FALSE(nu.analytic());
  CHECK(stationarity_check(RandomSystem(beta), nu, 45).pass);
  // not Lebesgue: beta maps pile mass near 0
  CHECK_FALSE(ks_uniform_test(nu.samples(), 1e-3).pass);
  opt.workers = 1;
  const auto nu1 = estimate_stationary(RandomSystem(beta), opt);
  CHECK(std::equal(nu.samples().begin(), nu.samples().end(), nu1.samples().begin()));
}

TEST_CASE("stationarity check rejects a wrong measure") {
  SystemSpec beta;
  beta.family = Family::beta;
  Rng rng(46);
  std::vector<double> pts;
  for (int i = 0; i < 50000; ++i) pts.push_back(rng.uniform01());
  const auto uniform = MeasureEstimate::empirical(pts);
  CHECK_FALSE(stationarity_check(RandomSystem(beta), uniform, 47).pass);
}
