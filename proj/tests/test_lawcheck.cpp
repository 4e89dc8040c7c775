#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hitstat/lawcheck.hpp"

using namespace hitstat;

namespace {

std::vector<HittingSample> batch(const std::vector<std::uint64_t>& taus, double rescale,
                                 std::uint64_t cutoff = 0) {
  std::vector<HittingSample> out;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    HittingSample s;
    s.sample_id = i;
    s.tau = taus[i];
    s.censored = cutoff > 0 && taus[i] >= cutoff;
    if (s.censored) s.tau = cutoff;
    s.rescale = rescale;
    out.push_back(s);
  }
  return out;
}

SystemSpec affine(std::uint32_t m) {
  SystemSpec s;
  s.family = Family::affine;
  s.multiplier = m;
  return s;
}

std::vector<std::uint64_t> lags_0_to(std::uint64_t n) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t i = 0; i <= n; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST_CASE("survival curve examples") {
  const std::vector<double> grid{0.0, 0.75, 1.0, 2.0};
  const auto c = survival_curve(batch({1, 2, 3, 4}, 0.5), grid);
  CHECK(c.survival[0] == 1.0);
  CHECK(c.survival[1] == 0.75);
  CHECK(c.survival[2] == 0.5);  // tau * rescale == t does not exceed t
  CHECK(c.survival[3] == 0.0);
  CHECK(c.survival_steps(0) == 1.0);
  CHECK(c.survival_steps(2) == 0.5);

  const auto all_cut = survival_curve(batch({100, 100, 100}, 0.1, 100), grid);
  for (double s : all_cut.survival) CHECK(s == 1.0);
  CHECK(all_cut.censor_count == 3);
  CHECK(all_cut.survival_steps(100) == 1.0);

  auto mixed = batch({1, 2}, 0.5);
  mixed[1].rescale = 0.25;
  CHECK_THROWS_AS(survival_curve(mixed, grid), MixedRescale);
}

TEST_CASE("geometric t grid") {
  const auto g = geometric_t_grid();
  REQUIRE(g.size() == 61);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(0.05));
  CHECK(g[60] == doctest::Approx(6.0));
  for (std::size_t i = 2; i < g.size(); ++i) {
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[2] / g[1]));
  }
}

TEST_CASE("KS distance examples") {
  SurvivalCurve exact;
  exact.t_grid = geometric_t_grid();
  for (double t : exact.t_grid) exact.survival.push_back(std::exp(-t));
  exact.n_samples = 1;
  CHECK(ks_exponential(exact) == 0.0);

  const auto one = survival_curve(batch({7}, 0.1), geometric_t_grid());
  CHECK(ks_exponential(one) == doctest::Approx(1.0 - std::exp(-0.7)).epsilon(1e-12));
  CHECK(ks_exponential(one) == doctest::Approx(0.5034).epsilon(1e-4));

  // survival stuck at 1 up to a large horizon
  const auto stuck = survival_curve(batch({1000, 1000}, 0.01, 1000), geometric_t_grid(0.05, 6, 60));
  CHECK(ks_exponential(stuck) == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-12));
  const auto stuck_far = survival_curve(batch({5000}, 0.01, 5000), geometric_t_grid(0.05, 40, 80));
  CHECK(ks_exponential(stuck_far) > 0.999);
}

TEST_CASE("survival curves are nonincreasing and bounded") {
  Rng rng(51, "surv-fuzz", 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(std::uint64_t{200});
    const std::uint64_t cutoff = 1 + rng.uniform_below(std::uint64_t{100});
    std::vector<std::uint64_t> taus;
    for (std::size_t i = 0; i < n; ++i) taus.push_back(1 + rng.uniform_below(std::uint64_t{150}));
    const auto c = survival_curve(batch(taus, rng.uniform(0.001, 0.2), cutoff),
                                  geometric_t_grid(0.01, 10, 100));
    for (std::size_t i = 0; i < c.survival.size(); ++i) {
      REQUIRE(c.survival[i] >= 0.0);
      REQUIRE(c.survival[i] <= 1.0);
      if (i > 0) REQUIRE(c.survival[i] <= c.survival[i - 1]);
    }
    REQUIRE(c.survival[0] == 1.0);
    for (std::uint64_t k = 1; k < 200; ++k) REQUIRE(c.survival_steps(k) <= c.survival_steps(k - 1));
  }
}

TEST_CASE("KS distance does not change when the grid is refined") {
  Rng rng(52, "ks-refine", 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> taus;
    const std::size_t n = 1 + rng.uniform_below(std::uint64_t{500});
    for (std::size_t i = 0; i < n; ++i) taus.push_back(1 + rng.uniform_below(std::uint64_t{300}));
    const auto samples = batch(taus, 0.01, 250);
    const double coarse = ks_exponential(survival_curve(samples, geometric_t_grid(0.05, 6, 60)));
    const double fine = ks_exponential(survival_curve(samples, geometric_t_grid(0.001, 8, 5000)));
    // refining can only add points where S is already constant; the sup over
    // both sides of each jump already covers them
    REQUIRE(fine == doctest::Approx(coarse).epsilon(1e-12));
  }
}

TEST_CASE("geometric law gap") {
  // exactly geometric with mass 1/2: 2^(10-k) samples with tau = k
  std::vector<std::uint64_t> taus;
  for (std::uint64_t k = 1; k <= 10; ++k) {
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << (10 - k)); ++j) taus.push_back(k);
  }
  taus.push_back(11);
  const auto c = survival_curve(batch(taus, 0.5), geometric_t_grid());
  const std::vector<std::uint64_t> n_grid{0, 1, 2, 5, 10};
  const auto rep = geometric_law_gap(c, 0.5, n_grid);
  CHECK(rep.max_gap == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rep.rows[0].gap == 0.0);

  const std::vector<std::uint64_t> seven{7};
  const auto r7 = geometric_law_gap(c, 0.1, seven);
  CHECK(r7.rows[0].reference == doctest::Approx(0.4782969).epsilon(1e-12));
  CHECK(r7.rows[0].empirical == doctest::Approx(1.0 / 128).epsilon(1e-12));
}

TEST_CASE("delta from samples") {
  const std::vector<HitOutcome> a{{1, false}, {3, false}, {5, true}, {2, false}};
  const auto same = delta_from_samples(a, a, 5);
  CHECK(same.delta_hat == 0.0);
  const std::vector<HitOutcome> b{{4, false}, {4, false}, {5, true}, {1, false}};
  const auto k1 = delta_from_samples(a, b, 1);
  CHECK(k1.k_max == 1);
  CHECK(k1.delta_hat == doctest::Approx(0.0));  // both lose one of four at k = 1
  const auto k3 = delta_from_samples(a, b, 3);
  // k=2: a 2/4, b 3/4; k=3: a 1/4, b 3/4
  CHECK(k3.delta_hat == doctest::Approx(0.5));
  CHECK(k3.argmax_k == 3);
  CHECK(k3.surv_uncond[2] == doctest::Approx(0.25));
  CHECK(k3.surv_cond[2] == doctest::Approx(0.75));
  CHECK(default_delta_k(0.02) == 1000);
  CHECK_THROWS_AS(delta_from_samples(a, b, 0), InvalidArgument);
}

TEST_CASE("delta half-batch consistency") {
  RandomSystem sys(SystemSpec{});
  const auto nu = MeasureEstimate::analytic_lebesgue();
  const Ball target(std::sqrt(2.0) - 1, 0.05);
  DeltaOptions opt;
  opt.samples = 40000;
  opt.seed = 53;
  opt.keep_samples = true;
  const auto run = delta_estimator(sys, nu, target, opt);
  const std::size_t h = run.uncond.size() / 2;
  const std::span<const HitOutcome> u(run.uncond), c(run.cond);
  const auto k = run.estimate.k_max;
  const auto first = delta_from_samples(u.first(h), c.first(h), k);
  const auto second = delta_from_samples(u.subspan(h), c.subspan(h), k);
  CHECK(std::fabs(first.delta_hat - second.delta_hat) <=
        3.0 * std::hypot(first.std_error, second.std_error));
  CHECK(run.estimate.delta_hat >= 0.0);
  CHECK(run.estimate.delta_hat <= 1.0);
}

TEST_CASE("delta shrinks from r = 0.1 to r = 0.001") {
  RandomSystem sys(SystemSpec{});
  const auto nu = MeasureEstimate::analytic_lebesgue();
  DeltaOptions opt;
  opt.samples = 50000;
  opt.seed = 54;
  const double x0 = std::sqrt(2.0) - 1;
  const auto big = delta_estimator(sys, nu, Ball(x0, 0.1), opt).estimate;
  const auto small = delta_estimator(sys, nu, Ball(x0, 0.001), opt).estimate;
  CHECK(small.delta_hat < big.delta_hat);
}

TEST_CASE("geometric gap is bounded by delta") {
  RandomSystem sys(SystemSpec{});
  const auto nu = MeasureEstimate::analytic_lebesgue();
  const double x0 = std::sqrt(2.0) - 1;
  const std::vector<std::uint64_t> n_grid{1, 5, 10, 50};
  for (double r : {0.05, 0.01}) {
    const Ball target(x0, r);
    DeltaOptions opt;
    opt.samples = 50000;
    opt.seed = 55;
    opt.keep_samples = true;
    const auto run = delta_estimator(sys, nu, target, opt);
    std::vector<HittingSample> hs;
    for (const auto& h : run.uncond) hs.push_back({hs.size(), h.tau, h.censored, 2 * r, 0, 0});
    const auto curve = survival_curve(hs, geometric_t_grid());
    const auto gap = geometric_law_gap(curve, 2 * r, n_grid);
    for (const auto& row : gap.rows) {
      CAPTURE(r);
      CAPTURE(row.n);
      CHECK(row.gap <= run.estimate.delta_hat + 4.0 * (row.std_error + run.estimate.std_error));
    }
  }
}

TEST_CASE("delta and correlations do not depend on the worker count") {
  RandomSystem sys(SystemSpec{});
  const auto nu = MeasureEstimate::analytic_lebesgue();
  DeltaOptions opt;
  opt.samples = 5000;
  opt.seed = 56;
  opt.workers = 1;
  const auto a = delta_estimator(sys, nu, Ball(0.3, 0.02), opt).estimate;
  opt.workers = 5;
  const auto b = delta_estimator(sys, nu, Ball(0.3, 0.02), opt).estimate;
  CHECK(a.surv_uncond == b.surv_uncond);
  CHECK(a.surv_cond == b.surv_cond);

  CorrelationOptions co;
  co.samples = 20000;
  co.seed = 57;
  co.workers = 1;
  const auto lags = lags_0_to(5);
  const auto c1 = correlation_estimator(sys, Observable::parse("cos"),
                                        Observable::parse("indicator:0:0.25"), lags, co);
  co.workers = 4;
  const auto c4 = correlation_estimator(sys, Observable::parse("cos"),
                                        Observable::parse("indicator:0:0.25"), lags, co);
  CHECK(c1.estimates == c4.estimates);
  CHECK(c1.std_errors == c4.std_errors);
}

TEST_CASE("correlations of the doubling map") {
  RandomSystem sys(affine(2));
  CorrelationOptions co;
  co.samples = 200000;
  co.seed = 58;
  const auto lags = lags_0_to(10);
  const auto s = correlation_estimator(sys, Observable::parse("cos"),
                                       Observable::parse("indicator:0:0.25"), lags, co);
  CHECK(std::fabs(s.estimates[0] - 1.0 / (2 * std::numbers::pi)) <= 3 * s.std_errors[0]);
  for (std::size_t n = 1; n < lags.size(); ++n) {
    CAPTURE(n);
    CHECK(std::fabs(s.estimates[n]) <= 3 * s.std_errors[n]);
  }
  for (const auto& row : superpoly_fit(s, std::vector<double>{1, 2, 4})) CHECK(row.pass);

  const auto flat = correlation_estimator(sys, Observable::parse("const:2.5"),
                                          Observable::parse("indicator:0:0.25"), lags, co);
  for (double e : flat.estimates) CHECK(std::fabs(e) <= 1e-12);
}

TEST_CASE("correlations under strong i.i.d. noise vanish after one step") {
  SystemSpec spec;
  spec.family = Family::perturbed;
  spec.epsilon = 0.5;
  RandomSystem sys(spec);
  CorrelationOptions co;
  co.samples = 200000;
  co.seed = 59;
  const auto lags = lags_0_to(10);
  const auto s = correlation_estimator(sys, Observable::parse("triangle"),
                                       Observable::parse("sawtooth"), lags, co);
  for (std::size_t n = 1; n < lags.size(); ++n) {
    CAPTURE(n);
    CHECK(std::fabs(s.estimates[n]) <= 3 * s.std_errors[n]);
  }
}

TEST_CASE("correlation estimator rejects non-Lipschitz psi") {
  RandomSystem sys(affine(2));
  const auto lags = lags_0_to(3);
  CHECK_THROWS_AS(correlation_estimator(sys, Observable::parse("indicator:0:0.5"),
                                        Observable::parse("cos"), lags, {}),
                  InvalidArgument);
}

TEST_CASE("super-polynomial decay diagnostic on synthetic series") {
  CorrelationSeries s;
  s.n_grid = lags_0_to(10);
  s.std_errors.assign(11, 0.0);
  const std::vector<double> ps{1, 2, 4};

  s.estimates.assign(11, 0.0);
  for (const auto& row : superpoly_fit(s, ps)) CHECK(row.pass);

  s.estimates.clear();
  for (auto n : s.n_grid) s.estimates.push_back(std::pow(2.0, -static_cast<double>(n)));
  for (const auto& row : superpoly_fit(s, ps)) CHECK(row.pass);

  s.estimates.clear();
  for (auto n : s.n_grid) s.estimates.push_back(n == 0 ? 1.0 : 1.0 / static_cast<double>(n));
  const std::vector<double> p2{2};
  CHECK_FALSE(superpoly_fit(s, p2)[0].pass);
}

TEST_CASE("observables") {
  const auto c = Observable::parse("cos");
  CHECK(c(0.0) == doctest::Approx(1.0));
  CHECK(c.lipschitz_norm() == doctest::Approx(2 * std::numbers::pi));
  CHECK(c.sup_norm() == 1.0);
  const auto ind = Observable::parse("indicator:0.9:0.1");
  CHECK(ind(0.95) == 1.0);
  CHECK(ind(0.05) == 1.0);
  CHECK(ind(0.5) == 0.0);
  CHECK(std::isinf(ind.lipschitz_norm()));
  const auto tri = Observable::parse("triangle");
  CHECK(tri(0.75) == doctest::Approx(0.25));
  CHECK(tri.lipschitz_norm() == 1.0);
  CHECK(Observable::parse("const:3")(0.2) == 3.0);
  CHECK_THROWS_AS(Observable::parse("sin"), InvalidArgument);
  CHECK_THROWS_AS(Observable::parse("indicator:0:x"), InvalidArgument);
}
