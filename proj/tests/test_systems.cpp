#include <doctest.h>

#include <cmath>
#include <vector>

#include "hitstat/measure.hpp"
#include "hitstat/systems.hpp"

using namespace hitstat;

TEST_CASE("affine examples") {
  CHECK(eval_affine(2, 0.3) == doctest::Approx(0.6));
  CHECK(eval_affine(3, 0.9) == doctest::Approx(0.7));
}

TEST_CASE("beta examples") {
  CHECK(eval_beta(2.5, 0.6) == doctest::Approx(0.5));
  CHECK(eval_beta(1.5, 0.0) == 0.0);
  CHECK(eval_beta(3.0, 1.0 / 3.0) == 0.0);
}

TEST_CASE("perturbed examples") {
  CHECK(eval_perturbed(2, 0.3, 0.05) == doctest::Approx(0.65));
  CHECK(eval_perturbed(2, 0.95, 0.1) == 0.0);
  Rng rng(1);
  CHECK(eval_perturbed(2, 1e-12, 0.3, rng) == doctest::Approx(0.6).epsilon(1e-10));
}

TEST_CASE("perturbed consumes exactly one draw") {
  Rng a(5), b(5);
  eval_perturbed(2, 0.1, 0.3, a);
  b.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("zero noise limit is the affine map") {
  Rng rng(2, "eps0", 0);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform01();
    const double d = circle_dist(CirclePoint(eval_perturbed(2, 1e-12, x, rng)),
                                 CirclePoint(eval_affine(2, x)));
    REQUIRE(d <= 1e-10);
  }
}

TEST_CASE("theta branches") {
  CHECK(eval_theta(0.1) == doctest::Approx(0.2));
  CHECK(eval_theta(0.5) == doctest::Approx(0.2));
  CHECK(eval_theta(0.8) == doctest::Approx(0.7));
  CHECK(eval_theta(0.3) == doctest::Approx(0.7));
  for (double w : {0.0, 0.19999, 0.2, 0.39999, 0.4, 0.59999, 0.6, 0.99999}) {
    const double t = eval_theta(w);
    CHECK(t >= 0.0);
    CHECK(t < 1.0);
  }
}

TEST_CASE("theta preserves Lebesgue: reciprocal slopes over each image interval") {
  // slopes and images read off the map itself; every y must collect
  // reciprocal slopes summing to 1 (1/2 + 1/2 below 2/5, 1/3 + 2/3 above)
  const double lo[] = {0.0, 0.2, 0.4, 0.6};
  const double hi[] = {0.2, 0.4, 0.6, 1.0};
  double slope[4], image_lo[4], image_hi[4];
  for (int i = 0; i < 4; ++i) {
    const double mid = 0.5 * (lo[i] + hi[i]);
    image_lo[i] = eval_theta(lo[i]);
    slope[i] = (eval_theta(mid) - image_lo[i]) / (mid - lo[i]);
    image_hi[i] = image_lo[i] + slope[i] * (hi[i] - lo[i]);
  }
  CHECK(slope[0] == doctest::Approx(2.0));
  CHECK(slope[1] == doctest::Approx(3.0));
  CHECK(slope[2] == doctest::Approx(2.0));
  CHECK(slope[3] == doctest::Approx(1.5));
  for (double y = 0.005; y < 1.0; y += 0.01) {
    double density = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (y >= image_lo[i] - 1e-12 && y < image_hi[i] - 1e-12) density += 1.0 / slope[i];
    }
    CHECK(density == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("fiber selection") {
  CHECK(select_fiber(0.3).multiplier == 2);
  CHECK(select_fiber(0.4).multiplier == 3);
  CHECK(select_fiber(0.99).multiplier == 3);
  CHECK(FiberMap::affine(2).min_derivative() == 2.0);
  CHECK(FiberMap::beta_map(2.5).min_derivative() == 2.5);
  CHECK(FiberMap::perturbed(3, 0.1).min_derivative() == 3.0);
}

TEST_CASE("skew step examples") {
  auto [w1, x1] = step_skew(0.5, 0.1);
  CHECK(w1 == doctest::Approx(0.2));
  CHECK(x1 == doctest::Approx(0.3));
  auto [w2, x2] = step_skew(0.1, 0.3);
  CHECK(w2 == doctest::Approx(0.2));
  CHECK(x2 == doctest::Approx(0.6));
  auto [w3, x3] = step_skew(0.3, 0.0);
  CHECK(w3 == doctest::Approx(0.7));
  CHECK(x3 == 0.0);
}

TEST_CASE("advance examples") {
  SystemSpec theta;
  theta.family = Family::theta_skew;
  Orbit o(theta, ExactCirclePoint(1, 7), DriverState{0.5, 1}, Rng(1));
  o.advance(2);
  CHECK(std::get<ExactCirclePoint>(o.phase()) == ExactCirclePoint(6, 7));
  CHECK(o.steps() == 2);

  SystemSpec doubling;
  doubling.family = Family::affine;
  Orbit d(doubling, ExactCirclePoint(1, 3), DriverState{}, Rng(1));
  d.advance(2);
  CHECK(std::get<ExactCirclePoint>(d.phase()) == ExactCirclePoint(1, 3));

  // n = 1 is one skew step
  Orbit one(theta, ExactCirclePoint(1, 10), DriverState{0.5, 1}, Rng(1));
  one.advance(1);
  auto [w, x] = step_skew(0.5, ExactCirclePoint(1, 10));
  CHECK(std::get<ExactCirclePoint>(one.phase()) == x);
  CHECK(one.driver().omega == w);
}

TEST_CASE("step counter and phase range") {
  for (Family f : {Family::affine, Family::markov_skew, Family::theta_skew, Family::beta,
                   Family::perturbed}) {
    SystemSpec spec;
    spec.family = f;
    RandomSystem sys(spec);
    Rng rng(3, "counter", static_cast<std::uint64_t>(f));
    Orbit o = sys.start_uniform(rng);
    for (std::uint64_t k = 1; k <= 500; ++k) {
      o.step();
      REQUIRE(o.steps() == k);
      REQUIRE(o.x() >= 0.0);
      REQUIRE(o.x() < 1.0);
    }
  }
}

TEST_CASE("markov stationary law") {
  const Prob2 pi = markov_stationary(kSkewTransition);
  CHECK(pi[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(pi[1] == doctest::Approx(0.6).epsilon(1e-14));
  for (int j = 0; j < 2; ++j) {
    const double pa = pi[0] * kSkewTransition[0][j] + pi[1] * kSkewTransition[1][j];
    CHECK(std::fabs(pa - pi[j]) <= 1e-12);
  }
  CHECK_THROWS_AS(markov_stationary(Matrix2{{{1, 0}, {0, 1}}}), SingularChain);
  const Prob2 flip = markov_stationary(Matrix2{{{0, 1}, {1, 0}}});
  CHECK(flip[0] == 0.5);
  CHECK(flip[1] == 0.5);
  // random chains: pi A = pi, applying A twice changes nothing
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(0.01, 0.99), q = rng.uniform(0.01, 0.99);
    const Matrix2 a{{{1 - p, p}, {q, 1 - q}}};
    const Prob2 s = markov_stationary(a);
    for (int j = 0; j < 2; ++j) {
      const double once = s[0] * a[0][j] + s[1] * a[1][j];
      REQUIRE(std::fabs(once - s[j]) <= 1e-12);
    }
    REQUIRE(std::fabs(s[0] + s[1] - 1.0) <= 1e-15);
  }
}

TEST_CASE("expanding in average") {
  CHECK(std::fabs(expanding_in_average(ParameterDistribution::uniform_on(2, 3)) -
                  std::log(1.5)) <= 1e-10);
  CHECK(expanding_in_average(ParameterDistribution::point_mass(2)) == doctest::Approx(0.5));
  CHECK(std::fabs(expanding_in_average(ParameterDistribution::uniform_on(1.25, 1.75)) -
                  std::log(1.75 / 1.25) / 0.5) <= 1e-10);
  CHECK(std::fabs(expanding_in_average(ParameterDistribution::uniform_on(1.25, 1.75)) -
                  0.67294) < 1e-5);
}

TEST_CASE("periodic point counts") {
  CHECK(count_periodic_points(2, 3) == 7);
  CHECK(count_periodic_points(2, 1) == 1);
  CHECK(count_periodic_points(3, 2) == 8);
  CHECK_THROWS_AS(count_periodic_points(2, 64), Overflow);
  // brute force: k/(M-1) are exactly the fixed points of x -> M x
  for (std::uint32_t n = 1; n <= 10; ++n) {
    const std::uint64_t M = std::uint64_t{1} << n;
    std::uint64_t fixed = 0;
    for (std::uint64_t k = 0; k < M - 1; ++k) {
      if ((M * k) % (M - 1) == k) ++fixed;
    }
    CHECK(count_periodic_points(2, n) == fixed);
  }
}

TEST_CASE("skew product leaves Lebesgue invariant") {
  Rng rng(5, "leb-invariance", 0);
  std::vector<double> xs, ws;
  for (int i = 0; i < 100000; ++i) {
    const double w = rng.uniform01();
    auto [w1, x1] = step_skew(w, ExactCirclePoint::random(rng));
    ws.push_back(w1);
    xs.push_back(x1.to_double());
  }
  CHECK(ks_uniform_test(xs, 1e-3).pass);
  CHECK(ks_uniform_test(ws, 1e-3).pass);
}

namespace {

std::array<std::array<double, 2>, 2> label_transitions(Family f, std::uint64_t steps,
                                                       std::array<double, 2>& freq) {
  SystemSpec spec;
  spec.family = f;
  RandomSystem sys(spec);
  Rng rng(6, "labels", 0);
  Orbit o = sys.start_uniform(rng);
  std::array<std::array<double, 2>, 2> counts{};
  freq = {0, 0};
  for (std::uint64_t k = 0; k < steps; ++k) {
    const int a = o.current_fiber().multiplier == 2 ? 0 : 1;
    o.step();
    const int b = o.current_fiber().multiplier == 2 ? 0 : 1;
    counts[a][b] += 1;
    freq[a] += 1;
  }
  for (auto& row : counts) {
    const double s = row[0] + row[1];
    row[0] /= s;
    row[1] /= s;
  }
  freq[0] /= static_cast<double>(steps);
  freq[1] /= static_cast<double>(steps);
  return counts;
}

}  // namespace

TEST_CASE("fiber labels follow the Markov chain under both drivers") {
  for (Family f : {Family::markov_skew, Family::theta_skew}) {
    CAPTURE(to_string(f));
    std::array<double, 2> freq;
    const auto t = label_transitions(f, 1000000, freq);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) CHECK(std::fabs(t[i][j] - kSkewTransition[i][j]) <= 0.02);
    }
    CHECK(std::fabs(freq[0] - 0.4) <= 0.01);
    CHECK(std::fabs(freq[1] - 0.6) <= 0.01);
  }
}

TEST_CASE("family names round trip") {
  for (Family f : {Family::affine, Family::markov_skew, Family::theta_skew, Family::beta,
                   Family::perturbed}) {
    CHECK(family_from_string(to_string(f)) == f);
  }
  CHECK_THROWS_AS(family_from_string("logistic"), InvalidArgument);
}

TEST_CASE("invalid systems rejected") {
  SystemSpec s;
  s.family = Family::affine;
  s.multiplier = 1;
  CHECK_THROWS_AS(RandomSystem{s}, InvalidArgument);
  s.family = Family::beta;
  s.beta = ParameterDistribution::uniform_on(0.5, 2.0);
  CHECK_THROWS_AS(RandomSystem{s}, InvalidArgument);
}

TEST_CASE("orbit determinism from a seed") {
  SystemSpec spec;
  RandomSystem sys(spec);
  Rng a(9, "det", 3), b(9, "det", 3);
  Orbit oa = sys.start_uniform(a), ob = sys.start_uniform(b);
  for (int i = 0; i < 1000; ++i) {
    oa.step();
    ob.step();
  }
  CHECK(std::get<ExactCirclePoint>(oa.phase()) == std::get<ExactCirclePoint>(ob.phase()));
}
