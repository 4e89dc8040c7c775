#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hitstat/config.hpp"
#include "hitstat/experiments.hpp"
#include "hitstat/lawcheck.hpp"
#include "hitstat/measure.hpp"
#include "hitstat/parallel.hpp"
#include "hitstat/recurrence.hpp"

namespace py = pybind11;
using namespace hitstat;

namespace {

SystemSpec make_spec(const std::string& family, std::uint32_t multiplier, double beta_min,
                     double beta_max, double epsilon, std::uint32_t burn_in) {
  SystemSpec s;
  s.family = family_from_string(family);
  s.multiplier = multiplier;
  s.beta = beta_min == beta_max ? ParameterDistribution::point_mass(beta_min)
                                : ParameterDistribution::uniform_on(beta_min, beta_max);
  s.epsilon = epsilon;
  s.burn_in = burn_in;
  return s;
}

unsigned workers_or_default(unsigned w) { return w == 0 ? default_workers() : w; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hitting and return time statistics for random circle maps";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "HitstatError");
  py::register_exception<ConfigError>(m, "ConfigError");

  m.def("circle_dist",
        [](double x, double y) { return circle_dist(CirclePoint(x), CirclePoint(y)); });
  m.def("in_ball", [](double x, double center, double radius) {
    return in_ball(CirclePoint(x), Ball(center, radius));
  });
  m.def("eval_theta", &eval_theta);
  m.def("markov_stationary", [](const Matrix2& a) { return markov_stationary(a); });
  m.def("count_periodic_points", &count_periodic_points, py::arg("m"), py::arg("n"));
  m.def(
      "expanding_in_average",
      [](double lo, double hi) {
        return expanding_in_average(lo == hi ? ParameterDistribution::point_mass(lo)
                                             : ParameterDistribution::uniform_on(lo, hi));
      },
      py::arg("beta_min"), py::arg("beta_max"));

  py::class_<RandomSystem>(m, "RandomSystem")
      .def(py::init([](const std::string& family, std::uint32_t multiplier, double beta_min,
                       double beta_max, double epsilon, std::uint32_t burn_in) {
             return RandomSystem(
                 make_spec(family, multiplier, beta_min, beta_max, epsilon, burn_in));
           }),
           py::arg("family") = "markov_skew", py::arg("multiplier") = 2,
           py::arg("beta_min") = 2.0, py::arg("beta_max") = 3.0, py::arg("epsilon") = 0.1,
           py::arg("burn_in") = 1000)
      .def_property_readonly("family", [](const RandomSystem& s) {
        return std::string(to_string(s.family()));
      })
      .def_property_readonly("lebesgue_stationary", &RandomSystem::lebesgue_stationary)
      .def(
          "orbit",
          [](const RandomSystem& s, double x0, std::size_t steps, std::uint64_t seed) {
            Rng rng(seed, "orbit", 0);
            Orbit o = s.start(CirclePoint(x0), rng);
            std::vector<double> xs{o.x()};
            for (std::size_t k = 0; k < steps; ++k) {
              o.step();
              xs.push_back(o.x());
            }
            return xs;
          },
          py::arg("x0"), py::arg("steps"), py::arg("seed") = 0);

  py::class_<MeasureEstimate>(m, "MeasureEstimate")
      .def_static("lebesgue", &MeasureEstimate::analytic_lebesgue)
      .def_static("from_samples",
                  [](std::vector<double> xs) { return MeasureEstimate::empirical(std::move(xs)); })
      .def_property_readonly("analytic", &MeasureEstimate::analytic)
      .def_property_readonly("size", &MeasureEstimate::size)
      .def("ball_mass", [](const MeasureEstimate& e, double c, double r) {
        const auto mass = e.ball_mass(Ball(c, r));
        return py::make_tuple(mass.mass, mass.std_error);
      });

  m.def(
      "estimate_stationary",
      [](const RandomSystem& s, std::size_t samples, std::uint64_t seed, bool force_empirical,
         unsigned workers) {
        StationaryOptions opt;
        opt.burn_in = s.spec().burn_in;
        opt.samples = samples;
        opt.seed = seed;
        opt.force_empirical = force_empirical;
        opt.workers = workers_or_default(workers);
        return estimate_stationary(s, opt);
      },
      py::arg("system"), py::arg("samples") = 100000, py::arg("seed") = 0,
      py::arg("force_empirical") = false, py::arg("workers") = 0);

  m.def(
      "hitting_times",
      [](const RandomSystem& s, const MeasureEstimate& nu, double target, double radius,
         std::size_t samples, std::uint64_t seed, bool conditional, unsigned workers) {
        BatchOptions opt;
        opt.samples = samples;
        opt.seed = seed;
        opt.start = conditional ? StartLaw::conditional : StartLaw::invariant;
        opt.workers = workers_or_default(workers);
        py::gil_scoped_release release;
        const auto hs = simulate_hitting_times(s, nu, Ball(target, radius), opt);
        std::vector<std::uint64_t> tau;
        std::vector<bool> censored;
        for (const auto& h : hs) {
          tau.push_back(h.tau);
          censored.push_back(h.censored);
        }
        py::gil_scoped_acquire acquire;
        const double rescale = hs.empty() ? 0.0 : hs.front().rescale;
        return py::make_tuple(tau, censored, rescale);
      },
      py::arg("system"), py::arg("nu"), py::arg("target"), py::arg("radius"),
      py::arg("samples"), py::arg("seed") = 0, py::arg("conditional") = false,
      py::arg("workers") = 0);

  m.def(
      "ks_exponential",
      [](const std::vector<std::uint64_t>& tau, const std::vector<bool>& censored,
         double rescale) {
        if (tau.size() != censored.size()) throw InvalidArgument("tau and censored differ in length");
        std::vector<HittingSample> hs;
        for (std::size_t i = 0; i < tau.size(); ++i) {
          hs.push_back({i, tau[i], censored[i], rescale, 0, i});
        }
        return ks_exponential(survival_curve(hs, geometric_t_grid()));
      },
      py::arg("tau"), py::arg("censored"), py::arg("rescale"));

  m.def(
      "recurrence_rate",
      [](const RandomSystem& s, double x, const std::vector<double>& radii, std::uint64_t seed) {
        const auto est = recurrence_rate(s, CirclePoint(x), radii, seed);
        std::vector<std::uint64_t> taus;
        for (const auto& t : est.times) taus.push_back(t.tau);
        py::dict d;
        d["taus"] = taus;
        d["slope"] = est.slope;
        d["lower_slope"] = est.lower_slope;
        d["upper_slope"] = est.upper_slope;
        return d;
      },
      py::arg("system"), py::arg("x"), py::arg("radii"), py::arg("seed") = 0);

  m.def(
      "delta",
      [](const RandomSystem& s, const MeasureEstimate& nu, double target, double radius,
         std::size_t samples, std::uint64_t seed, std::uint64_t k_max, unsigned workers) {
        DeltaOptions opt;
        opt.samples = samples;
        opt.seed = seed;
        opt.k_max = k_max;
        opt.workers = workers_or_default(workers);
        const auto est = delta_estimator(s, nu, Ball(target, radius), opt).estimate;
        py::dict d;
        d["delta_hat"] = est.delta_hat;
        d["stderr"] = est.std_error;
        d["argmax_k"] = est.argmax_k;
        d["k_max"] = est.k_max;
        d["surv_uncond"] = est.surv_uncond;
        d["surv_cond"] = est.surv_cond;
        return d;
      },
      py::arg("system"), py::arg("nu"), py::arg("target"), py::arg("radius"),
      py::arg("samples") = 50000, py::arg("seed") = 0, py::arg("k_max") = 0,
      py::arg("workers") = 0);

  m.def(
      "correlations",
      [](const RandomSystem& s, const std::string& psi, const std::string& phi,
         const std::vector<std::uint64_t>& lags, std::size_t samples, std::uint64_t seed,
         unsigned workers) {
        CorrelationOptions opt;
        opt.samples = samples;
        opt.seed = seed;
        opt.workers = workers_or_default(workers);
        const auto c =
            correlation_estimator(s, Observable::parse(psi), Observable::parse(phi), lags, opt);
        return py::make_tuple(c.estimates, c.std_errors);
      },
      py::arg("system"), py::arg("psi") = "cos", py::arg("phi") = "indicator:0:0.25",
      py::arg("lags") = std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5}, py::arg("samples") = 100000,
      py::arg("seed") = 0, py::arg("workers") = 0);

  m.def(
      "run",
      [](const std::string& subcommand, const std::string& config_text) {
        const auto result = run_subcommand(subcommand, parse_config(config_text));
        return py::make_tuple(static_cast<int>(result.exit_code),
                              result.manifest.to_json().dump());
      },
      py::arg("subcommand"), py::arg("config_text"),
      "Runs a CLI subcommand from config text; returns (exit_code, manifest_json).");
}
