#pragma once

// Experiment configuration: an INI-style text file with sections
//   [system]      family, multiplier, beta_min, beta_max, epsilon, burn_in
//   [experiment]  target, radius, samples, seed, cutoff, cutoff_factor,
//                 t_grid, workers, ks_tolerance, k_max, delta_tolerance,
//                 psi, phi, lags, p_list, annulus_a, annulus_b, rho,
//                 measure_samples, steps, starts, rate_tolerance, alpha,
//                 empirical
//   [output]      dir
// Lists are comma separated. Unknown keys and out-of-range values are
// rejected with the offending key named.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hitstat/errors.hpp"
#include "hitstat/systems.hpp"

namespace hitstat {

class ConfigError : public Error {
 public:
  enum class Kind { unknown_key, out_of_range, missing_required, malformed };

  ConfigError(Kind kind, std::string key, const std::string& what)
      : Error(what), kind_(kind), key_(std::move(key)) {}

  Kind kind() const { return kind_; }
  const std::string& key() const { return key_; }

 private:
  Kind kind_;
  std::string key_;
};

struct ExperimentConfig {
  SystemSpec system;

  std::optional<double> target;  // x0; experiments default to sqrt(2) - 1
  std::vector<double> radii;     // empty: per-experiment default
  std::size_t samples = 50000;
  std::uint64_t seed = 20240601;
  std::optional<std::uint64_t> cutoff;  // empty: ceil(cutoff_factor / mass)
  double cutoff_factor = 50.0;
  std::string t_grid = "geometric:0.05:6:60";
  unsigned workers = 0;  // 0: machine parallelism

  std::optional<double> ks_tolerance;  // hitting 0.02, return 0.03
  std::uint64_t k_max = 0;             // delta sup truncation, 0: ceil(20/mass)
  double delta_tolerance = 0.05;
  std::string psi = "cos";
  std::string phi = "indicator:0:0.25";
  std::vector<std::uint64_t> lags;  // empty: 0..10
  std::vector<double> p_list{1.0, 2.0, 4.0};
  double annulus_a = 0.5;
  double annulus_b = 0.0;
  std::vector<double> rho;  // empty: r/2, r/4, r/8 for every r
  std::size_t measure_samples = 200000;
  std::uint64_t steps = 20;
  std::size_t starts = 1;
  double rate_tolerance = 0.15;
  double alpha = 1e-3;
  bool empirical = false;

  std::string out_dir = "out";

  // Canonical key=value rendering of every field (17 significant digits).
  std::string canonical() const;
  // FNV-1a of canonical(), 16 hex digits.
  std::string hash() const;
  // Re-checks every range constraint; used after command-line overrides.
  void validate() const;
  unsigned effective_workers() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::vector<double> parse_t_grid(const std::string& spec);

}  // namespace hitstat
