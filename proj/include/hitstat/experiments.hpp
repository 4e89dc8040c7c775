#pragma once

// Experiment drivers behind the CLI subcommands. Each run writes its CSV
// files and manifest.json into config.out_dir. Every CSV starts with a
// comment line "# config_hash=<hex> seed=<u64> subcommand=<name>" followed
// by the column header:
//   samples.csv       sample_id,tau,rescaled_tau,censored
//   survival.csv      t,empirical_survival,exp_neg_t,abs_diff
//   rate.csv          r,tau,log2_r,log2_tau
//   rate_summary.csv  start,x,slope,lower_slope,upper_slope
//   delta.csv         k,surv_uncond,surv_cond,abs_diff  (one block per radius,
//                     each preceded by a "# r=..." comment line)
//   delta_summary.csv r,ball_mass,k_max,delta_hat,stderr
//   correlations.csv  n,estimate,stderr
//   annulus.csv       r,rho,mass,bound,ratio
//   stationary.csv    bin_lo,bin_hi,mass,density
//   orbit.csv         step,driver,x
// Numbers are written with 17 significant digits.

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "hitstat/config.hpp"

namespace hitstat {

inline constexpr const char* kVersion = "0.1.0";

enum class ExitCode : int {
  ok = 0,
  check_failed = 1,
  config_error = 2,
  io_error = 3,
  rejection_stall = 4,
  zero_mass = 5,
  insufficient_data = 6,
  numerical_failure = 7,
  internal_error = 8,
};

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  double wall_seconds = 0;
  std::size_t samples = 0;
  std::size_t censored = 0;
  unsigned workers = 1;
  bool pass = true;
  nlohmann::json summary = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct RunResult {
  ExitCode exit_code = ExitCode::ok;
  RunManifest manifest;
};

RunResult run_orbit(const ExperimentConfig& cfg);
RunResult run_hitting_law(const ExperimentConfig& cfg);
RunResult run_return_law(const ExperimentConfig& cfg);
RunResult run_rate(const ExperimentConfig& cfg);
RunResult run_delta(const ExperimentConfig& cfg);
RunResult run_correlations(const ExperimentConfig& cfg);
RunResult run_annulus(const ExperimentConfig& cfg);
RunResult run_stationary(const ExperimentConfig& cfg);

// Dispatch by subcommand name; throws InvalidArgument for unknown names.
RunResult run_subcommand(const std::string& name, const ExperimentConfig& cfg);

// Maps a library exception to its named exit code.
ExitCode exit_code_for(const std::exception& e);

}  // namespace hitstat
