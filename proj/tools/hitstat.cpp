#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>

#include "hitstat/experiments.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::vector<double> radii;
  std::optional<double> target;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

hitstat::ExperimentConfig resolve(const Overrides& o) {
  hitstat::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = hitstat::load_config(o.config);
  } else {
    cfg.system.family = hitstat::Family::markov_skew;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.samples) cfg.samples = *o.samples;
  if (!o.radii.empty()) cfg.radii = o.radii;
  if (o.target) cfg.target = *o.target;
  if (o.out) cfg.out_dir = *o.out;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hitting and return time experiments for random circle maps"};
  app.set_version_flag("--version", std::string(hitstat::kVersion));
  app.require_subcommand(1);

  Overrides o;
  app.add_option("--config", o.config, "experiment config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--samples", o.samples, "number of samples");
  app.add_option("--radius", o.radii, "target radius (repeatable)")->take_all();
  app.add_option("--target", o.target, "target point x0");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--workers", o.workers, "worker threads (0: all cores)");

  const char* names[] = {"orbit",        "hitting-law", "return-law",    "recurrence-rate",
                         "delta",        "correlations", "annulus-check", "stationary"};
  for (const char* n : names) {
    app.add_subcommand(n)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hitstat::ExitCode::config_error);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = resolve(o);
    const auto result = hitstat::run_subcommand(name, cfg);
    const auto& m = result.manifest;
    fmt::print("{} {} samples={} censored={} wall={:.2f}s -> {}\n", m.subcommand,
               m.pass ? "PASS" : "FAIL", m.samples, m.censored, m.wall_seconds, cfg.out_dir);
    fmt::print("{}\n", m.summary.dump());
    return static_cast<int>(result.exit_code);
  } catch (const hitstat::ConfigError& e) {
    fmt::print(stderr, "config error [{}]: {}\n", e.key(), e.what());
    return static_cast<int>(hitstat::ExitCode::config_error);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(hitstat::exit_code_for(e));
  }
}
