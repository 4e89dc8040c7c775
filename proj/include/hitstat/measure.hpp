#pragma once

// Stationary measures: analytic Lebesgue or an empirical sample, with ball
// and annulus mass queries, pointwise dimension and the annulus condition
//   nu(B(y,r) \ B(y,r-rho)) <= r^-b rho^a.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hitstat/systems.hpp"
#include "hitstat/torus.hpp"

namespace hitstat {

struct MassEstimate {
  double mass = 0;
  double std_error = 0;  // binomial standard error; 0 for analytic
  bool empty = false;  // empirical query that contained no sample
};

struct MeasureProvenance {
  std::string system;
  std::uint32_t burn_in = 0;
  std::uint64_t seed = 0;
};

class MeasureEstimate {
 public:
  static MeasureEstimate analytic_lebesgue() { return MeasureEstimate(); }
  // Samples are wrapped into [0,1) and sorted.
  static MeasureEstimate empirical(std::vector<double> samples, MeasureProvenance prov = {});

  bool analytic() const { return analytic_; }
  std::size_t size() const { return samples_.size(); }
  std::span<const double> samples() const { return samples_; }
  const MeasureProvenance& provenance() const { return provenance_; }

  MassEstimate ball_mass(const Ball& b) const;
  MassEstimate annulus_mass(const Annulus& a) const;

 private:
  MeasureEstimate() = default;
  std::size_t count_open_arc(double center, double radius) const;
  MassEstimate from_count(std::size_t count) const;

  bool analytic_ = true;
  std::vector<double> samples_;
  MeasureProvenance provenance_;
};

struct StationaryOptions {
  std::uint32_t burn_in = 1000;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::size_t chains = 256;  // independent orbits; samples split evenly
  std::uint32_t thin = 4;    // steps between recorded points of one chain
  bool force_empirical = false;
  unsigned workers = 1;
};

// Lebesgue-stationary families return the analytic estimate unless
// force_empirical is set; others are sampled along independent orbits.
MeasureEstimate estimate_stationary(const RandomSystem& system, const StationaryOptions& opt);

struct KsResult {
  double statistic = 0;
  double p_value = 1;
  bool pass = true;  // p_value >= alpha
};

// One-sample KS statistic of `samples` against the uniform law on [0,1).
double ks_uniform_statistic(std::span<const double> samples);
// Two-sample KS statistic.
double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b);
// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

KsResult ks_uniform_test(std::span<const double> samples, double alpha);
KsResult ks_two_sample_test(std::span<const double> a, std::span<const double> b,
                            double alpha);

// Pushes every empirical sample one random step forward (fresh stream per
// sample) and compares with the original by a two-sample KS test.
KsResult stationarity_check(const RandomSystem& system, const MeasureEstimate& est,
                            std::uint64_t seed, double alpha = 1e-3, unsigned workers = 1);

struct DimensionEstimate {
  CirclePoint point;
  std::vector<double> radii;
  std::vector<double> masses;
  double slope = 0;
  double lower_dim = 0;
  double upper_dim = 0;
};

// Radii strictly decreasing, at least three. Throws ZeroMass, InsufficientData.
DimensionEstimate pointwise_dimension(const MeasureEstimate& est, CirclePoint y,
                                      std::span<const double> radii);

struct AnnulusCell {
  double r = 0;
  double rho = 0;
  double mass = 0;
  double bound = 0;
  double ratio = 0;
  double margin = 0;  // 3 sigma for empirical estimates
  bool pass = true;
};

struct AnnulusReport {
  CirclePoint point;
  double a = 0;
  double b = 0;
  std::vector<AnnulusCell> cells;
  double worst_ratio = 0;
  bool pass = true;
};

// Every rho in rho_grid is paired with every r in r_grid; cells with
// rho >= r are skipped.
AnnulusReport annulus_check(const MeasureEstimate& est, CirclePoint y, double a, double b,
                            std::span<const double> r_grid, std::span<const double> rho_grid);

}  // namespace hitstat
