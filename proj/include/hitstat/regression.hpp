#pragma once

#include <algorithm>
#include <span>

#include "hitstat/errors.hpp"

namespace hitstat {

// Least-squares slope of y against x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InsufficientData("regression needs at least two points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InsufficientData("regression abscissae are all equal");
  return sxy / sxx;
}

struct SlopeRange {
  double full = 0;  // slope over every point
  double lower = 0;
  double upper = 0;
};

// Finite-data stand-in for liminf/limsup of y/x as x grows: min and max of
// the OLS slope over every suffix of length >= 3 (points ordered so the
// asymptotic end is last).
inline SlopeRange suffix_slopes(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 3) throw InsufficientData("need at least 3 points for a rate estimate");
  SlopeRange out;
  out.full = ols_slope(x, y);
  out.lower = out.upper = out.full;
  for (std::size_t start = 1; start + 3 <= x.size(); ++start) {
    const double s = ols_slope(x.subspan(start), y.subspan(start));
    out.lower = std::min(out.lower, s);
    out.upper = std::max(out.upper, s);
  }
  return out;
}

}  // namespace hitstat
