#pragma once

// Geometry of the circle T^1 = [0,1) with the arc-length metric.

#include <cmath>

#include "hitstat/errors.hpp"

namespace hitstat {

// Reduces any finite real to its representative in [0,1).
inline double wrap_unit(double v) {
  double w = v - std::floor(v);
  // v slightly below an integer can round up to exactly 1.
  return w >= 1.0 ? 0.0 : w;
}

class CirclePoint {
 public:
  constexpr CirclePoint() = default;
  explicit CirclePoint(double v) : value_(wrap_unit(v)) {}

  double value() const { return value_; }

  friend bool operator==(CirclePoint, CirclePoint) = default;

 private:
  double value_ = 0.0;
};

inline double circle_dist(CirclePoint x, CirclePoint y) {
  double d = std::fabs(x.value() - y.value());
  return d > 0.5 ? 1.0 - d : d;
}

// Open ball; radius lies in (0, 1/2) so the ball is a proper arc.
class Ball {
 public:
  Ball(CirclePoint center, double radius) : center_(center), radius_(radius) {
    if (!(radius > 0.0 && radius < 0.5)) {
      throw InvalidArgument("ball radius must lie in (0, 0.5)");
    }
  }
  Ball(double center, double radius) : Ball(CirclePoint(center), radius) {}

  CirclePoint center() const { return center_; }
  double radius() const { return radius_; }

 private:
  CirclePoint center_;
  double radius_;
};

inline bool in_ball(CirclePoint x, const Ball& b) {
  return circle_dist(x, b.center()) < b.radius();
}

// B(center, outer) minus B(center, inner). inner == 0 removes nothing.
class Annulus {
 public:
  Annulus(CirclePoint center, double outer, double inner)
      : center_(center), outer_(outer), inner_(inner) {
    if (!(outer > 0.0 && outer < 0.5)) {
      throw InvalidArgument("annulus outer radius must lie in (0, 0.5)");
    }
    if (!(inner >= 0.0 && inner < outer)) {
      throw InvalidArgument("annulus inner radius must lie in [0, outer)");
    }
  }

  CirclePoint center() const { return center_; }
  double outer() const { return outer_; }
  double inner() const { return inner_; }

  bool contains(CirclePoint x) const {
    double d = circle_dist(x, center_);
    return d < outer_ && !(d < inner_);
  }

 private:
  CirclePoint center_;
  double outer_;
  double inner_;
};

inline double lebesgue_ball_mass(const Ball& b) { return 2.0 * b.radius(); }

}  // namespace hitstat
