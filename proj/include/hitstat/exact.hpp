#pragma once

// Exact points p/q of the circle for integer-slope maps. Binary floating point
// loses one bit per doubling, so x -> 2x mod 1 on doubles reaches 0 after ~53
// steps. With q coprime to the multipliers the map p -> m p mod q is a
// bijection of Z/qZ and orbits never degenerate.

#include <cstdint>
#include <string>

#include "hitstat/random.hpp"
#include "hitstat/torus.hpp"

namespace hitstat {

// Bit length of random denominators. 2^120 * 256 < 2^128, so multipliers up
// to 256 never overflow the product.
inline constexpr int kExactDenominatorBits = 120;
inline constexpr std::uint32_t kMaxExactMultiplier = 256;

class ExactCirclePoint {
 public:
  // Requires 0 <= numerator < denominator < 2^120. Denominators generated
  // below are coprime to 6; hand-built points such as 1/3 may not be.
  ExactCirclePoint(u128 numerator, u128 denominator);

  // Random denominator of kExactDenominatorBits bits coprime to 6 and to
  // `multiplier`, numerator uniform in [0, q).
  static ExactCirclePoint random(Rng& rng, std::uint32_t multiplier = 6);

  // Point with a fresh random denominator whose value rounds to x (error
  // below 1e-17).
  static ExactCirclePoint near(double x, Rng& rng, std::uint32_t multiplier = 6);

  // Uniform over the lattice points of the open arc B(center, radius).
  static ExactCirclePoint uniform_in_ball(const Ball& ball, Rng& rng,
                                          std::uint32_t multiplier = 6);

  u128 numerator() const { return num_; }
  u128 denominator() const { return den_; }

  double to_double() const {
    return wrap_unit(static_cast<double>(num_) / static_cast<double>(den_));
  }
  CirclePoint to_circle() const { return CirclePoint(to_double()); }

  // x -> m x mod 1, exact. m <= kMaxExactMultiplier.
  void multiply(std::uint32_t m) {
    if (m == 2) {
      num_ <<= 1;
      if (num_ >= den_) num_ -= den_;
    } else if (m == 3) {
      num_ *= 3;
      if (num_ >= den_) num_ -= den_;
      if (num_ >= den_) num_ -= den_;
    } else {
      num_ = (num_ * m) % den_;
    }
  }

  friend bool operator==(const ExactCirclePoint&, const ExactCirclePoint&) = default;

 private:
  u128 num_;
  u128 den_;
};

u128 gcd_u128(u128 a, u128 b);
std::string to_string(u128 v);

}  // namespace hitstat
