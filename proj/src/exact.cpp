#include "hitstat/exact.hpp"

#include <algorithm>

namespace hitstat {

namespace {

u128 random_denominator(Rng& rng, std::uint32_t multiplier) {
  const u128 top = u128{1} << (kExactDenominatorBits - 1);
  const u128 mask = (u128{1} << kExactDenominatorBits) - 1;
  for (;;) {
    u128 q = (rng.next_u128() & mask) | top | 1;
    if (q % 3 == 0) continue;
    if (multiplier > 1 && gcd_u128(q, multiplier) != 1) continue;
    return q;
  }
}

// floor(x * q) for x in [0,1), accurate to ~2^-53 relative.
u128 scale_unit(double x, u128 q) {
  const u128 hi = q >> 64;
  const u128 lo = q & ~std::uint64_t{0};
  long double xl = x;
  u128 a = static_cast<u128>(xl * static_cast<long double>(hi)) << 64;
  u128 b = static_cast<u128>(xl * static_cast<long double>(lo));
  u128 s = a + b;
  return s >= q ? q - 1 : s;
}

}  // namespace

u128 gcd_u128(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

ExactCirclePoint::ExactCirclePoint(u128 numerator, u128 denominator)
    : num_(numerator), den_(denominator) {
  if (den_ == 0 || num_ >= den_) {
    throw InvalidArgument("exact point requires 0 <= numerator < denominator");
  }
  if (den_ >> kExactDenominatorBits != 0) {
    throw InvalidArgument("exact point denominator too large");
  }
}

ExactCirclePoint ExactCirclePoint::random(Rng& rng, std::uint32_t multiplier) {
  u128 q = random_denominator(rng, multiplier);
  return ExactCirclePoint(rng.uniform_below(q), q);
}

ExactCirclePoint ExactCirclePoint::near(double x, Rng& rng, std::uint32_t multiplier) {
  u128 q = random_denominator(rng, multiplier);
  return ExactCirclePoint(scale_unit(wrap_unit(x), q), q);
}

ExactCirclePoint ExactCirclePoint::uniform_in_ball(const Ball& ball, Rng& rng,
                                                   std::uint32_t multiplier) {
  u128 q = random_denominator(rng, multiplier);
  const double left = wrap_unit(ball.center().value() - ball.radius());
  const u128 lo = scale_unit(left, q);
  const u128 width = scale_unit(2.0 * ball.radius(), q);
  // Lattice points near the arc ends may fall on the closed boundary after
  // rounding; resample those.
  for (;;) {
    u128 p = lo + rng.uniform_below(width);
    if (p >= q) p -= q;
    ExactCirclePoint candidate(p, q);
    if (in_ball(candidate.to_circle(), ball)) return candidate;
  }
}

}  // namespace hitstat
