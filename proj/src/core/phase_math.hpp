// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_PHASE_MATH_HPP
#define TIMEBIN_CORE_PHASE_MATH_HPP

#include <cmath>
#include <numbers>

namespace timebin {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double x) {
  double w = std::remainder(x, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// Reduce an angle to [0, 2*pi).
inline double mod_two_pi(double x) {
  double m = std::fmod(x, kTwoPi);
  if (m < 0.0) m += kTwoPi;
  if (m >= kTwoPi) m = 0.0;
  return m;
}

/// Distance between two angles on the circle, in [0, pi].
inline double circular_distance(double a, double b) {
  return std::abs(wrap_angle(a - b));
}

}  // namespace timebin

#endif
