#include "platoon/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "platoon/error.hpp"
#include "roots.hpp"

namespace platoon {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double x_sin_x(double x) { return x * std::sin(x); }

double x_cot_x(double x) { return x == 0.0 ? 1.0 : x / std::tan(x); }

}  // namespace

double solve_a(double s1) {
  if (!(s1 > 0.0 && s1 < kHalfPi)) {
    throw Error(Errc::OutOfDomain, "a sin(a) = s1 needs s1 in (0, pi/2), got " + std::to_string(s1));
  }
  return detail::bisect(x_sin_x, s1, 0.0, kHalfPi);
}

double region_upper_edge(double s1) { return x_cot_x(solve_a(s1)); }

double region_margin(double s1, double s2) {
  if (!(s1 > 0.0)) return s1;
  if (!(s1 < kHalfPi)) return kHalfPi - s1;
  const double upper = region_upper_edge(s1);
  return std::min({s1, s2, upper - s2});
}

bool in_region_S(double s1, double s2) {
  if (!(s1 > 0.0 && s1 < kHalfPi) || !std::isfinite(s2)) return false;
  return region_margin(s1, s2) > kBoundaryTolerance;
}

double inverse_x_cot(double s2) {
  if (!(s2 > 0.0 && s2 < 1.0)) {
    throw Error(Errc::OutOfDomain, "x cot(x) = s2 needs s2 in (0, 1), got " + std::to_string(s2));
  }
  return detail::bisect(x_cot_x, s2, 0.0, kHalfPi);
}

double theta(double s2) { return x_sin_x(inverse_x_cot(s2)); }

StabilityVerdict platoon_stable(const Spectrum& s, double beta, double tau) {
  if (!(beta > 0.0) || !(tau >= 0.0) || !std::isfinite(beta) || !std::isfinite(tau)) {
    throw Error(Errc::InvalidParameter, "stability check needs beta > 0 and tau >= 0");
  }
  StabilityVerdict verdict{true, {}};
  for (int k = 1; k < s.size(); ++k) {
    ModeCheck m;
    m.mode = k + 1;
    m.s1 = s.lambda(k) * tau;
    m.s2 = beta * tau;
    if (tau == 0.0) {
      // Undelayed roots -lambda/2 +- sqrt(lambda^2 - 4 lambda beta)/2 lie in the left half plane.
      m.in_s = true;
      m.margin = std::numeric_limits<double>::infinity();
    } else {
      m.margin = region_margin(m.s1, m.s2);
      m.in_s = m.margin > kBoundaryTolerance;
      m.marginal = std::abs(m.margin) <= kBoundaryTolerance;
    }
    verdict.stable = verdict.stable && m.in_s;
    verdict.modes.push_back(m);
  }
  return verdict;
}

double resistance_lower_bound(int n, double beta, double tau) {
  const double s2 = beta * tau;
  if (!(tau > 0.0) || !(s2 > 0.0 && s2 < 1.0)) {
    throw Error(Errc::OutOfDomain,
                "resistance bound needs beta*tau in (0, 1), got " + std::to_string(s2));
  }
  return static_cast<double>(n) * (n - 1) * tau / theta(s2);
}

std::vector<std::pair<double, double>> region_boundary_samples(int m) {
  if (m < 2) throw Error(Errc::InvalidParameter, "boundary sampling needs m >= 2");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double a = kHalfPi * (k + 1) / (m + 1);
    out.emplace_back(x_sin_x(a), x_cot_x(a));
  }
  return out;
}

}  // namespace platoon
