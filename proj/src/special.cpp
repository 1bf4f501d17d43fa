#include "platoon/special.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "platoon/error.hpp"

namespace platoon {

namespace {

// Giles' single-precision approximation, used only as the Newton starting point.
double erf_inv_guess(double y) {
  double w = -std::log((1.0 - y) * (1.0 + y));
  double p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  return p * y;
}

}  // namespace

double erfc_inv(double z) {
  if (!(z > 0.0 && z < 2.0)) {
    throw Error(Errc::OutOfDomain, "erfc_inv needs z in (0, 2), got " + std::to_string(z));
  }
  if (z > 1.0) return -erfc_inv(2.0 - z);
  if (z == 1.0) return 0.0;

  // Newton on log(erfc(x)) - log(z), which stays well scaled deep in the tail.
  // erfc is decreasing; keep a bracket so Newton can fall back to bisection.
  double lo = 0.0;
  double hi = 27.0;
  double x = 1.0 - z < 1.0 ? erf_inv_guess(1.0 - z) : std::sqrt(-std::log(z));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  const double scale = 2.0 / std::sqrt(std::numbers::pi);
  const double target = std::log(z);
  for (int it = 0; it < 200; ++it) {
    const double e = std::erfc(x);
    const double r = std::log(e) - target;
    if (r == 0.0) break;
    if (r > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double slope = -scale * std::exp(-x * x) / e;
    double next = x - r / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2e-16 * std::abs(x) || hi - lo <= 2e-16 * hi) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double erf_inv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    throw Error(Errc::OutOfDomain, "erf_inv needs y in (-1, 1), got " + std::to_string(y));
  }
  if (std::abs(y) >= 0.5) return erfc_inv(1.0 - y);
  if (y == 0.0) return 0.0;
  const double scale = 2.0 / std::sqrt(std::numbers::pi);
  double x = erf_inv_guess(y);
  for (int it = 0; it < 20; ++it) {
    const double step = (std::erf(x) - y) / (scale * std::exp(-x * x));
    x -= step;
    if (std::abs(step) <= 2e-16 * std::abs(x)) break;
  }
  return x;
}

double kappa(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw Error(Errc::OutOfDomain, "kappa needs eps in (0, 1/2), got " + std::to_string(eps));
  }
  return erfc_inv(2.0 * eps);
}

}  // namespace platoon
