#include "platoon/variance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "platoon/error.hpp"
#include "platoon/quadrature.hpp"
#include "platoon/stability.hpp"

namespace platoon {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kScanEnd = 4.0;  // beyond this D(r) >= (r^2 - s1 r - s1 s2)^2 has no near-zeros
constexpr double kQuadRelTol = 2e-10;
constexpr double kTailRelTol = 1e-10;

struct Denominator {
  double s1, s2;

  double operator()(double r) const {
    const double c = std::cos(r);
    const double s = std::sin(r);
    const double a = s1 * s2 - r * r * c;
    const double b = r * (s1 - r * s);
    return a * a + b * b;
  }

  double second_derivative(double r) const {
    const double c = std::cos(r);
    const double s = std::sin(r);
    const double a = s1 * s2 - r * r * c;
    const double a1 = -2.0 * r * c + r * r * s;
    const double a2 = -2.0 * c + 4.0 * r * s + r * r * c;
    const double b = s1 * r - r * r * s;
    const double b1 = s1 - 2.0 * r * s - r * r * c;
    const double b2 = -2.0 * s - 4.0 * r * c + r * r * s;
    return 2.0 * (a1 * a1 + a * a2 + b1 * b1 + b * b2);
  }
};

double golden_min(const Denominator& d, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = d(x1);
  double f2 = d(x2);
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = d(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = d(x2);
    }
  }
  return 0.5 * (lo + hi);
}

// Breakpoints clustered around each local minimum of the denominator, where the
// integrand has a resonance peak of width ~ sqrt(2 D / D'').
std::vector<double> peak_breakpoints(const Denominator& d) {
  std::vector<double> grid;
  for (int k = 0; k <= 140; ++k) grid.push_back(1e-8 * std::pow(10.0, k / 20.0));
  for (double r = 0.11; r <= kScanEnd; r += 0.01) grid.push_back(r);

  std::vector<double> vals(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) vals[k] = d(grid[k]);

  std::vector<double> breaks;
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    if (!(vals[k] < vals[k - 1] && vals[k] <= vals[k + 1])) continue;
    const double r = golden_min(d, grid[k - 1], grid[k + 1]);
    const double dmin = d(r);
    const double curv = d.second_derivative(r);
    const double width = curv > 0.0 ? std::sqrt(2.0 * dmin / curv) : 0.0;
    breaks.push_back(r);
    if (!(width > 0.0) || !std::isfinite(width)) continue;
    for (double m : {1.0, 4.0, 16.0, 64.0, 256.0}) {
      if (r - m * width > 0.0) breaks.push_back(r - m * width);
      breaks.push_back(r + m * width);
    }
  }
  return breaks;
}

struct KeyHash {
  std::size_t operator()(const std::pair<long long, long long>& k) const noexcept {
    return std::hash<long long>{}(k.first) * 1000003u ^ std::hash<long long>{}(k.second);
  }
};

std::shared_mutex cache_mutex;
std::unordered_map<std::pair<long long, long long>, KernelEval, KeyHash> cache;

std::pair<long long, long long> cache_key(double s1, double s2) {
  return {std::llround(s1 * 1e12), std::llround(s2 * 1e12)};
}

}  // namespace

double kernel_integrand(double s1, double s2, double r) { return 1.0 / Denominator{s1, s2}(r); }

KernelEval f_kernel_uncached(double s1, double s2) {
  if (!in_region_S(s1, s2)) {
    throw Error(Errc::OutsideStabilityRegion,
                "kernel undefined at (" + std::to_string(s1) + ", " + std::to_string(s2) + ")");
  }
  const Denominator den{s1, s2};
  const auto integrand = [&den](double r) { return 1.0 / den(r); };
  const std::vector<double> peaks = peak_breakpoints(den);

  double radius = 128.0 * kPi;
  for (int attempt = 0; attempt < 8; ++attempt, radius *= 2.0) {
    std::vector<double> breaks;
    const int panels = static_cast<int>(std::ceil(radius / (kPi / 4.0)));
    for (int k = 0; k <= panels; ++k) breaks.push_back(radius * k / panels);
    for (double b : peaks) {
      if (b < radius) breaks.push_back(b);
    }
    const auto half = integrate_adaptive(integrand, breaks, 0.0, kQuadRelTol);

    const double rho = (s1 * radius + s1 * s2) / (radius * radius);
    const double cube = 3.0 * radius * radius * radius;
    const double upper = 1.0 / ((1.0 - rho) * (1.0 - rho) * cube);
    const double lower = 1.0 / ((1.0 + rho) * (1.0 + rho) * cube);

    KernelEval out;
    out.value = 2.0 * (half.value + 0.5 * (upper + lower));
    out.est_error = 2.0 * half.error;
    out.tail_bound = upper - lower;
    if (out.tail_bound <= kTailRelTol * out.value) {
      if (out.est_error + out.tail_bound > 1e-8 * out.value) {
        throw Error(Errc::QuadratureFailure, "accuracy contract unmet");
      }
      return out;
    }
  }
  throw Error(Errc::QuadratureFailure, "tail truncation did not converge");
}

KernelEval f_kernel(double s1, double s2) {
  const auto key = cache_key(s1, s2);
  {
    std::shared_lock lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const KernelEval out = f_kernel_uncached(s1, s2);
  std::unique_lock lock(cache_mutex);
  cache.emplace(key, out);
  return out;
}

std::size_t kernel_cache_size() {
  std::shared_lock lock(cache_mutex);
  return cache.size();
}

void kernel_cache_clear() {
  std::unique_lock lock(cache_mutex);
  cache.clear();
}

namespace {

MarginalDeviations assemble(const Spectrum& s, double g, double tau, double beta,
                            const std::vector<double>& per_mode, double prefactor) {
  const Matrix w = pair_mode_weights(s);
  MarginalDeviations md;
  md.g = g;
  md.tau = tau;
  md.beta = beta;
  md.sigma.resize(static_cast<std::size_t>(s.size() - 1));
  for (int i = 0; i + 1 < s.size(); ++i) {
    double acc = 0.0;
    for (int j = 1; j < s.size(); ++j) acc += w(i, j) * per_mode[static_cast<std::size_t>(j)];
    md.sigma[static_cast<std::size_t>(i)] = std::sqrt(prefactor * acc);
  }
  return md;
}

void require_stable(const Spectrum& s, double beta, double tau) {
  const auto verdict = platoon_stable(s, beta, tau);
  if (verdict.stable) return;
  for (const auto& m : verdict.modes) {
    if (!m.in_s) {
      throw Error(Errc::UnstablePlatoon, "mode " + std::to_string(m.mode) + " at (" +
                                             std::to_string(m.s1) + ", " + std::to_string(m.s2) +
                                             ") lies outside the stability region");
    }
  }
}

}  // namespace

MarginalDeviations sigma_vector_with(const Spectrum& s, double g, double tau, double beta,
                                     const std::function<double(double, double)>& kernel) {
  if (!(tau > 0.0) || !std::isfinite(g)) {
    throw Error(Errc::InvalidParameter, "kernel form of sigma needs tau > 0 and finite g");
  }
  std::vector<double> per_mode(static_cast<std::size_t>(s.size()), 0.0);
  double rep = -1.0;
  double rep_value = 0.0;
  for (int j = 1; j < s.size(); ++j) {
    const double lam = s.lambda(j);
    if (rep < 0.0 || std::abs(lam - rep) > 1e-12 * rep) {
      rep = lam;
      rep_value = kernel(lam * tau, beta * tau);
    }
    per_mode[static_cast<std::size_t>(j)] = rep_value;
  }
  return assemble(s, g, tau, beta, per_mode, g * g * tau * tau * tau / (2.0 * kPi));
}

MarginalDeviations sigma_vector(const Spectrum& s, double g, double tau, double beta) {
  if (!std::isfinite(g)) throw Error(Errc::InvalidParameter, "noise gain must be finite");
  require_stable(s, beta, tau);
  if (tau == 0.0) {
    std::vector<double> per_mode(static_cast<std::size_t>(s.size()), 0.0);
    for (int j = 1; j < s.size(); ++j) {
      const double lam = s.lambda(j);
      per_mode[static_cast<std::size_t>(j)] = 1.0 / (lam * lam);
    }
    return assemble(s, g, tau, beta, per_mode, g * g / (2.0 * beta));
  }
  return sigma_vector_with(s, g, tau, beta,
                           [](double s1, double s2) { return f_kernel(s1, s2).value; });
}

RegionMinimum minimize_over_region(const std::function<double(double, double)>& objective) {
  const auto safe = [&objective](double s1, double s2) {
    if (!in_region_S(s1, s2)) return std::numeric_limits<double>::infinity();
    return objective(s1, s2);
  };

  RegionMinimum best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  double best_upper = 0.0;
  for (int k = 0; k <= 60; ++k) {
    const double s1 = 0.05 + 0.025 * k;
    const double upper = region_upper_edge(s1);
    for (int l = 1; l <= 20; ++l) {
      const double s2 = upper * l / 21.0;
      const double v = safe(s1, s2);
      if (v < best.value) {
        best = {v, s1, s2};
        best_upper = upper;
      }
    }
  }

  using Point = std::array<double, 2>;
  std::array<Point, 3> x = {Point{best.s1, best.s2}, Point{best.s1 + 0.0125, best.s2},
                            Point{best.s1, best.s2 + best_upper / 42.0}};
  std::array<double, 3> fx;
  for (int i = 0; i < 3; ++i) fx[i] = safe(x[i][0], x[i][1]);

  for (int it = 0; it < 5000; ++it) {
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&fx](int a, int b) { return fx[a] < fx[b]; });
    const Point lo = x[order[0]];
    const Point mid = x[order[1]];
    const Point hi = x[order[2]];
    const double flo = fx[order[0]];
    const double fmid = fx[order[1]];
    const double fhi = fx[order[2]];
    x = {lo, mid, hi};
    fx = {flo, fmid, fhi};

    double size = 0.0;
    for (int i = 1; i < 3; ++i) size = std::max(size, std::hypot(x[i][0] - lo[0], x[i][1] - lo[1]));
    if (size < 1e-6) break;

    const Point centroid = {0.5 * (lo[0] + mid[0]), 0.5 * (lo[1] + mid[1])};
    const auto along = [&](double t) {
      return Point{centroid[0] + t * (hi[0] - centroid[0]), centroid[1] + t * (hi[1] - centroid[1])};
    };
    const Point xr = along(-1.0);
    const double fr = safe(xr[0], xr[1]);
    if (fr < flo) {
      const Point xe = along(-2.0);
      const double fe = safe(xe[0], xe[1]);
      if (fe < fr) {
        x[2] = xe;
        fx[2] = fe;
      } else {
        x[2] = xr;
        fx[2] = fr;
      }
      continue;
    }
    if (fr < fmid) {
      x[2] = xr;
      fx[2] = fr;
      continue;
    }
    const Point xc = fr < fhi ? along(-0.5) : along(0.5);
    const double fc = safe(xc[0], xc[1]);
    if (fc < std::min(fr, fhi)) {
      x[2] = xc;
      fx[2] = fc;
      continue;
    }
    for (int i = 1; i < 3; ++i) {
      x[i] = {lo[0] + 0.5 * (x[i][0] - lo[0]), lo[1] + 0.5 * (x[i][1] - lo[1])};
      fx[i] = safe(x[i][0], x[i][1]);
    }
  }
  const int arg = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {fx[arg], x[arg][0], x[arg][1]};
}

const RegionMinimum& f_min() {
  static std::once_flag once;
  static RegionMinimum result;
  std::call_once(once, [] {
    result = minimize_over_region([](double s1, double s2) { return f_kernel(s1, s2).value; });
  });
  return result;
}

double sigma_star(double g, double tau) {
  if (!(tau >= 0.0)) throw Error(Errc::InvalidParameter, "sigma* needs tau >= 0");
  if (tau == 0.0) return 0.0;
  return std::sqrt(f_min().value / kPi) * std::abs(g) * std::pow(tau, 1.5);
}

}  // namespace platoon
