#include "platoon/approx.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "platoon/error.hpp"
#include "platoon/quadrature.hpp"
#include "platoon/stability.hpp"

namespace platoon {

namespace {

constexpr double kSlack = 1e-12;

// Numerator terms of each basis function after multiplying by s1^2 (s1 - s*);
// times_pole marks a coefficient of -s* instead of 1.
struct Term {
  int power;
  bool times_pole;
};
const std::array<std::vector<Term>, kBasisSize> kNumerator = {{
    {{3, false}, {2, true}},
    {{4, false}, {3, true}},
    {{2, false}, {1, true}},
    {{5, false}, {4, true}},
    {{1, false}, {0, true}},
    {{6, false}, {5, true}},
    {{2, false}},
    {{7, false}, {6, true}},
}};

double poly(const double* c, int size, double x) {
  double acc = 0.0;
  for (int k = size - 1; k >= 0; --k) acc = acc * x + c[k];
  return acc;
}

void fill_split(RationalFit& fit) {
  // q/(s1^2 (s1 - s*)) = A/s1^2 + B/(s1 - s*) with B = q/s*^2 and
  // A = -q (s1 + s*)/s*^2.
  const double p = fit.s_star;
  const double p2 = p * p;
  fit.a_coeffs.fill(0.0);
  fit.b_coeffs.fill(0.0);
  for (int k = 0; k < 5; ++k) {
    const double q = fit.alpha[static_cast<std::size_t>(k)];
    fit.b_coeffs[static_cast<std::size_t>(k)] = q / p2;
    fit.a_coeffs[static_cast<std::size_t>(k)] -= q * p / p2;
    fit.a_coeffs[static_cast<std::size_t>(k + 1)] -= q / p2;
  }
}

void check_s2(double s2) {
  if (!(s2 >= kWindowS2Min - kSlack && s2 <= kWindowS2Max + kSlack)) {
    throw Error(Errc::OutOfDomain, "s2 must lie in [0.1, 0.9], got " + std::to_string(s2));
  }
}

}  // namespace

double s_star(double s2) {
  check_s2(s2);
  return theta(s2);
}

std::array<double, kBasisSize> basis_values(double s1, double pole) {
  return {1.0, s1, 1.0 / s1, s1 * s1, 1.0 / (s1 * s1), s1 * s1 * s1, 1.0 / (s1 - pole),
          s1 * s1 * s1 * s1};
}

double RationalFit::evaluate(double s1) const {
  return poly(a_coeffs.data(), 6, s1) / (s1 * s1) + poly(b_coeffs.data(), 5, s1) / (s1 - s_star);
}

double RationalFit::evaluate_full(double s1) const {
  return poly(alpha.data(), 8, s1) / (s1 * s1 * (s1 - s_star));
}

double RationalFit::evaluate_unsplit(double s1) const {
  return poly(alpha.data(), 5, s1) / (s1 * s1 * (s1 - s_star));
}

double RationalFit::psi(int k, double s1) const {
  const auto phi = basis_values(s1, s_star);
  double acc = 0.0;
  for (int l = 0; l < kBasisSize; ++l) acc += to_orthonormal(l, k) * phi[static_cast<std::size_t>(l)];
  return acc;
}

RationalFit fit_rational(double s2) {
  check_s2(s2);
  RationalFit fit;
  fit.s2 = s2;
  fit.cot_root = inverse_x_cot(s2);
  fit.s_star = fit.cot_root * std::sin(fit.cot_root);
  fit.window_hi = fit.s_star - kWindowPoleGap;

  const GaussRule rule = gauss_legendre(kFitNodes, kWindowS1Min, fit.window_hi);
  Eigen::Matrix<double, kFitNodes, kBasisSize> m;
  Eigen::Matrix<double, kFitNodes, 1> rhs;
  for (int i = 0; i < kFitNodes; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double sw = std::sqrt(rule.weights[idx]);
    const auto phi = basis_values(rule.nodes[idx], fit.s_star);
    for (int l = 0; l < kBasisSize; ++l) m(i, l) = sw * phi[static_cast<std::size_t>(l)];
    rhs(i) = sw * f_kernel(rule.nodes[idx], s2).value;
  }

  // Modified Gram-Schmidt, two passes per column.
  Eigen::Matrix<double, kFitNodes, kBasisSize> q = m;
  Eigen::Matrix<double, kBasisSize, kBasisSize> r = Eigen::Matrix<double, kBasisSize, kBasisSize>::Zero();
  for (int k = 0; k < kBasisSize; ++k) {
    const double original = q.col(k).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        const double proj = q.col(j).dot(q.col(k));
        q.col(k) -= proj * q.col(j);
        r(j, k) += proj;
      }
    }
    r(k, k) = q.col(k).norm();
    if (!(r(k, k) > 1e-13 * original)) {
      throw Error(Errc::IllConditionedBasis,
                  "basis function " + std::to_string(k) + " is numerically dependent at s2=" +
                      std::to_string(s2));
    }
    q.col(k) /= r(k, k);
  }

  const Eigen::Matrix<double, kBasisSize, 1> w = q.transpose() * rhs;
  fit.to_orthonormal = r.triangularView<Eigen::Upper>().solve(
      Eigen::Matrix<double, kBasisSize, kBasisSize>::Identity());
  const Eigen::Matrix<double, kBasisSize, 1> coeffs = fit.to_orthonormal * w;
  for (int k = 0; k < kBasisSize; ++k) fit.weights[static_cast<std::size_t>(k)] = w(k);

  fit.alpha.fill(0.0);
  for (int l = 0; l < kBasisSize; ++l) {
    for (const Term& t : kNumerator[static_cast<std::size_t>(l)]) {
      fit.alpha[static_cast<std::size_t>(t.power)] += coeffs(l) * (t.times_pole ? -fit.s_star : 1.0);
    }
  }
  fill_split(fit);
  return fit;
}

bool in_window(double s1, double s2) {
  if (!(s2 >= kWindowS2Min - kSlack && s2 <= kWindowS2Max + kSlack)) return false;
  return s1 >= kWindowS1Min - kSlack && s1 <= theta(s2) - kWindowPoleGap + kSlack;
}

const std::vector<RationalFit>& surrogate_table() {
  static std::once_flag once;
  static std::vector<RationalFit> table;
  std::call_once(once, [] {
    for (int k = 10; k < 85; ++k) table.push_back(fit_rational(k / 100.0));
    for (int k = 0; k <= 20; ++k) table.push_back(fit_rational(0.85 + 0.0025 * k));
  });
  return table;
}

double f_tilde(double s1, double s2) {
  if (!in_window(s1, s2)) {
    throw Error(Errc::OutsideWindow, "(" + std::to_string(s1) + ", " + std::to_string(s2) +
                                         ") is outside the approximation window");
  }
  const auto& table = surrogate_table();
  const double s = std::clamp(s2, kWindowS2Min, kWindowS2Max);
  auto hi = std::lower_bound(table.begin(), table.end(), s,
                             [](const RationalFit& f, double v) { return f.s2 < v; });
  if (hi == table.begin()) ++hi;
  if (hi == table.end()) --hi;
  const auto lo = hi - 1;
  const double t = (s - lo->s2) / (hi->s2 - lo->s2);
  std::array<double, 5> q{};
  for (std::size_t k = 0; k < 5; ++k) {
    q[k] = ((1.0 - t) * lo->s2 * lo->alpha[k] + t * hi->s2 * hi->alpha[k]) / s;
  }
  return poly(q.data(), 5, s1) / (s1 * s1 * (s1 - theta(s)));
}

std::array<double, 8> averaged_alphas() {
  std::array<double, 8> mean{};
  int count = 0;
  for (const auto& fit : surrogate_table()) {
    const double hundredths = fit.s2 * 100.0;
    if (std::abs(hundredths - std::round(hundredths)) > 1e-9) continue;
    for (std::size_t k = 0; k < 8; ++k) mean[k] += fit.alpha[k];
    ++count;
  }
  for (auto& v : mean) v /= count;
  return mean;
}

MarginalDeviations sigma_tilde(const Spectrum& s, double g, double tau, double beta) {
  std::string offending;
  for (int j = 1; j < s.size(); ++j) {
    if (!in_window(s.lambda(j) * tau, beta * tau)) {
      offending += (offending.empty() ? "" : ", ") + std::to_string(j + 1);
    }
  }
  if (!offending.empty()) {
    throw Error(Errc::OutsideWindow, "modes outside the approximation window: " + offending);
  }
  return sigma_vector_with(s, g, tau, beta, f_tilde);
}

ErrorScan error_scan(int m1, int m2) {
  if (m1 < 10 || m2 < 10) throw Error(Errc::InvalidParameter, "error scan needs m1, m2 >= 10");
  ErrorScan scan;
  for (int j = 0; j < m2; ++j) {
    const double s2 = kWindowS2Min + (kWindowS2Max - kWindowS2Min) * j / (m2 - 1);
    const double top = theta(s2) - kWindowPoleGap;
    for (int i = 0; i < m1; ++i) {
      const double s1 = kWindowS1Min + (top - kWindowS1Min) * i / (m1 - 1);
      const double exact = f_kernel(s1, s2).value;
      const double approx = f_tilde(s1, s2);
      const double eta = std::abs(1.0 - approx / exact);
      scan.samples.push_back({s1, s2, exact, approx, eta});
      if (eta > scan.max_eta) {
        scan.max_eta = eta;
        scan.argmax_s1 = s1;
        scan.argmax_s2 = s2;
      }
    }
  }
  return scan;
}

}  // namespace platoon
