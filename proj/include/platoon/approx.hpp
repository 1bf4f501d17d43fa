#pragma once

// Rational surrogate of the variance kernel on the window
// [0.1, s*(s2) - 0.05] x [0.1, 0.9], fitted by least squares against a fixed
// function basis orthonormalized with modified Gram-Schmidt.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "platoon/graph.hpp"
#include "platoon/variance.hpp"

namespace platoon {

inline constexpr double kWindowS1Min = 0.1;
inline constexpr double kWindowPoleGap = 0.05;
inline constexpr double kWindowS2Min = 0.1;
inline constexpr double kWindowS2Max = 0.9;
inline constexpr int kBasisSize = 8;
inline constexpr int kFitNodes = 64;

/// Pole of f(., s2): theta(s2) = x sin(x) where x cot(x) = s2. Requires
/// s2 in [0.1, 0.9], else OutOfDomain.
double s_star(double s2);

/// Raw basis {1, s1, 1/s1, s1^2, 1/s1^2, s1^3, 1/(s1 - s*), s1^4} at s1.
std::array<double, kBasisSize> basis_values(double s1, double pole);

struct RationalFit {
  double s2 = 0.0;
  double s_star = 0.0;    // pole location
  double cot_root = 0.0;  // x with x cot(x) = s2
  double window_hi = 0.0; // s_star - 0.05
  std::array<double, 8> alpha{};     // numerator over s1^2 (s1 - s*), s1^0..s1^7
  std::array<double, 6> a_coeffs{};  // A, ascending powers
  std::array<double, 5> b_coeffs{};  // B, ascending powers
  std::array<double, kBasisSize> weights{};  // <f, psi_k>
  /// psi_k = sum_l to_orthonormal(l, k) phi_l.
  Eigen::Matrix<double, kBasisSize, kBasisSize> to_orthonormal;

  /// A(s1)/s1^2 + B(s1)/(s1 - s*).
  double evaluate(double s1) const;
  /// Full projection before alpha_5..alpha_7 are dropped.
  double evaluate_full(double s1) const;
  /// q(s1)/(s1^2 (s1 - s*)) with q = alpha_0 + ... + alpha_4 s1^4.
  double evaluate_unsplit(double s1) const;
  /// psi_k(s1).
  double psi(int k, double s1) const;
};

/// Throws IllConditionedBasis if the orthonormalization loses rank.
RationalFit fit_rational(double s2);

/// True if (s1, s2) lies in [0.1, s*(s2) - 0.05] x [0.1, 0.9].
bool in_window(double s1, double s2);

/// Surrogate on the window. Fits are computed once on an s2 grid (step 0.01,
/// refined to 0.0025 above 0.85); s2 * alpha_k is interpolated linearly while
/// the pole s*(s2) is evaluated exactly. Throws OutsideWindow.
double f_tilde(double s1, double s2);

/// Grid fits backing f_tilde, ascending in s2.
const std::vector<RationalFit>& surrogate_table();

/// alpha_k averaged over the fits at s2 = 0.10, 0.11, ..., 0.90.
std::array<double, 8> averaged_alphas();

/// sigma_vector with f_tilde in place of f. Throws OutsideWindow naming the
/// offending mode indices (1-based).
MarginalDeviations sigma_tilde(const Spectrum& s, double g, double tau, double beta);

struct ErrorSample {
  double s1, s2, f_exact, f_tilde, eta;
};

struct ErrorScan {
  std::vector<ErrorSample> samples;
  double max_eta = 0.0;
  double argmax_s1 = 0.0;
  double argmax_s2 = 0.0;
};

/// eta = |1 - f_tilde / f| on an m1 x m2 grid over the window (s1 spans
/// [0.1, s* - 0.05] for each s2). Requires m1, m2 >= 10.
ErrorScan error_scan(int m1, int m2);

}  // namespace platoon
