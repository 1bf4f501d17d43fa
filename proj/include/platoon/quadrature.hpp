#pragma once

// Gauss-Kronrod and Gauss-Legendre rules.

#include <functional>
#include <vector>

namespace platoon {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // absolute, summed |K15 - G7| over panels
  int panels = 0;
};

/// Single 15-point Kronrod panel with its embedded 7-point Gauss estimate.
QuadratureResult gauss_kronrod15(const std::function<double(double)>& f, double a, double b);

/// Globally adaptive integration over [breaks.front(), breaks.back()].
/// The breakpoints seed the initial panels; the panel with the largest error
/// is bisected until error <= max(abs_tol, rel_tol * |value|).
/// Throws QuadratureFailure once max_panels is exceeded.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::vector<double> breaks, double abs_tol, double rel_tol,
                                    int max_panels = 20000);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b]; nodes by Newton on P_n.
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace platoon
