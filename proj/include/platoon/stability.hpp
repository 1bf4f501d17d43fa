#pragma once

// Delay stability of the platoon: membership of (lambda_i tau, beta tau) in the
// region S = {s1 in (0, pi/2), 0 < s2 < a/tan(a), a sin(a) = s1}.

#include <utility>
#include <vector>

#include "platoon/graph.hpp"

namespace platoon {

/// Pairs closer than this to the boundary of S are treated as outside.
inline constexpr double kBoundaryTolerance = 1e-9;

/// Unique a in (0, pi/2) with a sin(a) = s1. Throws OutOfDomain outside (0, pi/2).
double solve_a(double s1);

/// Upper edge a/tan(a) of S above s1 (in (0, 1)). Throws OutOfDomain.
double region_upper_edge(double s1);

/// Strict membership in S, with the kBoundaryTolerance band counted as outside.
bool in_region_S(double s1, double s2);

/// Signed distance in s2 from the nearest edge of S (negative when outside).
double region_margin(double s1, double s2);

/// Unique x in (0, pi/2) with x cot(x) = s2, s2 in (0, 1).
double inverse_x_cot(double s2);

/// theta(s2) = x sin(x) with x cot(x) = s2: the largest admissible lambda*tau
/// for a given beta*tau. Throws OutOfDomain outside (0, 1).
double theta(double s2);

struct ModeCheck {
  int mode = 0;  // 1-based eigenvalue index, 2..n
  double s1 = 0.0;
  double s2 = 0.0;
  bool in_s = false;
  bool marginal = false;  // within kBoundaryTolerance of an edge
  double margin = 0.0;
};

struct StabilityVerdict {
  bool stable = false;
  std::vector<ModeCheck> modes;
};

/// tau == 0 is the undelayed branch: stable for every beta > 0.
StabilityVerdict platoon_stable(const Spectrum& s, double beta, double tau);

/// n(n-1) tau / theta(beta tau); a strict lower bound on the effective
/// resistance of any stable platoon. Requires tau > 0 and beta tau in (0, 1).
double resistance_lower_bound(int n, double beta, double tau);

/// m points (a sin a, a/tan a) on the upper boundary of S, a uniform in (0, pi/2).
std::vector<std::pair<double, double>> region_boundary_samples(int m);

}  // namespace platoon
