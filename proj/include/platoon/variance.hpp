#pragma once

// Steady-state variance kernel f(s1, s2) and the marginal deviations sigma_i.

#include <cstddef>
#include <functional>
#include <vector>

#include "platoon/graph.hpp"

namespace platoon {

struct KernelEval {
  double value = 0.0;
  double est_error = 0.0;   // absolute quadrature error estimate
  double tail_bound = 0.0;  // width of the analytic bracket on the truncated tail
};

/// f(s1, s2) = integral over the real line of
///   1 / ((s1 s2 - r^2 cos r)^2 + r^2 (s1 - r sin r)^2).
/// Requires (s1, s2) inside S with margin above kBoundaryTolerance; throws
/// OutsideStabilityRegion otherwise. Results are memoized on (s1, s2) rounded
/// to 1e-12.
KernelEval f_kernel(double s1, double s2);

/// Same as f_kernel but bypasses the memo table.
KernelEval f_kernel_uncached(double s1, double s2);

/// Integrand of f at r.
double kernel_integrand(double s1, double s2, double r);

std::size_t kernel_cache_size();
void kernel_cache_clear();

struct MarginalDeviations {
  std::vector<double> sigma;  // n-1 entries, pair i is (vehicle i+1) - (vehicle i)
  double g = 0.0;
  double tau = 0.0;
  double beta = 0.0;
};

/// sigma_i^2 = g^2 tau^3/(2 pi) sum_{j>=2} w_ij f(lambda_j tau, beta tau) with
/// w_ij = ((e_{i+1} - e_i)^T q_j)^2. For tau == 0 the undelayed closed form
/// sigma_i^2 = g^2 sum_j w_ij / (2 beta lambda_j^2) is used.
/// Throws UnstablePlatoon if some mode lies outside S.
MarginalDeviations sigma_vector(const Spectrum& s, double g, double tau, double beta);

/// Same sum with a caller-supplied kernel (used by the rational surrogate).
MarginalDeviations sigma_vector_with(const Spectrum& s, double g, double tau, double beta,
                                     const std::function<double(double, double)>& kernel);

struct RegionMinimum {
  double value = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
};

/// Minimizes objective(s1, s2) over the interior of S: a grid in
/// s1 = 0.05..1.55 (step 0.025) with 20 s2 levels per column, followed by
/// Nelder-Mead from the best grid point down to a 1e-6 simplex.
RegionMinimum minimize_over_region(const std::function<double(double, double)>& objective);

/// Global minimum of f over S and its minimizer; computed once per process.
const RegionMinimum& f_min();

/// sqrt(f_min / pi) |g| tau^{3/2}: lower bound on every sigma_i.
double sigma_star(double g, double tau);

}  // namespace platoon
