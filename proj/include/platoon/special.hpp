#pragma once

namespace platoon {

/// Inverse complementary error function on (0, 2), accurate to ~1e-15 relative
/// for z >= 1e-300.
double erfc_inv(double z);

/// Inverse error function on (-1, 1).
double erf_inv(double y);

/// kappa_eps = erf^{-1}(1 - 2 eps) for eps in (0, 1/2). Throws OutOfDomain.
double kappa(double eps);

}  // namespace platoon
