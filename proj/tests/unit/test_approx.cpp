#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "platoon/approx.hpp"
#include "platoon/error.hpp"
#include "platoon/graph.hpp"
#include "platoon/quadrature.hpp"
#include "platoon/stability.hpp"
#include "platoon/variance.hpp"

using namespace platoon;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidParameter;
}

}  // namespace

TEST_CASE("pole location solves x cot x = s2 and decreases in s2") {
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 10; k <= 90; k += 5) {
    const double s2 = k / 100.0;
    const auto fit = fit_rational(s2);
    CHECK(std::abs(fit.cot_root / std::tan(fit.cot_root) - s2) <= 1e-13);
    CHECK(fit.s_star == doctest::Approx(fit.cot_root * std::sin(fit.cot_root)).epsilon(1e-15));
    CHECK(s_star(s2) == doctest::Approx(fit.s_star).epsilon(1e-15));
    CHECK(fit.window_hi == doctest::Approx(fit.s_star - 0.05));
    CHECK(fit.s_star < prev);
    prev = fit.s_star;
  }
  CHECK(code_of([] { s_star(0.05); }) == Errc::OutOfDomain);
  CHECK(code_of([] { fit_rational(0.95); }) == Errc::OutOfDomain);
}

TEST_CASE("averaged coefficients are close to the published constants") {
  const auto alpha = averaged_alphas();
  CHECK(alpha[2] == doctest::Approx(-0.0742).epsilon(0.15));
  CHECK(alpha[3] == doctest::Approx(0.0198).epsilon(0.15));
  CHECK(alpha[4] == doctest::Approx(-0.0036).epsilon(0.15));
}

TEST_CASE("dropped coefficients are small") {
  const auto fit = fit_rational(0.5);
  CHECK(std::abs(fit.alpha[5]) < 5e-3);
  CHECK(std::abs(fit.alpha[6]) < 5e-4);
  CHECK(std::abs(fit.alpha[7]) < 5e-5);
}

TEST_CASE("split form A/s1^2 + B/(s1 - s*) equals the unsplit rational") {
  for (double s2 : {0.1, 0.37, 0.9}) {
    const auto fit = fit_rational(s2);
    for (int k = 0; k <= 10; ++k) {
      const double s1 = 0.1 + (fit.window_hi - 0.1) * k / 10.0;
      const double a = fit.evaluate(s1);
      const double b = fit.evaluate_unsplit(s1);
      CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));
    }
  }
}

TEST_CASE("orthonormalized basis is orthonormal under the window inner product") {
  for (double s2 : {0.15, 0.5, 0.85}) {
    const auto fit = fit_rational(s2);
    const auto rule = gauss_legendre(200, 0.1, fit.window_hi);
    for (int k = 0; k < kBasisSize; ++k) {
      for (int l = 0; l <= k; ++l) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
          acc += rule.weights[i] * fit.psi(k, rule.nodes[i]) * fit.psi(l, rule.nodes[i]);
        }
        CHECK(std::abs(acc - (k == l ? 1.0 : 0.0)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("projection residual is orthogonal to every basis function") {
  const double s2 = 0.42;
  const auto fit = fit_rational(s2);
  const auto rule = gauss_legendre(kFitNodes, 0.1, fit.window_hi);
  double norm = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    norm += rule.weights[i] * std::pow(f_kernel(rule.nodes[i], s2).value, 2);
  }
  for (int k = 0; k < kBasisSize; ++k) {
    double inner = 0.0;
    double weight = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = rule.nodes[i];
      const double residual = f_kernel(x, s2).value - fit.evaluate_full(x);
      inner += rule.weights[i] * residual * fit.psi(k, x);
      weight += rule.weights[i] * f_kernel(x, s2).value * fit.psi(k, x);
    }
    CHECK(std::abs(inner) <= 1e-7 * std::sqrt(norm));
    CHECK(weight == doctest::Approx(fit.weights[static_cast<std::size_t>(k)]).epsilon(1e-9));
  }
}

TEST_CASE("surrogate is positive and accurate on the window") {
  const auto scan = error_scan(30, 20);
  CHECK(scan.samples.size() == 600);
  CHECK(scan.max_eta <= 1e-3);
  for (const auto& s : scan.samples) CHECK(s.f_tilde > 0.0);
  const auto fine = error_scan(45, 35);
  CHECK(fine.max_eta <= 1e-3);
  CHECK(fine.max_eta >= 0.2 * scan.max_eta);
  CHECK(code_of([] { error_scan(5, 20); }) == Errc::InvalidParameter);
}

TEST_CASE("surrogate minimizer agrees with the kernel minimizer") {
  const auto m = minimize_over_region([](double s1, double s2) {
    return in_window(s1, s2) ? f_tilde(s1, s2) : std::numeric_limits<double>::infinity();
  });
  CHECK(std::abs(m.s1 - 1.111) <= 0.02);
  CHECK(std::abs(m.s2 - 0.220) <= 0.02);
  CHECK(m.value == doctest::Approx(f_min().value).epsilon(1e-3));
}

TEST_CASE("surrogate deviations track the exact ones") {
  const auto s = spectrum(make_complete(5, 2.222));
  const auto exact = sigma_vector(s, 2.78, 0.1, 2.2);
  const auto approx = sigma_tilde(s, 2.78, 0.1, 2.2);
  for (std::size_t i = 0; i < exact.sigma.size(); ++i) {
    CHECK(std::abs(approx.sigma[i] / exact.sigma[i] - 1.0) <= 1e-3);
  }
  const auto p = spectrum(make_path(6, 1.0));
  std::string message;
  try {
    sigma_tilde(p, 1.0, 0.3, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OutsideWindow);
    message = e.what();
  }
  CHECK(message.find("2") != std::string::npos);
  CHECK(code_of([] { f_tilde(0.05, 0.5); }) == Errc::OutsideWindow);
  CHECK(code_of([] { f_tilde(0.5, 0.95); }) == Errc::OutsideWindow);
  CHECK_FALSE(in_window(s_star(0.3) - 0.01, 0.3));
}
