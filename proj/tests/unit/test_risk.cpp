#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "platoon/error.hpp"
#include "platoon/graph.hpp"
#include "platoon/risk.hpp"
#include "platoon/special.hpp"
#include "platoon/stability.hpp"
#include "platoon/variance.hpp"

using namespace platoon;

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

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

TEST_CASE("inverse error function round trips") {
  for (double y : {-0.999999, -0.9, -0.3, 1e-9, 0.5, 0.98, 0.999999999}) {
    const double x = erf_inv(y);
    CHECK(std::abs(std::erf(x) - y) <= 1e-13 * std::abs(y));
  }
  for (double z : {1e-300, 1e-20, 1e-5, 0.02, 0.1, 0.7, 1.0, 1.9}) {
    const double x = erfc_inv(z);
    // erfc has condition number 2 x^2 in the tail.
    CHECK(std::abs(std::erfc(x) - z) <= 1e-15 * std::max(1.0, 2.0 * x * x) * z);
  }
  CHECK(erf_inv(0.0) == 0.0);
  CHECK(code_of([] { kappa(0.0); }) == Errc::OutOfDomain);
  CHECK(code_of([] { kappa(0.5); }) == Errc::OutOfDomain);
}

TEST_CASE("threshold constants for unit spacing") {
  const auto c = EventSpec::collision(1.0, 1.0, 0.01);
  const auto d = EventSpec::detachment(1.0, 2.0, 1.0, 0.05);
  CHECK(std::abs(infinite_threshold(c) - 0.4299) <= 1e-4);
  CHECK(std::abs(infinite_threshold(d) - 0.6080) <= 1e-4);
  CHECK(std::abs(std::erf(kappa(0.01)) - 0.98) <= 1e-13);
}

TEST_CASE("collision risk branches") {
  const auto spec = EventSpec::collision(1.0, 1.5, 0.01);
  const double k = kappa(0.01);
  const double top = 1.0 / (k * kSqrt2);
  CHECK(collision_risk(0.0, spec).is_zero());
  CHECK(collision_risk(top / 3.0 * 0.99, spec).is_zero());
  const double mid = 0.8 * top;
  const auto r = collision_risk(mid, spec);
  REQUIRE(r.is_finite());
  CHECK(r.as_double() == doctest::Approx(1.0 / (1.0 - k * mid * kSqrt2) - 1.5));
  CHECK(collision_risk(top, spec).is_infinite());
  CHECK(collision_risk(2.0 * top, spec).is_infinite());
  CHECK(collision_risk(mid, EventSpec::collision(1.0, 1.5, 0.6)).is_zero());
  CHECK(code_of([&] { collision_risk(-1.0, spec); }) == Errc::InvalidParameter);
  CHECK(code_of([] { collision_risk(0.1, EventSpec::detachment(1.0, 2.0, 1.0, 0.05)); }) ==
        Errc::InvalidSpec);
}

TEST_CASE("detachment risk branches") {
  const auto spec = EventSpec::detachment(1.0, 3.0, 2.0, 0.05);
  const double k = kappa(0.05);
  const double lo = (2.0 - 0.5) / (k * kSqrt2);
  const double hi = 2.0 / (k * kSqrt2);
  CHECK(zero_threshold(spec) == doctest::Approx(lo));
  CHECK(infinite_threshold(spec) == doctest::Approx(hi));
  CHECK(detachment_risk(0.5 * lo, spec).is_zero());
  const double mid = 0.5 * (lo + hi);
  CHECK(detachment_risk(mid, spec).as_double() == doctest::Approx(1.0 / (2.0 - kSqrt2 * k * mid) - 2.0));
  CHECK(detachment_risk(hi, spec).is_infinite());
  // With h small enough the zero branch is empty.
  CHECK(zero_threshold(EventSpec::detachment(1.0, 2.0, 0.5, 0.05)) < 0.0);
  CHECK(detachment_risk(1e-9, EventSpec::detachment(1.0, 2.0, 0.5, 0.05)).is_finite());
}

TEST_CASE("risk is continuous across branch points") {
  for (const auto& spec : {EventSpec::collision(1.0, 1.3, 0.02), EventSpec::detachment(2.0, 1.7, 3.0, 0.1)}) {
    const double z = zero_threshold(spec);
    CHECK(event_risk(z - 1e-9, spec).is_zero());
    CHECK(event_risk(z + 1e-9, spec).as_double() <= 1e-7);
    const double t = infinite_threshold(spec);
    CHECK(event_risk(t - 1e-9, spec).as_double() > 1e6);
    CHECK(event_risk(t + 1e-9, spec).is_infinite());
  }
}

TEST_CASE("risk is monotone in sigma and in eps") {
  const auto spec = EventSpec::collision(1.0, 1.2, 0.05);
  RiskValue prev = RiskValue::zero();
  for (int k = 0; k <= 200; ++k) {
    const auto r = collision_risk(0.005 * k, spec);
    CHECK(r >= prev);
    prev = r;
  }
  for (double sigma : {0.1, 0.3, 0.5}) {
    RiskValue prev_eps = RiskValue::infinite();
    for (double eps : {0.001, 0.01, 0.05, 0.1, 0.3, 0.49}) {
      const auto r = collision_risk(sigma, EventSpec::collision(1.0, 1.2, eps));
      CHECK(r <= prev_eps);
      prev_eps = r;
      const auto rd = detachment_risk(sigma, EventSpec::detachment(1.0, 2.0, 1.0, eps));
      CHECK(rd <= detachment_risk(sigma, EventSpec::detachment(1.0, 2.0, 1.0, eps / 2.0)));
    }
  }
}

TEST_CASE("risk value ordering and factories") {
  CHECK(RiskValue::zero() < RiskValue::finite(1e-300));
  CHECK(RiskValue::finite(3.0) < RiskValue::infinite());
  CHECK(RiskValue::finite(0.0).is_zero());
  CHECK(RiskValue::finite(-2.0).is_zero());
  CHECK(std::isinf(RiskValue::infinite().as_double()));
  CHECK(RiskValue::finite(2.0) == RiskValue::finite(2.0));
}

TEST_CASE("event spec validation") {
  CHECK(code_of([] { EventSpec::collision(1.0, 0.9, 0.05); }) == Errc::InvalidSpec);
  CHECK(code_of([] { EventSpec::collision(0.0, 1.0, 0.05); }) == Errc::InvalidSpec);
  CHECK(code_of([] { EventSpec::collision(1.0, 1.0, 1.0); }) == Errc::InvalidSpec);
  CHECK(code_of([] { EventSpec::detachment(1.0, 0.5, 1.0, 0.05); }) == Errc::InvalidSpec);
  CHECK(code_of([] { EventSpec::detachment(1.0, 2.0, 0.0, 0.05); }) == Errc::InvalidSpec);
}

TEST_CASE("risk vectors and joint boxes") {
  const auto s = spectrum(make_path(5, 3.0));
  const auto md = sigma_vector(s, 0.3, 0.05, 2.0);
  const auto spec = EventSpec::collision(1.0, 1.0, 0.05);
  const auto r = risk_vector(md, spec);
  REQUIRE(r.size() == 4);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == collision_risk(md.sigma[i], spec));

  const auto boxes = joint_risk_boxes(md, spec);
  REQUIRE(boxes.w_box.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(boxes.v_box[i].lo.is_zero());
    CHECK(boxes.v_box[i].hi == r[i]);
    CHECK(boxes.w_box[i].lo == r[i]);
    CHECK(boxes.w_box[i].hi == collision_risk(md.sigma[i], EventSpec::collision(1.0, 1.0, 0.0125)));
    CHECK(boxes.w_box[i].hi >= boxes.w_box[i].lo);
  }

  const std::vector<double> custom = {0.02, 0.01, 0.01, 0.01};
  const auto b2 = joint_risk_boxes(md, spec, custom);
  CHECK(b2.w_box[0].hi == collision_risk(md.sigma[0], EventSpec::collision(1.0, 1.0, 0.02)));
  CHECK(code_of([&] { joint_risk_boxes(md, spec, std::vector<double>{0.01, 0.01, 0.01}); }) ==
        Errc::InvalidSplit);
  CHECK(code_of([&] { joint_risk_boxes(md, spec, std::vector<double>{0.02, 0.02, 0.02, 0.02}); }) ==
        Errc::InvalidSplit);
  CHECK(code_of([&] { joint_risk_boxes(md, spec, std::vector<double>{0.06, -0.01, 0.0, 0.0}); }) ==
        Errc::InvalidSplit);

  const auto two = sigma_vector(spectrum(make_path(2, 3.0)), 0.3, 0.05, 2.0);
  const auto b3 = joint_risk_boxes(two, spec);
  CHECK(b3.w_box[0].lo == b3.w_box[0].hi);
}

TEST_CASE("collision limit constant and the inevitability condition") {
  const double constant = collision_limit_constant();
  CHECK(constant == doctest::Approx(4.02).epsilon(2e-3));
  const auto spec = EventSpec::collision(1.0, 1.0, 0.01);
  const double k = kappa(0.01);
  const double critical = 1.0 / (constant * k);
  const double tau = 0.2;
  const double g_crit = critical / std::pow(tau, 1.5);
  CHECK(collision_risk_lower_bound(g_crit * (1.0 + 1e-9), tau, spec).is_infinite());
  const auto below = collision_risk_lower_bound(g_crit * 0.5, tau, spec);
  REQUIRE(below.is_finite());
  CHECK(below.as_double() ==
        doctest::Approx(1.0 / (1.0 - constant * k * 0.5 * g_crit * std::pow(tau, 1.5)) - 1.0));
  CHECK(collision_risk_lower_bound(1.0, 0.0, spec).is_zero());
}

TEST_CASE("no platoon beats the collision lower bound") {
  const auto spec = EventSpec::collision(1.0, 1.2, 0.05);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = spectrum(make_perturbed_complete(6, 0.3, 0.3, seed));
    const auto md = sigma_vector(s, 0.8, 0.2, 1.5);
    const auto bound = collision_risk_lower_bound(0.8, 0.2, spec);
    for (const auto& r : risk_vector(md, spec)) CHECK(r >= bound);
  }
}

TEST_CASE("weighted minimum grows with n and never exceeds the objective at a probe") {
  const auto& m = f_min();
  CHECK(f_min_weighted(5, 1) > f_min_weighted(2, 1));
  CHECK(f_min_weighted(9, 3) > f_min_weighted(5, 3));
  for (auto [n, power] : {std::pair{2, 1}, {5, 1}, {5, 4}, {9, 3}}) {
    const double bracket = 1.0 / m.s1 + (n - 2) / theta(m.s2);
    CHECK(f_min_weighted(n, power) <= m.value * std::pow(bracket, 2.0 / power) * (1.0 + 1e-9));
  }
  CHECK(code_of([] { f_min_weighted(1, 1); }) == Errc::InvalidParameter);
}

TEST_CASE("trade-off bound holds on stable instances and checks its domain") {
  const auto spec = EventSpec::collision(1.0, 1.0, 0.05);
  const double tau = 0.1;
  const double beta = 2.0;
  const double g = 0.5;
  const auto s = spectrum(make_complete(4, 1.0));
  REQUIRE(platoon_stable(s, beta, tau).stable);
  const auto md = sigma_vector(s, g, tau, beta);
  const auto terms = tradeoff_terms(4, g, tau, beta, spec);
  CHECK(terms.terms >= 1);
  CHECK(terms.series > 0.0);
  CHECK(terms.e_lower == doctest::Approx(std::pow(kSqrt2 * kappa(0.05) * sigma_star(g, tau), 2)));
  const double xi = effective_resistance(s);
  for (const auto& r : risk_vector(md, spec)) {
    REQUIRE(r.is_finite());
    CHECK(r.as_double() * std::sqrt(xi) > terms.bound);
  }
  CHECK(tradeoff_bound(4, 2.0 * g, tau, beta, spec) > terms.bound);
  CHECK(code_of([&] { tradeoff_bound(4, g, tau, 20.0, spec); }) == Errc::OutOfDomain);
  CHECK(code_of([&] { tradeoff_bound(4, g, 0.0, beta, spec); }) == Errc::OutOfDomain);
  CHECK(code_of([&] { tradeoff_bound(4, g, tau, beta, EventSpec::detachment(1.0, 2.0, 1.0, 0.05)); }) ==
        Errc::InvalidSpec);
}
