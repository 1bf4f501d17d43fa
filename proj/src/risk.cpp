#include "platoon/risk.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "platoon/error.hpp"
#include "platoon/special.hpp"
#include "platoon/stability.hpp"

namespace platoon {

EventSpec EventSpec::collision(double d, double c, double eps) {
  EventSpec s;
  s.kind = EventKind::Collision;
  s.d = d;
  s.c = c;
  s.eps = eps;
  s.validate();
  return s;
}

EventSpec EventSpec::detachment(double d, double a, double h, double eps) {
  EventSpec s;
  s.kind = EventKind::Detachment;
  s.d = d;
  s.a = a;
  s.h = h;
  s.eps = eps;
  s.validate();
  return s;
}

void EventSpec::validate() const {
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::InvalidSpec, "spacing d must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidSpec, "eps must lie in (0, 1)");
  if (kind == EventKind::Collision) {
    if (!(c >= 1.0) || !std::isfinite(c)) throw Error(Errc::InvalidSpec, "collision needs c >= 1");
  } else {
    if (!(a >= 1.0) || !std::isfinite(a)) throw Error(Errc::InvalidSpec, "detachment needs a >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(Errc::InvalidSpec, "detachment needs h > 0");
  }
}

double RiskValue::as_double() const noexcept {
  switch (tag_) {
    case Tag::Zero:
      return 0.0;
    case Tag::Finite:
      return value_;
    case Tag::Infinite:
      break;
  }
  return std::numeric_limits<double>::infinity();
}

double infinite_threshold(const EventSpec& spec) {
  spec.validate();
  const double base = spec.d / (kappa(spec.eps) * std::numbers::sqrt2);
  return spec.kind == EventKind::Collision ? base : (spec.a - 1.0) * base;
}

double zero_threshold(const EventSpec& spec) {
  spec.validate();
  const double k = kappa(spec.eps);
  if (spec.kind == EventKind::Collision) {
    return spec.d / (k * std::numbers::sqrt2) * (spec.c - 1.0) / spec.c;
  }
  return ((spec.a - 1.0) * spec.d - 1.0 / spec.h) / (k * std::numbers::sqrt2);
}

RiskValue collision_risk(double sigma, const EventSpec& spec) {
  spec.validate();
  if (spec.kind != EventKind::Collision) throw Error(Errc::InvalidSpec, "expected a collision spec");
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidParameter, "sigma must be non-negative");
  if (spec.eps >= 0.5) return RiskValue::zero();
  const double k = kappa(spec.eps);
  const double top = spec.d / (k * std::numbers::sqrt2);
  if (sigma <= top * (spec.c - 1.0) / spec.c) return RiskValue::zero();
  if (sigma >= top) return RiskValue::infinite();
  return RiskValue::finite(spec.d / (spec.d - k * sigma * std::numbers::sqrt2) - spec.c);
}

RiskValue detachment_risk(double sigma, const EventSpec& spec) {
  spec.validate();
  if (spec.kind != EventKind::Detachment) {
    throw Error(Errc::InvalidSpec, "expected a detachment spec");
  }
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidParameter, "sigma must be non-negative");
  if (spec.eps >= 0.5) return RiskValue::zero();
  const double k = kappa(spec.eps);
  const double reach = (spec.a - 1.0) * spec.d;
  if (sigma <= (reach - 1.0 / spec.h) / (k * std::numbers::sqrt2)) return RiskValue::zero();
  if (sigma >= reach / (k * std::numbers::sqrt2)) return RiskValue::infinite();
  return RiskValue::finite(1.0 / (reach - std::numbers::sqrt2 * k * sigma) - spec.h);
}

RiskValue event_risk(double sigma, const EventSpec& spec) {
  return spec.kind == EventKind::Collision ? collision_risk(sigma, spec)
                                           : detachment_risk(sigma, spec);
}

std::vector<RiskValue> risk_vector(const MarginalDeviations& md, const EventSpec& spec) {
  std::vector<RiskValue> out;
  out.reserve(md.sigma.size());
  for (double s : md.sigma) out.push_back(event_risk(s, spec));
  return out;
}

JointRiskBoxes joint_risk_boxes(const MarginalDeviations& md, const EventSpec& spec,
                                const std::optional<std::vector<double>>& split) {
  spec.validate();
  const std::size_t pairs = md.sigma.size();
  std::vector<double> parts(pairs, spec.eps / static_cast<double>(pairs));
  if (split) {
    if (split->size() != pairs) {
      throw Error(Errc::InvalidSplit, "split has " + std::to_string(split->size()) +
                                          " entries, expected " + std::to_string(pairs));
    }
    double total = 0.0;
    for (double e : *split) {
      if (!(e > 0.0)) throw Error(Errc::InvalidSplit, "split entries must be positive");
      total += e;
    }
    if (std::abs(total - spec.eps) > 1e-12) {
      throw Error(Errc::InvalidSplit, "split sums to " + std::to_string(total) + ", not eps");
    }
    parts = *split;
  }
  if (pairs == 1) parts[0] = spec.eps;

  JointRiskBoxes boxes;
  for (std::size_t i = 0; i < pairs; ++i) {
    EventSpec local = spec;
    local.eps = parts[i];
    const RiskValue r = event_risk(md.sigma[i], spec);
    boxes.v_box.push_back({RiskValue::zero(), r});
    boxes.w_box.push_back({r, event_risk(md.sigma[i], local)});
  }
  return boxes;
}

double collision_limit_constant() {
  return std::numbers::sqrt2 * std::sqrt(f_min().value / std::numbers::pi);
}

RiskValue collision_risk_lower_bound(double g, double tau, const EventSpec& spec) {
  return collision_risk(sigma_star(g, tau), spec);
}

double f_min_weighted(int n, int m) {
  if (n < 2 || m < 1) throw Error(Errc::InvalidParameter, "weighted minimum needs n >= 2, m >= 1");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, double> memo;
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find({n, m}); it != memo.end()) return it->second;
  }
  const double power = 2.0 / m;
  const auto objective = [n, power](double s1, double s2) {
    const double bracket = 1.0 / s1 + (n - 2) / theta(s2);
    return f_kernel(s1, s2).value * std::pow(bracket, power);
  };
  const double value = minimize_over_region(objective).value;
  std::lock_guard lock(mutex);
  memo.emplace(std::make_pair(n, m), value);
  return value;
}

TradeoffTerms tradeoff_terms(int n, double g, double tau, double beta, const EventSpec& spec) {
  spec.validate();
  if (spec.kind != EventKind::Collision) throw Error(Errc::InvalidSpec, "trade-off uses collision");
  if (n < 2) throw Error(Errc::InvalidParameter, "trade-off needs n >= 2");
  const double s2 = beta * tau;
  if (!(tau > 0.0) || !(s2 > 0.0 && s2 < 1.0)) {
    throw Error(Errc::OutOfDomain, "trade-off needs beta*tau in (0, 1), got " + std::to_string(s2));
  }
  const double k = kappa(spec.eps);
  const double c = spec.c;
  const double ratio = std::numbers::sqrt2 * k / spec.d;
  const double floor_sigma = (c - 1.0) / c * spec.d / (std::numbers::sqrt2 * k);
  const double s_star = sigma_star(g, tau);
  const double m1 = std::max(floor_sigma, s_star);
  const double m2 = std::max(floor_sigma * floor_sigma, s_star * s_star);

  TradeoffTerms out;
  out.e_lower = (1.0 - c) * (1.0 - c) + 2.0 * (1.0 - c) * c * ratio * m1 + c * c * ratio * ratio * m2;

  const double x = std::abs(g) * std::pow(tau, 1.5) * k / (spec.d * std::sqrt(std::numbers::pi));
  if (x > 0.0) {
    double previous = 0.0;
    for (int m = 1; m <= 200; ++m) {
      const double log_term = 0.5 * m * std::log(2.0) + std::log(m + 1.0) + m * std::log(x) +
                              0.5 * m * std::log(f_min_weighted(n, m));
      const double term = std::exp(log_term);
      if (!std::isfinite(term)) throw Error(Errc::SeriesDivergence, "alpha_m overflowed");
      out.series += term;
      out.terms = m;
      if (term < 1e-12 * out.series) break;
      if (m == 200 && term >= previous) {
        throw Error(Errc::SeriesDivergence,
                    "alpha_m non-decreasing at m = 200; sigma beyond d/(kappa sqrt 2)");
      }
      previous = term;
    }
  }
  out.bound = std::sqrt(n * tau * out.e_lower * (2.0 * (n - 1) / std::numbers::pi + out.series));
  return out;
}

double tradeoff_bound(int n, double g, double tau, double beta, const EventSpec& spec) {
  return tradeoff_terms(n, g, tau, beta, spec).bound;
}

}  // namespace platoon
