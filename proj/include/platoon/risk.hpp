#pragma once

// Value-at-risk of inter-vehicle collision and detachment, joint-risk boxes,
// and the delay-induced hard limits and trade-offs.

#include <compare>
#include <optional>
#include <vector>

#include "platoon/variance.hpp"

namespace platoon {

enum class EventKind { Collision, Detachment };

struct EventSpec {
  EventKind kind = EventKind::Collision;
  double d = 1.0;    // target spacing
  double c = 1.0;    // collision tolerance, >= 1
  double a = 2.0;    // detachment range multiplier, >= 1
  double h = 1.0;    // detachment alarm sharpness, > 0
  double eps = 0.05; // confidence cutoff in (0, 1)

  static EventSpec collision(double d, double c, double eps);
  static EventSpec detachment(double d, double a, double h, double eps);

  /// Throws InvalidSpec on out-of-range fields.
  void validate() const;
};

class RiskValue {
 public:
  enum class Tag { Zero, Finite, Infinite };

  static RiskValue zero() { return RiskValue(Tag::Zero, 0.0); }
  static RiskValue infinite() { return RiskValue(Tag::Infinite, 0.0); }
  /// Non-positive values collapse to Zero.
  static RiskValue finite(double v) { return v > 0.0 ? RiskValue(Tag::Finite, v) : zero(); }

  Tag tag() const noexcept { return tag_; }
  bool is_zero() const noexcept { return tag_ == Tag::Zero; }
  bool is_finite() const noexcept { return tag_ == Tag::Finite; }
  bool is_infinite() const noexcept { return tag_ == Tag::Infinite; }
  /// 0 for Zero, +inf for Infinite.
  double as_double() const noexcept;

  /// Zero < Finite(v) < Infinite, Finite compared by value.
  std::partial_ordering operator<=>(const RiskValue& o) const noexcept {
    return as_double() <=> o.as_double();
  }
  bool operator==(const RiskValue& o) const noexcept { return tag_ == o.tag_ && value_ == o.value_; }

 private:
  RiskValue(Tag t, double v) : tag_(t), value_(v) {}
  Tag tag_;
  double value_;
};

/// sigma at and above which the risk is Infinite: d/(kappa sqrt 2) for
/// collision, (a-1) d/(kappa sqrt 2) for detachment.
double infinite_threshold(const EventSpec& spec);
/// sigma at and below which the risk is Zero (may be negative for detachment).
double zero_threshold(const EventSpec& spec);

RiskValue collision_risk(double sigma, const EventSpec& spec);
RiskValue detachment_risk(double sigma, const EventSpec& spec);
RiskValue event_risk(double sigma, const EventSpec& spec);

std::vector<RiskValue> risk_vector(const MarginalDeviations& md, const EventSpec& spec);

struct RiskInterval {
  RiskValue lo;
  RiskValue hi;
};

struct JointRiskBoxes {
  std::vector<RiskInterval> v_box;  // [0, R_eps^i]
  std::vector<RiskInterval> w_box;  // [R_eps^i, R_{eps_i}^i]
};

/// Default split is eps/(n-1) per pair. A custom split needs n-1 positive
/// entries summing to eps within 1e-12, else InvalidSplit.
JointRiskBoxes joint_risk_boxes(const MarginalDeviations& md, const EventSpec& spec,
                                const std::optional<std::vector<double>>& split = std::nullopt);

/// sqrt(2) sqrt(f_min/pi); the middle branch of the collision limit is
/// d/(d - constant * kappa |g| tau^{3/2}) - c.
double collision_limit_constant();

/// Collision risk evaluated at sigma* = sigma_star(g, tau): no platoon with this
/// noise and delay does better, whatever its topology.
RiskValue collision_risk_lower_bound(double g, double tau, const EventSpec& spec);

/// min over j of inf over S of f (((j-1)/s1 + (n-j)/theta(s2)))^{2/m}.
/// The bracket is smallest at j = 2 because s1 < theta(s2) inside S.
/// Memoized per (n, m).
double f_min_weighted(int n, int m);

struct TradeoffTerms {
  double bound = 0.0;
  double e_lower = 0.0;     // E^C
  double series = 0.0;      // sum of alpha_m
  int terms = 0;            // number of alpha_m summed
};

/// Lower bound on R_eps^{C,i} sqrt(Xi_G) for any stable platoon with these
/// parameters and sigma_i < d/(kappa sqrt 2). Requires beta tau in (0, 1).
/// Throws SeriesDivergence if the alpha_m are still non-decreasing at m = 200.
TradeoffTerms tradeoff_terms(int n, double g, double tau, double beta, const EventSpec& spec);
double tradeoff_bound(int n, double g, double tau, double beta, const EventSpec& spec);

}  // namespace platoon
