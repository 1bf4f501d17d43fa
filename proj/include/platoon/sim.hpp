#pragma once

// Euler-Maruyama integration of the delayed stochastic platoon and Monte-Carlo
// estimators built on its steady-state samples.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "platoon/graph.hpp"
#include "platoon/risk.hpp"

namespace platoon {

struct PlatoonModel {
  WeightedGraph graph;
  double beta = 1.0;
  double tau = 0.0;
  double g = 0.0;
  double d = 1.0;
};

/// FNV-1a over n, the weight matrix and (beta, tau, g, d).
std::uint64_t model_hash(const PlatoonModel& model);

/// Initial functions on [-tau, 0]: x = d (1..n) + offset, v = velocity.
/// Empty vectors mean zeros.
struct InitialState {
  std::vector<double> offset;
  std::vector<double> velocity;
};

struct Trajectory {
  std::vector<double> t;
  Matrix x;  // rows are recorded time points
  Matrix v;
  int delay_steps = 0;
  bool model_stable = false;
  std::vector<std::string> warnings;
};

/// x <- x + v dt, v <- v - L (v(t - tau) + beta (x(t - tau) - spacing)) dt + g sqrt(dt) N(0, I).
/// The delay buffer holds round(tau/dt) steps; a warning is attached when
/// tau/dt is more than 1e-9 away from an integer. Records every
/// `record_every` steps including t = 0. Throws InvalidTimestep and NonfiniteState.
Trajectory simulate(const PlatoonModel& model, double dt, double T, std::uint64_t seed,
                    const InitialState& initial = {}, int record_every = 1);

struct SamplingOptions {
  double dt = 1e-3;
  double T = 100.0;
  std::optional<double> burn_in;  // default max(10 tau, T/2)
  std::optional<int> stride;      // default ceil(tau/dt), at least 1
  int replicas = 1;
  std::uint64_t seed = 0;
  InitialState initial;
};

/// Relative distances x^(i+1) - x^(i) recorded at common timestamps.
struct TrajectoryEnsemble {
  int replica_count = 0;
  double dt = 0.0;
  double T = 0.0;
  double burn_in = 0.0;
  int stride = 0;
  std::uint64_t seed = 0;
  int pairs = 0;
  bool model_stable = false;
  std::vector<std::string> warnings;
  std::vector<int> replica;     // per row
  std::vector<double> time;     // per row
  std::vector<double> samples;  // row-major, rows() x pairs

  std::size_t rows() const noexcept { return time.size(); }
  double at(std::size_t row, int pair) const {
    return samples[row * static_cast<std::size_t>(pairs) + static_cast<std::size_t>(pair)];
  }
  std::vector<double> pair_samples(int pair) const;
};

/// Pooled steady-state samples. Replica r draws from its own generator seeded
/// with (seed, r); replicas run on worker threads and are merged in replica
/// order, so the output does not depend on the thread count.
TrajectoryEnsemble steady_state_samples(const PlatoonModel& model, const SamplingOptions& opts);

/// Empirical value-at-risk from one list of relative distances. Collision uses
/// the order statistic at ceil(eps N), detachment the one at N + 1 - ceil(eps N).
/// Throws InsufficientSamples when N < 10/eps.
RiskValue empirical_risk_from_samples(std::vector<double> samples, const EventSpec& spec);
std::vector<RiskValue> empirical_risk(const TrajectoryEnsemble& ens, const EventSpec& spec);

/// True if y falls in the super-set of level delta (delta may be +inf).
bool in_event(double y, const EventSpec& spec, double delta);

struct JointMode {
  enum class Kind { Union, Intersection, UnionOfIntersections, IntersectionOfUnions };
  Kind kind = Kind::Union;
  std::vector<std::vector<int>> groups;  // pair indices, used by the nested kinds

  static JointMode union_of_all() { return {}; }
  static JointMode intersection_of_all() { return {Kind::Intersection, {}}; }
};

struct JointEstimate {
  double probability = 0.0;
  double wilson_lo = 0.0;  // 95% Wilson score interval
  double wilson_hi = 0.0;
  std::size_t hits = 0;
  std::size_t total = 0;
  std::vector<double> marginals;
  double bound_lo = 0.0;  // Boole-Frechet bounds from the marginals
  double bound_hi = 1.0;
  bool bounds_hold = true;
};

/// Per-timestamp joint indicator across pairs. Throws InsufficientSamples on
/// an empty ensemble and InvalidParameter for negative delta.
JointEstimate joint_event_probability(const TrajectoryEnsemble& ens,
                                      const std::vector<EventSpec>& specs,
                                      const std::vector<double>& delta, const JointMode& mode);

struct UnionRiskEstimate {
  double level = 0.0;  // eta with delta_i = empirical marginal risk at eta
  std::vector<RiskValue> delta;
  JointEstimate joint;
};

/// Point on the Monte-Carlo union-risk frontier: the largest eta in
/// [eps/(n-1), eps] for which delta(eta) keeps the union probability below eps.
UnionRiskEstimate union_delta_risk(const TrajectoryEnsemble& ens, const EventSpec& spec);

}  // namespace platoon
