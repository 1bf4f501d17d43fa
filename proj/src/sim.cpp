#include "platoon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <random>
#include <string>
#include <thread>

#include "platoon/error.hpp"
#include "platoon/stability.hpp"

namespace platoon {

namespace {

constexpr double kWilsonZ = 1.959963984540054;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::mt19937_64 replica_engine(std::uint64_t seed, int replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica)};
  return std::mt19937_64(seq);
}

bool model_is_stable(const PlatoonModel& model) {
  try {
    return platoon_stable(spectrum(model.graph), model.beta, model.tau).stable;
  } catch (const Error&) {
    return false;
  }
}

int delay_steps(double tau, double dt, std::vector<std::string>* warnings) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::InvalidTimestep, "dt must be positive");
  const double ratio = tau / dt;
  const long long m = std::llround(ratio);
  if (tau > 0.0 && m == 0) {
    throw Error(Errc::InvalidTimestep, "dt exceeds twice the delay; no buffer slot left");
  }
  if (std::abs(ratio - static_cast<double>(m)) > 1e-9 && warnings) {
    warnings->push_back("tau/dt = " + std::to_string(ratio) + " is not an integer; delay buffer uses " +
                        std::to_string(m) + " steps");
  }
  return static_cast<int>(m);
}

// Fixed-step integrator with a ring buffer of the last m + 1 states.
class Integrator {
 public:
  Integrator(const PlatoonModel& model, double dt, int m, const InitialState& init)
      : n_(model.graph.size()),
        m_(m),
        dt_(dt),
        beta_(model.beta),
        noise_(model.g * std::sqrt(dt)),
        lap_(static_cast<std::size_t>(n_ * n_)),
        spacing_(static_cast<std::size_t>(n_)),
        ring_x_(static_cast<std::size_t>((m + 1) * n_)),
        ring_v_(static_cast<std::size_t>((m + 1) * n_)),
        u_(static_cast<std::size_t>(n_)) {
    const Matrix l = laplacian(model.graph);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) lap_[static_cast<std::size_t>(i * n_ + j)] = l(i, j);
      spacing_[static_cast<std::size_t>(i)] = (i + 1) * model.d;
    }
    const auto pick = [this](const std::vector<double>& v, const char* what, int i) {
      if (v.empty()) return 0.0;
      if (static_cast<int>(v.size()) != n_) {
        throw Error(Errc::InvalidParameter, std::string(what) + " must have n entries");
      }
      return v[static_cast<std::size_t>(i)];
    };
    for (int s = 0; s <= m_; ++s) {
      for (int i = 0; i < n_; ++i) {
        const auto k = static_cast<std::size_t>(s * n_ + i);
        ring_x_[k] = spacing_[static_cast<std::size_t>(i)] + pick(init.offset, "offset", i);
        ring_v_[k] = pick(init.velocity, "velocity", i);
      }
    }
  }

  template <class Rng>
  void step(Rng& rng, std::normal_distribution<double>& normal) {
    const std::size_t now = static_cast<std::size_t>(slot(step_) * n_);
    const std::size_t past = static_cast<std::size_t>(slot(step_ + 1) * n_);  // t - tau
    const std::size_t next = past;  // oldest slot is overwritten by the new state
    for (int i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      u_[k] = ring_v_[past + k] + beta_ * (ring_x_[past + k] - spacing_[k]);
    }
    if (m_ == 0) {
      for (int i = 0; i < n_; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double lu = row_dot(i);
        ring_x_[now + k] += ring_v_[now + k] * dt_;
        ring_v_[now + k] += -lu * dt_ + noise_ * normal(rng);
      }
    } else {
      for (int i = 0; i < n_; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double lu = row_dot(i);
        const double x = ring_x_[now + k];
        const double v = ring_v_[now + k];
        ring_x_[next + k] = x + v * dt_;
        ring_v_[next + k] = v - lu * dt_ + noise_ * normal(rng);
      }
    }
    ++step_;
  }

  const double* x() const { return &ring_x_[static_cast<std::size_t>(slot(step_) * n_)]; }
  const double* v() const { return &ring_v_[static_cast<std::size_t>(slot(step_) * n_)]; }
  long long steps() const { return step_; }

  void check_finite() const {
    for (int i = 0; i < n_; ++i) {
      if (!std::isfinite(x()[i]) || !std::isfinite(v()[i]) || std::abs(x()[i]) > 1e150) {
        throw Error(Errc::NonfiniteState,
                    "state diverged at step " + std::to_string(step_) + "; the model is unstable");
      }
    }
  }

 private:
  int slot(long long k) const { return static_cast<int>(k % (m_ + 1)); }
  double row_dot(int i) const {
    const double* row = &lap_[static_cast<std::size_t>(i * n_)];
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) acc += row[j] * u_[static_cast<std::size_t>(j)];
    return acc;
  }

  int n_;
  int m_;
  double dt_;
  double beta_;
  double noise_;
  std::vector<double> lap_;
  std::vector<double> spacing_;
  std::vector<double> ring_x_;
  std::vector<double> ring_v_;
  std::vector<double> u_;
  long long step_ = 0;
};

double wilson_half(double p, double n, double* center) {
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  *center = (p + z2 / (2.0 * n)) / denom;
  return kWilsonZ / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

}  // namespace

std::uint64_t model_hash(const PlatoonModel& model) {
  std::uint64_t h = 14695981039346656037ull;
  const int n = model.graph.size();
  h = fnv1a(h, &n, sizeof n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = model.graph.weight(i, j);
      h = fnv1a(h, &w, sizeof w);
    }
  }
  for (double p : {model.beta, model.tau, model.g, model.d}) h = fnv1a(h, &p, sizeof p);
  return h;
}

Trajectory simulate(const PlatoonModel& model, double dt, double T, std::uint64_t seed,
                    const InitialState& initial, int record_every) {
  Trajectory out;
  out.delay_steps = delay_steps(model.tau, dt, &out.warnings);
  if (!(T > model.tau) || !std::isfinite(T)) {
    throw Error(Errc::InvalidParameter, "horizon T must exceed the delay");
  }
  if (record_every < 1) throw Error(Errc::InvalidParameter, "record_every must be >= 1");
  out.model_stable = model_is_stable(model);

  Integrator integ(model, dt, out.delay_steps, initial);
  auto rng = replica_engine(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const long long total = std::llround(T / dt);
  const int n = model.graph.size();
  const auto records = static_cast<Eigen::Index>(total / record_every + 1);
  out.x.resize(records, n);
  out.v.resize(records, n);
  Eigen::Index row = 0;
  const auto record = [&] {
    out.t.push_back(static_cast<double>(integ.steps()) * dt);
    for (int i = 0; i < n; ++i) {
      out.x(row, i) = integ.x()[i];
      out.v(row, i) = integ.v()[i];
    }
    ++row;
  };
  record();
  for (long long k = 1; k <= total; ++k) {
    integ.step(rng, normal);
    if (k % 1024 == 0) integ.check_finite();
    if (k % record_every == 0) record();
  }
  integ.check_finite();
  out.x.conservativeResize(row, n);
  out.v.conservativeResize(row, n);
  return out;
}

std::vector<double> TrajectoryEnsemble::pair_samples(int pair) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, pair);
  return out;
}

TrajectoryEnsemble steady_state_samples(const PlatoonModel& model, const SamplingOptions& opts) {
  TrajectoryEnsemble ens;
  const int m = delay_steps(model.tau, opts.dt, &ens.warnings);
  if (!(opts.T > model.tau) || !std::isfinite(opts.T)) {
    throw Error(Errc::InvalidParameter, "horizon T must exceed the delay");
  }
  if (opts.replicas < 1) throw Error(Errc::InvalidParameter, "need at least one replica");
  const double burn_in = opts.burn_in.value_or(std::max(10.0 * model.tau, opts.T / 2.0));
  if (!(burn_in >= 0.0 && burn_in < opts.T)) {
    throw Error(Errc::InvalidParameter, "burn-in must lie in [0, T)");
  }
  const int min_stride = std::max(1, static_cast<int>(std::ceil(model.tau / opts.dt - 1e-9)));
  const int stride = opts.stride.value_or(min_stride);
  if (stride < min_stride) {
    throw Error(Errc::InvalidParameter, "stride must be at least ceil(tau/dt) = " +
                                            std::to_string(min_stride));
  }

  ens.replica_count = opts.replicas;
  ens.dt = opts.dt;
  ens.T = opts.T;
  ens.burn_in = burn_in;
  ens.stride = stride;
  ens.seed = opts.seed;
  ens.pairs = model.graph.size() - 1;
  ens.model_stable = model_is_stable(model);

  const long long total = std::llround(opts.T / opts.dt);
  const auto burn_steps = static_cast<long long>(std::ceil(burn_in / opts.dt - 1e-9));
  const int n = model.graph.size();

  struct Chunk {
    std::vector<double> time;
    std::vector<double> samples;
    std::exception_ptr error;
  };
  std::vector<Chunk> chunks(static_cast<std::size_t>(opts.replicas));
  const auto run = [&](int r) {
    Chunk& c = chunks[static_cast<std::size_t>(r)];
    try {
      Integrator integ(model, opts.dt, m, opts.initial);
      auto rng = replica_engine(opts.seed, r);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (long long k = 1; k <= total; ++k) {
        integ.step(rng, normal);
        if (k % 1024 == 0) integ.check_finite();
        if (k > burn_steps && (k - burn_steps) % stride == 0) {
          c.time.push_back(static_cast<double>(k) * opts.dt);
          const double* x = integ.x();
          for (int i = 0; i + 1 < n; ++i) c.samples.push_back(x[i + 1] - x[i]);
        }
      }
      integ.check_finite();
    } catch (...) {
      c.error = std::current_exception();
    }
  };

  const int workers =
      std::max(1, std::min(opts.replicas, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int r = 0; r < opts.replicas; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int r = w; r < opts.replicas; r += workers) run(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (int r = 0; r < opts.replicas; ++r) {
    Chunk& c = chunks[static_cast<std::size_t>(r)];
    if (c.error) std::rethrow_exception(c.error);
    ens.time.insert(ens.time.end(), c.time.begin(), c.time.end());
    ens.replica.insert(ens.replica.end(), c.time.size(), r);
    ens.samples.insert(ens.samples.end(), c.samples.begin(), c.samples.end());
  }
  return ens;
}

RiskValue empirical_risk_from_samples(std::vector<double> samples, const EventSpec& spec) {
  spec.validate();
  const auto n = samples.size();
  if (static_cast<double>(n) < 10.0 / spec.eps) {
    throw Error(Errc::InsufficientSamples, std::to_string(n) + " samples, need at least " +
                                               std::to_string(std::ceil(10.0 / spec.eps)));
  }
  const auto k = static_cast<std::size_t>(std::ceil(spec.eps * static_cast<double>(n)));
  if (spec.kind == EventKind::Collision) {
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     samples.end());
    const double q = samples[k - 1];
    if (q <= 0.0) return RiskValue::infinite();
    return RiskValue::finite(spec.d / q - spec.c);
  }
  const std::size_t idx = n - k;  // 0-based position of order statistic N + 1 - k
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(idx),
                   samples.end());
  const double q = samples[idx];
  const double room = spec.a * spec.d - q;
  if (room <= 0.0) return RiskValue::infinite();
  return RiskValue::finite(1.0 / room - spec.h);
}

std::vector<RiskValue> empirical_risk(const TrajectoryEnsemble& ens, const EventSpec& spec) {
  std::vector<RiskValue> out;
  for (int p = 0; p < ens.pairs; ++p) out.push_back(empirical_risk_from_samples(ens.pair_samples(p), spec));
  return out;
}

bool in_event(double y, const EventSpec& spec, double delta) {
  if (spec.kind == EventKind::Collision) return y < spec.d / (delta + spec.c);
  return y > spec.a * spec.d - 1.0 / (delta + spec.h);
}

JointEstimate joint_event_probability(const TrajectoryEnsemble& ens,
                                      const std::vector<EventSpec>& specs,
                                      const std::vector<double>& delta, const JointMode& mode) {
  if (ens.rows() == 0) throw Error(Errc::InsufficientSamples, "ensemble is empty");
  const auto pairs = static_cast<std::size_t>(ens.pairs);
  if (specs.size() != 1 && specs.size() != pairs) {
    throw Error(Errc::InvalidParameter, "need one event spec or one per pair");
  }
  if (delta.size() != pairs) throw Error(Errc::InvalidParameter, "delta needs one entry per pair");
  for (double d : delta) {
    if (!(d >= 0.0)) throw Error(Errc::InvalidParameter, "delta must be non-negative");
  }
  const auto spec_of = [&](std::size_t i) -> const EventSpec& {
    return specs.size() == 1 ? specs[0] : specs[i];
  };
  for (const auto& g : mode.groups) {
    for (int i : g) {
      if (i < 0 || static_cast<std::size_t>(i) >= pairs) {
        throw Error(Errc::InvalidParameter, "group refers to pair " + std::to_string(i));
      }
    }
  }

  JointEstimate est;
  est.total = ens.rows();
  std::vector<std::size_t> marginal_hits(pairs, 0);
  std::vector<char> hit(pairs);
  for (std::size_t r = 0; r < ens.rows(); ++r) {
    for (std::size_t i = 0; i < pairs; ++i) {
      hit[i] = in_event(ens.at(r, static_cast<int>(i)), spec_of(i), delta[i]) ? 1 : 0;
      marginal_hits[i] += static_cast<std::size_t>(hit[i]);
    }
    bool joint = false;
    switch (mode.kind) {
      case JointMode::Kind::Union:
        joint = std::any_of(hit.begin(), hit.end(), [](char h) { return h != 0; });
        break;
      case JointMode::Kind::Intersection:
        joint = std::all_of(hit.begin(), hit.end(), [](char h) { return h != 0; });
        break;
      case JointMode::Kind::UnionOfIntersections:
        joint = std::any_of(mode.groups.begin(), mode.groups.end(), [&](const auto& g) {
          return std::all_of(g.begin(), g.end(), [&](int i) { return hit[static_cast<std::size_t>(i)] != 0; });
        });
        break;
      case JointMode::Kind::IntersectionOfUnions:
        joint = !mode.groups.empty() &&
                std::all_of(mode.groups.begin(), mode.groups.end(), [&](const auto& g) {
                  return std::any_of(g.begin(), g.end(),
                                     [&](int i) { return hit[static_cast<std::size_t>(i)] != 0; });
                });
        break;
    }
    est.hits += joint ? 1 : 0;
  }

  const double total = static_cast<double>(est.total);
  est.probability = static_cast<double>(est.hits) / total;
  double center = 0.0;
  const double half = wilson_half(est.probability, total, &center);
  est.wilson_lo = std::max(0.0, center - half);
  est.wilson_hi = std::min(1.0, center + half);

  double sum = 0.0;
  double max_p = 0.0;
  double min_p = 1.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double p = static_cast<double>(marginal_hits[i]) / total;
    est.marginals.push_back(p);
    sum += p;
    max_p = std::max(max_p, p);
    min_p = std::min(min_p, p);
  }
  if (mode.kind == JointMode::Kind::Union) {
    est.bound_lo = max_p;
    est.bound_hi = std::min(1.0, sum);
  } else if (mode.kind == JointMode::Kind::Intersection) {
    est.bound_lo = std::max(0.0, sum - static_cast<double>(pairs - 1));
    est.bound_hi = min_p;
  }
  est.bounds_hold = est.probability >= est.bound_lo - 1e-12 && est.probability <= est.bound_hi + 1e-12;
  return est;
}

UnionRiskEstimate union_delta_risk(const TrajectoryEnsemble& ens, const EventSpec& spec) {
  spec.validate();
  const int pairs = ens.pairs;
  std::vector<std::vector<double>> columns;
  for (int p = 0; p < pairs; ++p) columns.push_back(ens.pair_samples(p));

  const auto evaluate = [&](double level) {
    UnionRiskEstimate out;
    out.level = level;
    EventSpec local = spec;
    local.eps = level;
    std::vector<double> delta;
    for (const auto& col : columns) {
      out.delta.push_back(empirical_risk_from_samples(col, local));
      delta.push_back(out.delta.back().as_double());
    }
    out.joint = joint_event_probability(ens, {spec}, delta, JointMode::union_of_all());
    return out;
  };

  const double lo_level = spec.eps / pairs;
  UnionRiskEstimate best = evaluate(lo_level);
  if (pairs == 1) return best;
  UnionRiskEstimate top = evaluate(spec.eps);
  if (top.joint.probability < spec.eps) return top;
  double lo = lo_level;
  double hi = spec.eps;
  for (int it = 0; it < 50 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    UnionRiskEstimate cand = evaluate(mid);
    if (cand.joint.probability < spec.eps) {
      lo = mid;
      best = std::move(cand);
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace platoon
