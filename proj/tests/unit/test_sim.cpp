#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "platoon/error.hpp"
#include "platoon/graph.hpp"
#include "platoon/risk.hpp"
#include "platoon/sim.hpp"
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

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

PlatoonModel complete_model(double g) {
  return PlatoonModel{make_complete(4, 2.0), 2.0, 0.1, g, 1.0};
}

}  // namespace

TEST_CASE("noise-free platoon converges to the target spacing and consensus velocity") {
  PlatoonModel model = complete_model(0.0);
  InitialState init;
  init.offset = {0.3, -0.2, 0.1, 0.4};
  init.velocity = {1.0, 0.0, 0.0, 0.0};
  const auto tr = simulate(model, 1e-3, 40.0, 1, init, 1000);
  CHECK(tr.model_stable);
  CHECK(tr.delay_steps == 100);
  CHECK(tr.t.size() == 41);
  const auto last = tr.x.rows() - 1;
  for (int i = 0; i < 3; ++i) CHECK(tr.x(last, i + 1) - tr.x(last, i) == doctest::Approx(1.0).epsilon(1e-8));
  for (int i = 0; i < 4; ++i) CHECK(tr.v(last, i) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(tr.x(0, 0) == doctest::Approx(1.3));
}

TEST_CASE("unstable platoons diverge") {
  PlatoonModel model{make_complete(5, 2.222), 2.2, 0.3, 0.0, 1.0};
  InitialState init;
  init.offset = {0.01, 0.0, 0.0, 0.0, 0.0};
  CHECK(code_of([&] { simulate(model, 1e-3, 400.0, 1, init, 1000); }) == Errc::NonfiniteState);
  const auto tr = simulate(model, 1e-3, 20.0, 1, init, 1000);
  CHECK_FALSE(tr.model_stable);
  CHECK(std::abs(tr.x(tr.x.rows() - 1, 1) - tr.x(tr.x.rows() - 1, 0) - 1.0) > 0.1);
}

TEST_CASE("timestep validation and delay rounding warnings") {
  const auto model = complete_model(0.5);
  CHECK(code_of([&] { simulate(model, 0.0, 10.0, 1); }) == Errc::InvalidTimestep);
  CHECK(code_of([&] { simulate(model, 0.25, 10.0, 1); }) == Errc::InvalidTimestep);
  CHECK(code_of([&] { simulate(model, 1e-3, 0.05, 1); }) == Errc::InvalidParameter);
  const auto tr = simulate(model, 0.03, 3.0, 1);
  REQUIRE(tr.warnings.size() == 1);
  CHECK(tr.warnings[0].find("delay buffer uses 3 steps") != std::string::npos);
  CHECK(tr.delay_steps == 3);
  CHECK(simulate(model, 0.01, 3.0, 1).warnings.empty());
}

TEST_CASE("simulation is deterministic per seed") {
  const auto model = complete_model(0.8);
  const auto a = simulate(model, 1e-3, 5.0, 42, {}, 50);
  const auto b = simulate(model, 1e-3, 5.0, 42, {}, 50);
  const auto c = simulate(model, 1e-3, 5.0, 43, {}, 50);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);

  SamplingOptions opts;
  opts.T = 30.0;
  opts.replicas = 3;
  opts.seed = 7;
  const auto e1 = steady_state_samples(model, opts);
  const auto e2 = steady_state_samples(model, opts);
  CHECK(e1.samples == e2.samples);
  CHECK(e1.replica == e2.replica);
  CHECK(e1.pairs == 3);
  CHECK(e1.stride == 100);
  CHECK(e1.burn_in == doctest::Approx(15.0));
  CHECK(e1.rows() == 3 * 150);
  CHECK(e1.replica.front() == 0);
  CHECK(e1.replica.back() == 2);
  CHECK(model_hash(model) == model_hash(complete_model(0.8)));
  CHECK(model_hash(model) != model_hash(complete_model(0.81)));
  opts.stride = 50;
  CHECK(code_of([&] { steady_state_samples(model, opts); }) == Errc::InvalidParameter);
}

TEST_CASE("replicas are statistically independent") {
  const auto model = complete_model(1.0);
  SamplingOptions opts;
  opts.T = 400.0;
  opts.burn_in = 10.0;
  opts.replicas = 2;
  opts.seed = 3;
  const auto ens = steady_state_samples(model, opts);
  const std::size_t half = ens.rows() / 2;
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t r = 0; r < half; ++r) {
    a.push_back(ens.at(r, 0));
    b.push_back(ens.at(r + half, 0));
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma) * (b[i] - mb);
  cov /= static_cast<double>(a.size() - 1);
  const double rho = cov / (std_of(a) * std_of(b));
  CHECK(std::abs(rho) < 5.0 / std::sqrt(static_cast<double>(a.size())));
}

TEST_CASE("steady-state spread matches the closed-form deviations") {
  const auto model = complete_model(1.0);
  SamplingOptions opts;
  opts.T = 2000.0;
  opts.burn_in = 10.0;
  opts.stride = 200;
  opts.replicas = 2;
  opts.seed = 11;
  const auto ens = steady_state_samples(model, opts);
  const auto md = sigma_vector(spectrum(model.graph), model.g, model.tau, model.beta);
  for (int p = 0; p < ens.pairs; ++p) {
    const auto col = ens.pair_samples(p);
    const double sigma = md.sigma[static_cast<std::size_t>(p)];
    CHECK(std::abs(mean_of(col) - 1.0) <= 0.05 * sigma);
    CHECK(std_of(col) == doctest::Approx(sigma).epsilon(0.05));
  }
}

TEST_CASE("empirical risk of Gaussian samples matches the analytic risk") {
  std::mt19937_64 rng(5);
  const double sigma = 0.3;
  std::normal_distribution<double> normal(1.0, sigma);
  std::vector<double> samples(1'000'000);
  for (auto& x : samples) x = normal(rng);
  const auto c = EventSpec::collision(1.0, 1.0, 0.05);
  const auto d = EventSpec::detachment(1.0, 2.0, 1.0, 0.05);
  const auto rc = empirical_risk_from_samples(samples, c);
  const auto rd = empirical_risk_from_samples(samples, d);
  CHECK(rc.as_double() == doctest::Approx(collision_risk(sigma, c).as_double()).epsilon(0.02));
  CHECK(rd.as_double() == doctest::Approx(detachment_risk(sigma, d).as_double()).epsilon(0.02));

  std::vector<double> wide(1000);
  for (auto& x : wide) x = std::normal_distribution<double>(1.0, 5.0)(rng);
  CHECK(empirical_risk_from_samples(wide, c).is_infinite());
  CHECK(code_of([&] { empirical_risk_from_samples(std::vector<double>(100, 1.0), c); }) ==
        Errc::InsufficientSamples);
}

TEST_CASE("joint event probabilities respect the Boole-Frechet bounds") {
  const auto model = complete_model(1.5);
  SamplingOptions opts;
  opts.T = 300.0;
  opts.burn_in = 5.0;
  opts.replicas = 2;
  opts.seed = 19;
  const auto ens = steady_state_samples(model, opts);
  const auto spec = EventSpec::collision(1.0, 1.0, 0.05);
  const std::vector<double> delta(3, 0.2);
  const auto u = joint_event_probability(ens, {spec}, delta, JointMode::union_of_all());
  const auto i = joint_event_probability(ens, {spec}, delta, JointMode::intersection_of_all());
  CHECK(u.bounds_hold);
  CHECK(i.bounds_hold);
  CHECK(u.probability >= i.probability);
  CHECK(u.wilson_lo <= u.probability);
  CHECK(u.wilson_hi >= u.probability);
  CHECK(u.total == ens.rows());
  CHECK(u.probability > 0.0);

  JointMode singletons{JointMode::Kind::UnionOfIntersections, {{0}, {1}, {2}}};
  CHECK(joint_event_probability(ens, {spec}, delta, singletons).hits == u.hits);
  JointMode one_group{JointMode::Kind::IntersectionOfUnions, {{0, 1, 2}}};
  CHECK(joint_event_probability(ens, {spec}, delta, one_group).hits == u.hits);

  const std::vector<double> inf_delta(3, std::numeric_limits<double>::infinity());
  CHECK(joint_event_probability(ens, {spec}, inf_delta, JointMode::union_of_all()).hits == 0);
  CHECK(code_of([&] { joint_event_probability(ens, {spec}, {0.1, -0.1, 0.1}, JointMode::union_of_all()); }) ==
        Errc::InvalidParameter);
  CHECK(code_of([&] { joint_event_probability(ens, {spec}, {0.1}, JointMode::union_of_all()); }) ==
        Errc::InvalidParameter);
}

TEST_CASE("union delta risk keeps the union probability below eps") {
  const auto model = complete_model(1.0);
  SamplingOptions opts;
  opts.T = 600.0;
  opts.burn_in = 5.0;
  opts.replicas = 2;
  opts.seed = 23;
  const auto ens = steady_state_samples(model, opts);
  const auto spec = EventSpec::collision(1.0, 1.0, 0.05);
  const auto est = union_delta_risk(ens, spec);
  CHECK(est.level >= spec.eps / 3.0);
  CHECK(est.level <= spec.eps);
  CHECK(est.joint.probability < spec.eps);
  CHECK(est.joint.bounds_hold);
  const auto marginal = empirical_risk(ens, spec);
  for (std::size_t i = 0; i < marginal.size(); ++i) CHECK(est.delta[i] >= marginal[i]);
}
