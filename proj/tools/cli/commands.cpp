#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "platoon/approx.hpp"
#include "platoon/error.hpp"
#include "platoon/sim.hpp"
#include "platoon/special.hpp"
#include "platoon/stability.hpp"
#include "platoon/variance.hpp"

namespace platoon::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<EventSpec> collision_events(const RunConfig& cfg) {
  std::vector<EventSpec> out;
  for (const auto& e : cfg.events) {
    if (e.kind == EventKind::Collision) out.push_back(e);
  }
  return out;
}

SamplingOptions sampling_options(const RunConfig& cfg) {
  SamplingOptions o;
  o.dt = cfg.simulate.dt;
  o.T = cfg.simulate.T;
  o.burn_in = cfg.simulate.burn_in;
  o.stride = cfg.simulate.stride;
  o.replicas = cfg.simulate.replicas;
  o.seed = cfg.seed;
  o.initial = initial_state(cfg);
  return o;
}

// Standard error of the mean from 50 contiguous batches.
double batch_standard_error(const std::vector<double>& x) {
  const std::size_t batches = 50;
  const std::size_t size = x.size() / batches;
  if (size == 0) return kInf;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    const auto first = x.begin() + static_cast<std::ptrdiff_t>(b * size);
    means.push_back(std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / size);
  }
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double ss = 0.0;
  for (double m : means) ss += (m - mu) * (m - mu);
  return std::sqrt(ss / (batches - 1) / batches);
}

}  // namespace

std::string event_label(const EventSpec& spec) {
  return std::string(spec.kind == EventKind::Collision ? "collision" : "detachment") + "_eps" +
         format_number(spec.eps, 6);
}

Report cmd_spectrum(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const Spectrum s = spectrum(build_graph(m));
  const auto verdict = platoon_stable(s, m.beta, m.tau);
  Report r;
  r.add("n", static_cast<double>(s.size()));
  r.add("effective_resistance", effective_resistance(s));
  r.add("stable", verdict.stable ? 1.0 : 0.0);
  r.columns = {"mode", "eigenvalue", "s1", "s2", "in_S", "margin"};
  r.rows.push_back({1.0, s.lambda(0), 0.0, m.beta * m.tau, std::string("n/a"), std::string("n/a")});
  for (const auto& mc : verdict.modes) {
    r.rows.push_back({static_cast<double>(mc.mode), s.lambda(mc.mode - 1), mc.s1, mc.s2,
                      mc.in_s ? 1.0 : 0.0, mc.margin});
  }
  return r;
}

Report cmd_stability(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const Spectrum s = spectrum(build_graph(m));
  const auto verdict = platoon_stable(s, m.beta, m.tau);
  const double s2 = m.beta * m.tau;
  Report r;
  r.add("stable", verdict.stable ? 1.0 : 0.0);
  r.add("effective_resistance", effective_resistance(s));
  if (m.tau > 0.0 && s2 < 1.0) {
    r.add("theta", theta(s2));
    r.add("resistance_lower_bound", resistance_lower_bound(s.size(), m.beta, m.tau));
  }
  r.columns = {"mode", "s1", "s2", "upper_edge", "margin", "in_S"};
  for (const auto& mc : verdict.modes) {
    const bool defined = mc.s1 > 0.0 && mc.s1 < std::numbers::pi / 2;
    r.rows.push_back({static_cast<double>(mc.mode), mc.s1, mc.s2,
                      defined ? Cell(region_upper_edge(mc.s1)) : Cell(std::string("n/a")), mc.margin,
                      mc.in_s ? 1.0 : 0.0});
  }
  return r;
}

Report cmd_risk(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const Spectrum s = spectrum(build_graph(m));
  const auto md = sigma_vector(s, m.g, m.tau, m.beta);
  Report r;
  r.add("sigma_star", sigma_star(m.g, m.tau));
  r.columns = {"pair", "sigma"};
  for (const auto& e : cfg.events) {
    r.add(event_label(e) + "_threshold", infinite_threshold(e));
    r.columns.push_back(event_label(e) + "_threshold");
    r.columns.push_back(event_label(e) + "_risk");
  }
  for (std::size_t i = 0; i < md.sigma.size(); ++i) {
    std::vector<Cell> row = {static_cast<double>(i + 1), md.sigma[i]};
    for (const auto& e : cfg.events) {
      row.push_back(infinite_threshold(e));
      row.push_back(risk_cell(event_risk(md.sigma[i], e)));
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

Report cmd_joint_risk(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const Spectrum s = spectrum(build_graph(m));
  const auto md = sigma_vector(s, m.g, m.tau, m.beta);
  Report r;
  r.columns = {"event", "pair", "sigma", "V_lo", "V_hi", "W_lo", "W_hi"};
  for (const auto& e : cfg.events) {
    const auto boxes = joint_risk_boxes(md, e, cfg.split);
    for (std::size_t i = 0; i < md.sigma.size(); ++i) {
      r.rows.push_back({event_label(e), static_cast<double>(i + 1), md.sigma[i],
                        risk_cell(boxes.v_box[i].lo), risk_cell(boxes.v_box[i].hi),
                        risk_cell(boxes.w_box[i].lo), risk_cell(boxes.w_box[i].hi)});
    }
  }
  return r;
}

Report cmd_limits(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const int n = build_graph(m).size();
  const auto& fm = f_min();
  Report r;
  r.columns = {"quantity", "value"};
  const auto row = [&r](const std::string& k, Cell v) { r.rows.push_back({k, std::move(v)}); };
  row("f_min", fm.value);
  row("f_min_s1", fm.s1);
  row("f_min_s2", fm.s2);
  row("sigma_star", sigma_star(m.g, m.tau));
  row("collision_limit_constant", collision_limit_constant());
  for (const auto& e : collision_events(cfg)) {
    row(event_label(e) + "_lower_bound", risk_cell(collision_risk_lower_bound(m.g, m.tau, e)));
  }
  const double bound = resistance_lower_bound(n, m.beta, m.tau);
  row("theta", theta(m.beta * m.tau));
  row("resistance_lower_bound", bound);
  return r;
}

Report cmd_tradeoff(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const Spectrum s = spectrum(build_graph(m));
  const auto md = sigma_vector(s, m.g, m.tau, m.beta);
  const double xi = effective_resistance(s);
  Report r;
  r.add("effective_resistance", xi);
  r.columns = {"event", "pair", "sigma", "risk", "risk_sqrt_xi", "bound", "hypothesis", "holds"};
  for (const auto& e : collision_events(cfg)) {
    const auto terms = tradeoff_terms(s.size(), m.g, m.tau, m.beta, e);
    r.add(event_label(e) + "_bound", terms.bound);
    r.add(event_label(e) + "_e_lower", terms.e_lower);
    r.add(event_label(e) + "_series", terms.series);
    r.add(event_label(e) + "_terms", static_cast<double>(terms.terms));
    const double top = infinite_threshold(e);
    for (std::size_t i = 0; i < md.sigma.size(); ++i) {
      const RiskValue risk = collision_risk(md.sigma[i], e);
      const double lhs = risk.as_double() * std::sqrt(xi);
      const bool hyp = md.sigma[i] < top;
      r.rows.push_back({event_label(e), static_cast<double>(i + 1), md.sigma[i], risk_cell(risk), lhs,
                        terms.bound, hyp ? 1.0 : 0.0,
                        hyp ? Cell(lhs > terms.bound ? 1.0 : 0.0) : Cell(std::string("n/a"))});
    }
  }
  return r;
}

Report cmd_sweep(const RunConfig& cfg) {
  const auto& sw = cfg.sweep;
  if (sw.variable.empty()) throw ConfigError("sweep needs a 'sweep' section with a variable");
  if (sw.values.empty()) throw ConfigError("sweep grid is empty");
  Report r;
  r.add("variable", sw.variable);
  r.columns = {sw.variable, "pair", "stable", "sigma"};
  for (const auto& e : cfg.events) r.columns.push_back(event_label(e) + "_risk");
  for (double value : sw.values) {
    ModelConfig m = cfg.model;
    if (sw.variable == "tau") m.tau = value;
    if (sw.variable == "n") m.n = static_cast<int>(std::lround(value));
    if (sw.variable == "p") m.p = static_cast<int>(std::lround(value));
    if (sw.variable == "gamma") m.gamma = value;
    if (sw.variable == "b") m.b = value;
    if (sw.variable == "gain_scale") m.gain_scale = value;
    const Spectrum s = spectrum(build_graph(m));
    const bool stable = platoon_stable(s, m.beta, m.tau).stable;
    std::vector<double> sigma(static_cast<std::size_t>(s.size() - 1), kInf);
    if (stable) sigma = sigma_vector(s, m.g, m.tau, m.beta).sigma;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      std::vector<Cell> row = {value, static_cast<double>(i + 1), stable ? 1.0 : 0.0, sigma[i]};
      for (const auto& e : cfg.events) {
        EventSpec local = e;
        local.d = m.d;
        row.push_back(stable ? risk_cell(event_risk(sigma[i], local)) : Cell(kInf));
      }
      r.rows.push_back(std::move(row));
    }
  }
  return r;
}

Report cmd_fit_approx(const RunConfig& cfg) {
  const auto scan = error_scan(cfg.fit.m1, cfg.fit.m2);
  const auto alpha = averaged_alphas();
  Report r;
  r.add("max_eta", scan.max_eta);
  r.add("argmax_s1", scan.argmax_s1);
  r.add("argmax_s2", scan.argmax_s2);
  for (std::size_t k = 0; k < alpha.size(); ++k) r.add("alpha" + std::to_string(k) + "_avg", alpha[k]);
  r.columns = {"s1", "s2", "f_exact", "f_tilde", "eta"};
  for (const auto& smp : scan.samples) r.rows.push_back({smp.s1, smp.s2, smp.f_exact, smp.f_tilde, smp.eta});
  return r;
}

Report cmd_validate(const RunConfig& cfg) {
  const PlatoonModel model = build_model(cfg.model);
  const Spectrum s = spectrum(model.graph);
  const auto md = sigma_vector(s, model.g, model.tau, model.beta);
  const auto ens = steady_state_samples(model, sampling_options(cfg));

  Report r;
  r.add("samples_per_pair", static_cast<double>(ens.rows()));
  r.columns = {"check", "pair", "measured", "reference", "deviation", "tolerance", "pass"};
  bool all = true;
  const auto check = [&](const std::string& name, double pair, double measured, double reference,
                         double deviation, double tol) {
    const bool ok = deviation <= tol;
    all = all && ok;
    r.rows.push_back({name, pair, measured, reference, deviation, tol, ok ? 1.0 : 0.0});
  };

  for (int p = 0; p < ens.pairs; ++p) {
    const auto x = ens.pair_samples(p);
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const double sigma = md.sigma[static_cast<std::size_t>(p)];
    check("std_vs_closed_form", p + 1, sd, sigma, std::abs(sd / sigma - 1.0), 0.05);
    const double se = batch_standard_error(x);
    check("mean_vs_spacing", p + 1, mean, model.d, std::abs(mean - model.d) / se, 3.0);
  }

  for (const auto& e : cfg.events) {
    const auto closed = risk_vector(md, e);
    const auto empirical = empirical_risk(ens, e);
    std::vector<double> delta;
    for (std::size_t i = 0; i < closed.size(); ++i) {
      delta.push_back(closed[i].as_double());
      if (!closed[i].is_finite() || !empirical[i].is_finite()) continue;
      const double c = closed[i].as_double();
      const double m = empirical[i].as_double();
      check(event_label(e) + "_risk", static_cast<double>(i + 1), m, c, std::abs(m / c - 1.0), 0.10);
    }
    const auto joint = joint_event_probability(ens, {e}, delta, JointMode::union_of_all());
    check(event_label(e) + "_union_boole_frechet", 0.0, joint.probability, joint.bound_hi,
          joint.bounds_hold ? 0.0 : 1.0, 0.0);
  }

  SamplingOptions small = sampling_options(cfg);
  small.T = std::min(cfg.simulate.T, std::max(20.0 * model.tau, 1.0) + small.burn_in.value_or(0.0));
  small.replicas = 2;
  const auto a = steady_state_samples(model, small);
  const auto b = steady_state_samples(model, small);
  check("determinism", 0.0, static_cast<double>(a.samples == b.samples), 1.0,
        a.samples == b.samples && a.time == b.time ? 0.0 : 1.0, 0.0);

  r.add("all_passed", all ? 1.0 : 0.0);
  return r;
}

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string format = "csv";
  int digits = 6;
  bool no_timestamp = false;
};

void emit(const std::string& text, const Options& opt, std::ostream& out) {
  if (opt.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + opt.out + "'");
  f << text;
}

void run_simulate(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  const PlatoonModel model = build_model(cfg.model);
  const auto ens = steady_state_samples(model, sampling_options(cfg));
  for (const auto& w : ens.warnings) err << "warning: " << w << "\n";
  if (!ens.model_stable) err << "warning: model is outside the stability region\n";

  Report r;
  r.add("seed", std::to_string(ens.seed));
  r.add("model_hash", hex64(model_hash(model)));
  r.columns = {"replica", "t", "pair_index", "rel_distance"};
  for (std::size_t row = 0; row < ens.rows(); ++row) {
    for (int p = 0; p < ens.pairs; ++p) {
      r.rows.push_back({static_cast<double>(ens.replica[row]), ens.time[row],
                        static_cast<double>(p + 1), ens.at(row, p)});
    }
  }
  emit(render(r, Format::Csv, opt.digits, !opt.no_timestamp), opt, out);

  nlohmann::ordered_json meta;
  meta["seed"] = ens.seed;
  meta["dt"] = ens.dt;
  meta["T"] = ens.T;
  meta["burn_in"] = ens.burn_in;
  meta["stride"] = ens.stride;
  meta["replicas"] = ens.replica_count;
  meta["n"] = model.graph.size();
  meta["model_hash"] = hex64(model_hash(model));
  meta["model_stable"] = ens.model_stable;
  meta["rows"] = ens.rows();
  meta["warnings"] = ens.warnings;
  if (!opt.out.empty()) {
    std::ofstream f(opt.out + ".meta.json", std::ios::binary);
    f << meta.dump(2) << "\n";
  } else {
    err << meta.dump() << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Value-at-risk analysis for delayed stochastic vehicle platoons", "platoon-risk"};
  Options opt;
  app.add_option("--config", opt.config, "JSON run configuration");
  app.add_option("--seed", opt.seed, "Random seed (overrides the config)")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  app.add_option("--out", opt.out, "Write the report to this path");
  app.add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--digits", opt.digits, "Significant digits")->check(CLI::Range(1, 17));
  app.add_flag("--no-timestamp", opt.no_timestamp, "Omit the generation timestamp");
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> names = {
      {"spectrum", "Eigenvalues, effective resistance and per-mode stability"},
      {"stability", "Stability-region membership and delay limits"},
      {"risk", "Marginal deviations and collision/detachment risk per pair"},
      {"joint-risk", "Joint-risk boxes"},
      {"limits", "Hard limits imposed by delay and noise"},
      {"tradeoff", "Risk-connectivity trade-off bound"},
      {"sweep", "Sweep one model variable"},
      {"fit-approx", "Fit the rational surrogate and scan its error"},
      {"simulate", "Monte-Carlo ensemble of steady-state relative distances"},
      {"validate", "Closed form vs Monte-Carlo cross-checks"}};
  for (const auto& [name, help] : names) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = opt.config.empty() ? default_config() : load_config(opt.config);
    if (opt.seed_set) cfg.seed = opt.seed;
    if (command == "simulate") {
      run_simulate(cfg, opt, out, err);
      return kOk;
    }
    static const std::map<std::string, std::function<Report(const RunConfig&)>> table = {
        {"spectrum", cmd_spectrum},   {"stability", cmd_stability}, {"risk", cmd_risk},
        {"joint-risk", cmd_joint_risk}, {"limits", cmd_limits},     {"tradeoff", cmd_tradeoff},
        {"sweep", cmd_sweep},         {"fit-approx", cmd_fit_approx}, {"validate", cmd_validate}};
    const Report report = table.at(command)(cfg);
    emit(render(report, opt.format == "json" ? Format::Json : Format::Csv, opt.digits, !opt.no_timestamp),
         opt, out);
    if (command == "validate") {
      for (const auto& [k, v] : report.summary) {
        if (k == "all_passed" && std::get<double>(v) != 1.0) {
          err << "validation failed\n";
          return kFailure;
        }
      }
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace platoon::cli
