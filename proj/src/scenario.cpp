#include "cov/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

namespace cov {

AnalyticDensity ScenarioConfig::density() const {
  if (density_preset == "static") return benchmark_density_static();
  if (density_preset == "time_varying") return benchmark_density_time_varying();
  if (density_preset == "custom") {
    AnalyticDensity d;
    d.components = components;
    return d;
  }
  throw std::invalid_argument("config: unknown density preset '" +
                              density_preset + "'");
}

namespace {

const std::vector<Point2>& benchmark_positions() {
  static const std::vector<Point2> p = {
      {-0.8, -0.2}, {-0.8, 0.2}, {-0.4, -0.2}, {-0.4, 0.2}, {0.0, -0.2},
      {0.0, 0.2},   {0.4, -0.2}, {0.4, 0.2},   {0.8, -0.2}, {0.8, 0.2}};
  return p;
}

}  // namespace

ScenarioConfig default_config(const std::string& learner_kind) {
  ScenarioConfig cfg;
  cfg.learner = learner_kind;
  if (learner_kind == "gp") {
    // Prior scale sized to the benchmark field so the confidence band
    // covers it; theoretical schedule by default.
    cfg.signal_var = 8100.0;
    cfg.beta_mode = "theoretical";
  } else if (learner_kind == "rfgp") {
    cfg.feature_pairs = 20;
    cfg.signal_var = 5.0;
    cfg.beta_mode = "constant";
    cfg.sqrt_beta = 1e-3;
  } else if (learner_kind == "orfgp") {
    cfg.feature_pairs = 40;
    cfg.signal_var = 5.0;
    cfg.beta_mode = "constant";
    cfg.sqrt_beta = 1e5;
  } else if (learner_kind == "known") {
    cfg.beta_mode = "constant";
    cfg.sqrt_beta = 0.0;
  } else {
    throw std::invalid_argument("config: unknown learner kind '" +
                                learner_kind + "'");
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"paper-ti", "paper-tv", "paper-tv-gp-diverge"};
}

ScenarioConfig preset_config(const std::string& preset,
                             const std::string& learner_kind) {
  if (preset == "paper-ti") {
    ScenarioConfig cfg = default_config(learner_kind);
    cfg.initial_positions = benchmark_positions();
    cfg.density_preset = "static";
    cfg.steps = 500;
    cfg.oracle.enabled = true;
    if (learner_kind == "orfgp") cfg.gain_noise_sq = 1e-4;
    return cfg;
  }
  if (preset == "paper-tv") {
    ScenarioConfig cfg = default_config(learner_kind);
    cfg.initial_positions = benchmark_positions();
    cfg.density_preset = "time_varying";
    cfg.steps = 2000;
    cfg.oracle.enabled = false;
    if (learner_kind == "gp" || learner_kind == "rfgp")
      cfg.data_window = "current";
    if (learner_kind == "orfgp") cfg.gain_noise_sq = 1e-4;
    return cfg;
  }
  if (preset == "paper-tv-gp-diverge") {
    ScenarioConfig cfg = default_config("gp");
    cfg.initial_positions = benchmark_positions();
    cfg.density_preset = "time_varying";
    cfg.steps = 1000;
    cfg.h = 0.05;
    cfg.data_window = "all";
    cfg.oracle.enabled = false;
    // Noise level sized to the phase-mismatch scatter of the accumulated
    // data; with the raw sensor noise the stale-data model spends hundreds
    // of steps in a wild-oscillation transient that masks the monotone
    // degradation this scenario is meant to expose.
    cfg.noise_sd = 5.0;
    return cfg;
  }
  std::string known;
  for (const auto& n : preset_names()) known += " " + n;
  throw std::invalid_argument("config: unknown preset '" + preset +
                              "'; available:" + known);
}

namespace {

void expect_keys(const YAML::Node& n, const std::string& path,
                 std::initializer_list<const char*> keys) {
  if (!n.IsMap())
    throw std::invalid_argument("config: '" + path + "' must be a mapping");
  for (const auto& kv : n) {
    std::string k = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : keys)
      if (k == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config: unknown field '" + path + k + "'");
  }
}

template <typename T>
void take(const YAML::Node& n, const char* key, T& dst,
          const std::string& path) {
  const YAML::Node v = n[key];
  if (!v) return;
  try {
    dst = v.as<T>();
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument("config: bad value for '" + path + key +
                                "': " + e.what());
  }
}

Point2 parse_point(const YAML::Node& v, const std::string& path) {
  if (!v.IsSequence() || v.size() != 2)
    throw std::invalid_argument("config: '" + path +
                                "' must be a [x, y] pair");
  return {v[0].as<double>(), v[1].as<double>()};
}

}  // namespace

void overlay_yaml_file(ScenarioConfig& cfg, const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument("config: parse error in '" + path +
                                "': " + e.what());
  }
  if (root.IsNull()) return;
  expect_keys(root, "",
              {"domain", "robots", "learner", "noise_sd", "beta", "control",
               "density", "steps", "seeds", "oracle", "output"});

  if (const YAML::Node d = root["domain"]) {
    expect_keys(d, "domain.", {"xmin", "xmax", "ymin", "ymax", "h"});
    take(d, "xmin", cfg.bounds.xmin, "domain.");
    take(d, "xmax", cfg.bounds.xmax, "domain.");
    take(d, "ymin", cfg.bounds.ymin, "domain.");
    take(d, "ymax", cfg.bounds.ymax, "domain.");
    take(d, "h", cfg.h, "domain.");
  }
  if (const YAML::Node r = root["robots"]) {
    expect_keys(r, "robots.", {"count", "initial_positions"});
    take(r, "count", cfg.robots, "robots.");
    if (const YAML::Node ip = r["initial_positions"]) {
      if (!ip.IsSequence())
        throw std::invalid_argument(
            "config: 'robots.initial_positions' must be a list");
      cfg.initial_positions.clear();
      for (std::size_t i = 0; i < ip.size(); ++i)
        cfg.initial_positions.push_back(
            parse_point(ip[i], "robots.initial_positions[" +
                                   std::to_string(i) + "]"));
    }
  }
  if (const YAML::Node l = root["learner"]) {
    expect_keys(l, "learner.",
                {"kind", "data_window", "lengthscale", "signal_var",
                 "feature_pairs", "ridge", "gain_noise_sq", "rho", "refit",
                 "refit_search"});
    take(l, "kind", cfg.learner, "learner.");
    take(l, "data_window", cfg.data_window, "learner.");
    take(l, "lengthscale", cfg.lengthscale, "learner.");
    take(l, "signal_var", cfg.signal_var, "learner.");
    take(l, "feature_pairs", cfg.feature_pairs, "learner.");
    take(l, "ridge", cfg.ridge, "learner.");
    take(l, "gain_noise_sq", cfg.gain_noise_sq, "learner.");
    if (const YAML::Node rho = l["rho"]) {
      Point2 p = parse_point(rho, "learner.rho");
      cfg.rho[0] = p.x;
      cfg.rho[1] = p.y;
    }
    take(l, "refit", cfg.refit, "learner.");
    if (const YAML::Node rs = l["refit_search"]) {
      expect_keys(rs, "learner.refit_search.",
                  {"tau_min", "tau_max", "grid_points"});
      take(rs, "tau_min", cfg.refit_search.tau_min, "learner.refit_search.");
      take(rs, "tau_max", cfg.refit_search.tau_max, "learner.refit_search.");
      take(rs, "grid_points", cfg.refit_search.grid_points,
           "learner.refit_search.");
    }
  }
  take(root, "noise_sd", cfg.noise_sd, "");
  if (const YAML::Node b = root["beta"]) {
    expect_keys(b, "beta.", {"mode", "delta", "sqrt_beta"});
    take(b, "mode", cfg.beta_mode, "beta.");
    take(b, "delta", cfg.beta_delta, "beta.");
    take(b, "sqrt_beta", cfg.sqrt_beta, "beta.");
  }
  if (const YAML::Node c = root["control"]) {
    expect_keys(c, "control.",
                {"kappa", "dt", "inner_steps", "recompute_centroids",
                 "eps_pos"});
    take(c, "kappa", cfg.kappa, "control.");
    take(c, "dt", cfg.dt, "control.");
    take(c, "inner_steps", cfg.inner_steps, "control.");
    take(c, "recompute_centroids", cfg.recompute_centroids, "control.");
    take(c, "eps_pos", cfg.eps_pos, "control.");
  }
  if (const YAML::Node d = root["density"]) {
    expect_keys(d, "density.", {"preset", "components"});
    take(d, "preset", cfg.density_preset, "density.");
    if (const YAML::Node cs = d["components"]) {
      if (!cs.IsSequence())
        throw std::invalid_argument(
            "config: 'density.components' must be a list");
      cfg.components.clear();
      for (std::size_t i = 0; i < cs.size(); ++i) {
        std::string p = "density.components[" + std::to_string(i) + "].";
        expect_keys(cs[i], p,
                    {"amplitude", "mean", "sxx", "syy", "mod_depth",
                     "mod_rate"});
        GaussianComponent g;
        take(cs[i], "amplitude", g.amplitude, p);
        if (const YAML::Node m = cs[i]["mean"])
          g.mean = parse_point(m, p + "mean");
        take(cs[i], "sxx", g.sxx, p);
        take(cs[i], "syy", g.syy, p);
        take(cs[i], "mod_depth", g.mod_depth, p);
        take(cs[i], "mod_rate", g.mod_rate, p);
        cfg.components.push_back(g);
      }
    }
  }
  take(root, "steps", cfg.steps, "");
  if (const YAML::Node s = root["seeds"]) {
    expect_keys(s, "seeds.", {"noise", "features", "init", "oracle"});
    take(s, "noise", cfg.seeds.noise, "seeds.");
    take(s, "features", cfg.seeds.features, "seeds.");
    take(s, "init", cfg.seeds.init, "seeds.");
    take(s, "oracle", cfg.seeds.oracle, "seeds.");
  }
  if (const YAML::Node o = root["oracle"]) {
    expect_keys(o, "oracle.", {"enabled", "restarts", "max_iterations"});
    take(o, "enabled", cfg.oracle.enabled, "oracle.");
    take(o, "restarts", cfg.oracle.restarts, "oracle.");
    take(o, "max_iterations", cfg.oracle.max_iterations, "oracle.");
  }
  if (const YAML::Node o = root["output"]) {
    expect_keys(o, "output.", {"emit_timing"});
    take(o, "emit_timing", cfg.emit_timing, "output.");
  }
}

std::string peek_learner_kind(const std::string& path,
                              const std::string& fallback) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument("config: parse error in '" + path +
                                "': " + e.what());
  }
  if (root.IsMap() && root["learner"] && root["learner"].IsMap() &&
      root["learner"]["kind"])
    return root["learner"]["kind"].as<std::string>();
  return fallback;
}

void validate(const ScenarioConfig& cfg) {
  std::vector<std::string> problems;
  auto bad = [&](const std::string& msg) { problems.push_back(msg); };

  try {
    build_grid(cfg.bounds, cfg.h);
  } catch (const std::exception& e) {
    bad(e.what());
  }
  if (cfg.robots < 1) bad("robots.count must be >= 1");
  if (!cfg.initial_positions.empty()) {
    if (static_cast<int>(cfg.initial_positions.size()) != cfg.robots)
      bad("robots.initial_positions must list exactly robots.count points");
    for (const Point2& p : cfg.initial_positions)
      if (!cfg.bounds.contains(p)) {
        bad("robots.initial_positions must lie inside the domain");
        break;
      }
  }
  const bool is_rf = cfg.learner == "rfgp" || cfg.learner == "orfgp";
  if (cfg.learner != "gp" && !is_rf && cfg.learner != "known")
    bad("learner.kind must be gp, rfgp, orfgp, or known");
  if (cfg.data_window != "all" && cfg.data_window != "current")
    bad("learner.data_window must be all or current");
  if (!(cfg.lengthscale > 0.0)) bad("learner.lengthscale must be > 0");
  if (!(cfg.signal_var > 0.0)) bad("learner.signal_var must be > 0");
  if (is_rf && cfg.feature_pairs < 1)
    bad("learner.feature_pairs must be >= 1");
  if (!(cfg.ridge > 0.0)) bad("learner.ridge must be > 0");
  if (cfg.refit != "none" && cfg.refit != "per_step")
    bad("learner.refit must be none or per_step");
  if (cfg.refit == "per_step" && cfg.learner != "gp")
    bad("learner.refit is only available for the gp learner");
  if (cfg.refit == "per_step") {
    if (!(cfg.refit_search.tau_min > 0.0) ||
        !(cfg.refit_search.tau_max > cfg.refit_search.tau_min) ||
        cfg.refit_search.grid_points < 2)
      bad("learner.refit_search is ill-formed");
  }
  if (!(cfg.noise_sd >= 0.0)) bad("noise_sd must be >= 0");
  if (cfg.beta_mode == "constant") {
    if (cfg.sqrt_beta < 0.0) bad("beta.sqrt_beta must be >= 0");
  } else if (cfg.beta_mode == "theoretical") {
    if (!(cfg.beta_delta > 0.0) || !(cfg.beta_delta < 1.0))
      bad("beta.delta must be in (0, 1)");
  } else {
    bad("beta.mode must be constant or theoretical");
  }
  double gain = cfg.kappa * cfg.dt;
  if (!(gain > 0.0) || gain > 1.0) bad("control: kappa*dt must be in (0, 1]");
  if (cfg.inner_steps < 1) bad("control.inner_steps must be >= 1");
  if (!(cfg.eps_pos > 0.0)) bad("control.eps_pos must be > 0");
  if (cfg.density_preset == "custom") {
    try {
      AnalyticDensity d;
      d.components = cfg.components;
      validate_density(d);
    } catch (const std::exception& e) {
      bad(e.what());
    }
  } else if (cfg.density_preset == "static" ||
             cfg.density_preset == "time_varying") {
    if (!cfg.components.empty())
      bad("density.components is only valid with preset: custom");
  } else {
    bad("density.preset must be static, time_varying, or custom");
  }
  if (cfg.steps < 1) bad("steps must be >= 1");
  if (cfg.oracle.restarts < 1) bad("oracle.restarts must be >= 1");
  if (cfg.oracle.max_iterations < 1) bad("oracle.max_iterations must be >= 1");

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string canonical_dump(const ScenarioConfig& cfg) {
  std::ostringstream o;
  o << "domain:{xmin:" << fmt(cfg.bounds.xmin) << ",xmax:" << fmt(cfg.bounds.xmax)
    << ",ymin:" << fmt(cfg.bounds.ymin) << ",ymax:" << fmt(cfg.bounds.ymax)
    << ",h:" << fmt(cfg.h) << "}\n";
  o << "robots:{count:" << cfg.robots << ",initial_positions:[";
  for (std::size_t i = 0; i < cfg.initial_positions.size(); ++i) {
    if (i) o << ",";
    o << "[" << fmt(cfg.initial_positions[i].x) << ","
      << fmt(cfg.initial_positions[i].y) << "]";
  }
  o << "]}\n";
  o << "learner:{kind:" << cfg.learner << ",data_window:" << cfg.data_window
    << ",lengthscale:" << fmt(cfg.lengthscale)
    << ",signal_var:" << fmt(cfg.signal_var)
    << ",feature_pairs:" << cfg.feature_pairs << ",ridge:" << fmt(cfg.ridge)
    << ",gain_noise_sq:" << fmt(cfg.gain_noise_sq) << ",rho:["
    << fmt(cfg.rho[0]) << "," << fmt(cfg.rho[1]) << "],refit:" << cfg.refit
    << ",refit_search:{tau_min:" << fmt(cfg.refit_search.tau_min)
    << ",tau_max:" << fmt(cfg.refit_search.tau_max)
    << ",grid_points:" << cfg.refit_search.grid_points << "}}\n";
  o << "noise_sd:" << fmt(cfg.noise_sd) << "\n";
  o << "beta:{mode:" << cfg.beta_mode << ",delta:" << fmt(cfg.beta_delta)
    << ",sqrt_beta:" << fmt(cfg.sqrt_beta) << "}\n";
  o << "control:{kappa:" << fmt(cfg.kappa) << ",dt:" << fmt(cfg.dt)
    << ",inner_steps:" << cfg.inner_steps
    << ",recompute_centroids:" << (cfg.recompute_centroids ? "true" : "false")
    << ",eps_pos:" << fmt(cfg.eps_pos) << "}\n";
  o << "density:{preset:" << cfg.density_preset << ",components:[";
  for (std::size_t i = 0; i < cfg.components.size(); ++i) {
    const GaussianComponent& g = cfg.components[i];
    if (i) o << ",";
    o << "{amplitude:" << fmt(g.amplitude) << ",mean:[" << fmt(g.mean.x) << ","
      << fmt(g.mean.y) << "],sxx:" << fmt(g.sxx) << ",syy:" << fmt(g.syy)
      << ",mod_depth:" << fmt(g.mod_depth) << ",mod_rate:" << fmt(g.mod_rate)
      << "}";
  }
  o << "]}\n";
  o << "steps:" << cfg.steps << "\n";
  o << "seeds:{noise:" << cfg.seeds.noise << ",features:" << cfg.seeds.features
    << ",init:" << cfg.seeds.init << ",oracle:" << cfg.seeds.oracle << "}\n";
  o << "oracle:{enabled:" << (cfg.oracle.enabled ? "true" : "false")
    << ",restarts:" << cfg.oracle.restarts
    << ",max_iterations:" << cfg.oracle.max_iterations << "}\n";
  o << "output:{emit_timing:" << (cfg.emit_timing ? "true" : "false") << "}\n";
  return o.str();
}

std::string config_hash(const ScenarioConfig& cfg) {
  std::string s = canonical_dump(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cov
