// Run configuration: defaults, built-in presets, strict YAML loading
// (unknown keys are errors), validation, and a canonical dump + hash used
// to fingerprint runs in the output manifest.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cov/fields.hpp"
#include "cov/geometry.hpp"
#include "cov/gp.hpp"

namespace cov {

struct ScenarioConfig {
  // Domain discretization.
  Bounds bounds{-1.6, 1.6, -1.0, 1.0};
  double h = 0.02;

  // Team.
  int robots = 10;
  std::vector<Point2> initial_positions;  // empty: sampled from the init seed

  // Learner. kind: gp | rfgp | orfgp | known.
  std::string learner = "orfgp";
  std::string data_window = "all";  // all | current (gp / rfgp)
  double lengthscale = 0.2;
  double signal_var = 5.0;
  int feature_pairs = 40;
  double ridge = 0.1;           // batch regularizer tau_rf
  double gain_noise_sq = -1.0;  // online gain noise; < 0 means "use ridge"
  double rho[2] = {0.0, 0.0};   // gp linear prior mean
  std::string refit = "none";   // none | per_step
  FitSearch refit_search;

  double noise_sd = 0.01;

  // Confidence scaling.
  std::string beta_mode = "constant";  // constant | theoretical
  double beta_delta = 0.05;
  double sqrt_beta = 1e5;

  // Control law.
  double kappa = 1.0;
  double dt = 1.0;
  int inner_steps = 1;
  bool recompute_centroids = false;
  double eps_pos = 1e-6;

  // Field. preset: static | time_varying | custom.
  std::string density_preset = "static";
  std::vector<GaussianComponent> components;

  int steps = 500;

  struct Seeds {
    std::uint64_t noise = 1;
    std::uint64_t features = 2;
    std::uint64_t init = 3;
    std::uint64_t oracle = 4;
  } seeds;

  struct Oracle {
    bool enabled = false;
    int restarts = 50;
    int max_iterations = 500;
  } oracle;

  bool emit_timing = false;

  double effective_gain_noise_sq() const {
    return gain_noise_sq < 0.0 ? ridge : gain_noise_sq;
  }
  AnalyticDensity density() const;
};

// Defaults appropriate for the chosen learner kind.
ScenarioConfig default_config(const std::string& learner_kind);

// Built-in presets: paper-ti, paper-tv, paper-tv-gp-diverge.
// paper-tv-gp-diverge pins the learner itself; the others honor
// learner_kind.
ScenarioConfig preset_config(const std::string& preset,
                             const std::string& learner_kind);
std::vector<std::string> preset_names();

// Strict overlay of a YAML file onto cfg: every key must be known and
// well-typed; parse errors carry file/line context. Defaults are
// kind-dependent, so resolve the kind first (peek_learner_kind), build the
// base via default_config/preset_config, then overlay.
void overlay_yaml_file(ScenarioConfig& cfg, const std::string& path);

// learner.kind from the file, or fallback when absent. Tolerates any file
// that YAML can parse; full checking happens in overlay_yaml_file.
std::string peek_learner_kind(const std::string& path,
                              const std::string& fallback);

// Throws std::invalid_argument listing every problem found.
void validate(const ScenarioConfig& cfg);

// Fixed-order, fixed-format dump; equal configs give equal strings.
std::string canonical_dump(const ScenarioConfig& cfg);
// FNV-1a 64-bit over the canonical dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace cov
