// Scenario orchestration: set up grid/density/learner from a validated
// config, drive the simulation loop, and emit the run artifacts (metrics
// CSV, manifest JSON, final-state JSON). Also hosts the learner-update
// timing benchmark used for complexity checks.
#pragma once

#include <string>
#include <vector>

#include "cov/loop.hpp"
#include "cov/metrics.hpp"
#include "cov/scenario.hpp"

namespace cov {

struct RunOptions {
  std::string out_dir;  // empty: keep results in memory only
  const CvtReference* reference = nullptr;  // reuse a precomputed optimum
  bool echo_progress = false;  // stderr status line every 100 steps
};

struct RunOutcome {
  std::vector<StepRecord> records;
  bool has_reference = false;
  CvtReference reference;
  std::vector<Point2> initial_positions;  // after sampling, if sampled
  std::string hash;
  bool clean = true;  // no nonfinite metrics recorded
};

// Translation helpers shared by the runner and tests.
LearnerParams learner_params_from(const ScenarioConfig& cfg);
LoopConfig loop_config_from(const ScenarioConfig& cfg, int domain_cells,
                            bool has_reference, double reference_cost);

// Initial placement: the configured list, or `robots` uniform draws from
// the init seed.
std::vector<Point2> resolve_initial_positions(const ScenarioConfig& cfg);

// Multi-start Lloyd optimum of cfg's density at t = 0.
CvtReference compute_oracle(const ScenarioConfig& cfg);

// Runs cfg (validated here) for cfg.steps steps. With opts.out_dir set,
// writes run.csv / manifest.json / state.json there.
RunOutcome run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

// One CSV row per record, fixed column order:
//   t,cost_true,cost_surrogate,regret,mse,gamma,coverage_fraction,
//   update_ms,flags,x_0,y_0,...
std::string records_to_csv(const std::vector<StepRecord>& records, int robots);

struct BenchPoint {
  int history = 0;      // measurements already absorbed
  double median_ms = 0.0;  // per-update wall time at that history size
};

struct BenchSeries {
  std::string learner;
  std::vector<BenchPoint> points;
  double slope = 0.0;  // log-log least squares
};

// Per-update wall time vs. accumulated history for each learner kind,
// block size = robots + 1. Grid posteriors are not refreshed here; this
// isolates the model-update cost that the complexity table speaks to.
std::vector<BenchSeries> bench_scaling(const std::vector<std::string>& kinds,
                                       const std::vector<int>& history_points,
                                       const ScenarioConfig& base);

std::string bench_table(const std::vector<BenchSeries>& series);

}  // namespace cov
