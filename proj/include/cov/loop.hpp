// The per-step coverage/learning cycle. Each step, in order:
//   1. build the clamped lower-confidence surrogate from the learner's
//      current grid posterior,
//   2. Voronoi partition + surrogate-weighted centroids at the current
//      positions, move every robot toward its centroid,
//   3. pick the exploration point (grid argmax of the posterior sd, ties to
//      the lowest cell index),
//   4. take one noisy field sample per robot at the new positions plus one
//      at the exploration point (exactly n+1 draws, fixed order),
//   5. feed the block to the learner,
//   6. record metrics (costs against the true and surrogate fields, regret
//      against a reference optimum when available, field MSE against the
//      updated mean, confidence coverage against the pre-update posterior,
//      information gain, wall time of the learner update).
// Without a learner the true field itself drives the control (known-field
// baseline); no measurements are consumed.
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "cov/fields.hpp"
#include "cov/geometry.hpp"
#include "cov/learner.hpp"
#include "cov/rng.hpp"

namespace cov {

struct BetaSchedule {
  enum class Mode { constant, theoretical };
  Mode mode = Mode::constant;
  double sqrt_beta = 1.0;  // constant mode
  double delta = 0.05;     // theoretical mode
  int domain_cells = 0;

  // t is the 1-based step index.
  double beta(int t) const;
};

namespace flag {
constexpr std::uint32_t empty_cell = 1u << 0;
constexpr std::uint32_t regret_clipped = 1u << 1;
constexpr std::uint32_t jitter = 1u << 2;
constexpr std::uint32_t degenerate_gain = 1u << 3;
constexpr std::uint32_t nonfinite_metric = 1u << 4;
}  // namespace flag

std::string flags_to_string(std::uint32_t flags);

struct StepRecord {
  int t = 0;
  double cost_true = 0.0;
  double cost_surrogate = 0.0;
  double regret = 0.0;
  double mse = 0.0;
  double gamma = 0.0;
  double coverage = 0.0;
  double update_ms = 0.0;
  std::uint32_t flags = 0;
  std::vector<Point2> positions;
};

struct LoopConfig {
  double kappa = 1.0;
  double dt = 1.0;
  int inner_steps = 1;
  bool recompute_centroids = false;
  double eps_pos = 1e-6;
  double noise_sd = 0.01;
  BetaSchedule beta;
  bool has_reference = false;
  double reference_cost = 0.0;
  bool emit_timing = false;
};

class Simulation {
 public:
  // learner may be null: the true field is used directly (known-field run).
  Simulation(const DomainGrid& grid, const AnalyticDensity& density,
             const LoopConfig& cfg, std::vector<Point2> initial_positions,
             std::unique_ptr<DensityLearner> learner, std::uint64_t noise_seed);

  StepRecord step();

  int t() const { return t_; }
  std::span<const Point2> positions() const {
    return {positions_.data(), positions_.size()};
  }
  const DensityLearner* learner() const { return learner_.get(); }
  const RngStream& noise_stream() const { return noise_; }
  const DomainGrid& grid() const { return grid_; }

 private:
  DomainGrid grid_;
  AnalyticDensity density_;
  GridFieldCache field_cache_;
  LoopConfig cfg_;
  std::unique_ptr<DensityLearner> learner_;
  RngStream noise_;
  int t_ = 0;
  std::vector<Point2> positions_;
  VoronoiPartition partition_;  // matches positions_; reused across steps
  std::uint64_t seen_anomalies_ = 0;
};

// Grid argmax with ties resolved to the lowest cell index.
int argmax_cell(std::span<const double> values);

}  // namespace cov
