// Field learners behind a common interface: each consumes measurement
// blocks and maintains the posterior mean / standard deviation over the
// whole grid, which is what the coverage loop consumes every step.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "json.hpp"

#include "cov/geometry.hpp"
#include "cov/gp.hpp"

namespace cov {

enum class LearnerKind { gp, rfgp, orfgp };

struct LearnerParams {
  LearnerKind kind = LearnerKind::orfgp;
  bool window_current = false;  // fit only the newest block (gp / rfgp)
  // Kernel / prior.
  double tau = 0.2;
  double signal_var = 5.0;
  double noise_sq = 1e-4;  // measurement noise variance
  Eigen::Vector2d rho = Eigen::Vector2d::Zero();
  // Random-feature learners.
  int feature_pairs = 40;
  double ridge = 0.1;          // batch regularizer
  double gain_noise_sq = 0.1;  // online gain noise term
  std::uint64_t feature_seed = 2;
  // Optional per-step hyperparameter refit (gp only).
  bool refit_per_step = false;
  FitSearch refit_search;
  // Sizing hint: expected total number of measurements.
  int expected_points = 0;
};

class DensityLearner {
 public:
  virtual ~DensityLearner() = default;
  virtual void observe(std::span<const Point2> xs,
                       std::span<const double> ys) = 0;
  virtual std::span<const double> grid_mean() const = 0;
  virtual std::span<const double> grid_sd() const = 0;
  virtual double info_gain() const = 0;
  virtual std::size_t history_points() const = 0;
  virtual std::uint64_t anomalies() const { return 0; }
  virtual std::string kind_name() const = 0;
  virtual void serialize(nlohmann::json& out) const = 0;
};

std::unique_ptr<DensityLearner> make_learner(const LearnerParams& params,
                                             const DomainGrid& grid);

}  // namespace cov
