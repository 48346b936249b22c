// Exact Gaussian process regression with a linear prior mean rho.x and an
// RBF kernel. Data arrives in blocks; the Cholesky factor of K + noise*I is
// extended in place (O(m^2 b) per block instead of O(m^3) refactorizations).
// An optional grid cache maintains the posterior mean and variance over all
// grid cells across block updates: the variance is downdated with the
// posterior cross-covariance of each new block, which keeps a full-grid
// posterior affordable (O(m b G) per block) for long runs.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cov/geometry.hpp"
#include "cov/kernel.hpp"

namespace cov {

struct GpHyper {
  Eigen::Vector2d rho = Eigen::Vector2d::Zero();  // prior mean rho.x
  RbfKernel kernel;
  double noise_sq = 1e-4;
};

class GpModel {
 public:
  explicit GpModel(const GpHyper& hyper);

  const GpHyper& hyper() const { return hyper_; }
  int size() const { return m_; }

  // Pre-size internal buffers (avoids reallocation copies on long runs).
  void reserve(int points);

  void add_block(std::span<const Point2> xs, std::span<const double> ys);
  void reset();

  // Replace all data in one shot via a dense factorization; faster than
  // repeated small blocks when loading a large dataset at once. Not
  // supported with an attached grid cache.
  void bulk_load(std::span<const Point2> xs, std::span<const double> ys);

  struct Posterior {
    double mean = 0.0;
    double var = 0.0;
  };
  Posterior posterior(Point2 x) const;  // prior if no data

  // Full-grid posterior cache.
  void attach_grid(const DomainGrid& grid);
  bool has_grid() const { return grid_.has_value(); }
  std::span<const double> grid_mean() const;
  std::span<const double> grid_var() const;  // clamped at 0

  // log det(K + noise*I); 0 when empty.
  double log_det() const { return logdet_; }
  // 0.5 * log det(I + K / noise): information gain of the observation set.
  double info_gain() const;

  std::uint64_t jitter_events() const { return jitter_events_; }
  std::span<const Point2> train_x() const { return {xs_.data(), xs_.size()}; }
  std::span<const double> train_y() const {
    return {ys_.data(), static_cast<std::size_t>(m_)};
  }

 private:
  double prior_mean(Point2 p) const {
    return hyper_.rho[0] * p.x + hyper_.rho[1] * p.y;
  }
  void ensure_capacity(int new_m);
  // Column of k(train, p) for the current m points.
  void kernel_column(Point2 p, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd c);
  void rebuild_grid_cache();
  void refresh_solves();  // alpha and grid mean after a block append

  GpHyper hyper_;
  int m_ = 0;
  int cap_ = 0;
  std::vector<Point2> xs_;
  Eigen::ArrayXd xs_x_, xs_y_;  // train coordinates, vectorized kernel rows
  Eigen::VectorXd ys_;
  Eigen::MatrixXd lfac_;   // lower Cholesky of K + noise*I in top-left m x m
  Eigen::VectorXd white_;  // L^-1 (y - prior_mean)
  Eigen::VectorXd alpha_;  // (K + noise*I)^-1 (y - prior_mean)
  double logdet_ = 0.0;
  std::uint64_t jitter_events_ = 0;

  struct GridCache {
    DomainGrid grid;
    Eigen::ArrayXd gx, gy;       // cell center coordinates
    Eigen::VectorXd mu0;         // prior mean over cells
    Eigen::MatrixXd cross;       // G x m kernel between cells and data
    int cross_cap = 0;
    Eigen::VectorXd mean;
    Eigen::ArrayXd var;
  };
  std::optional<GridCache> grid_;
};

// Negative-log-likelihood hyperparameter fit: closed-form generalized
// least squares for rho at fixed tau, coarse log-spaced grid plus golden
// section refinement over tau. Returns the fallbacks (flagged degenerate)
// when the data cannot identify the parameters.
struct FitSearch {
  double tau_min = 0.02;
  double tau_max = 1.0;
  int grid_points = 12;
};

struct GpFitResult {
  Eigen::Vector2d rho = Eigen::Vector2d::Zero();
  double tau = 0.0;
  double nll = 0.0;
  bool degenerate = false;
};

GpFitResult fit_hyperparams(std::span<const Point2> xs,
                            std::span<const double> ys, double noise_sq,
                            const FitSearch& search,
                            const Eigen::Vector2d& fallback_rho,
                            double fallback_tau, double signal_var);

}  // namespace cov
