// Random Fourier feature map for the squared-exponential kernel.
// phi(x) = (1/sqrt(D)) [sin(v_1.x), cos(v_1.x), ..., sin(v_D.x), cos(v_D.x)]
// with v_i ~ N(0, tau^-2 I_2) frozen at construction. By construction
// ||phi(x)||^2 = 1 exactly and phi(x).phi(y) = (1/D) sum_i cos(v_i.(x-y)),
// an unbiased estimate of exp(-||x-y||^2 / (2 tau^2)).
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "cov/geometry.hpp"

namespace cov {

class RandomFeatureMap {
 public:
  // pairs = number of sin/cos pairs (feature dimension is 2 * pairs).
  static RandomFeatureMap sample(double tau, int pairs, std::uint64_t seed);

  int pairs() const { return static_cast<int>(freqs_.cols()); }
  int dim() const { return 2 * pairs(); }
  double tau() const { return tau_; }
  std::uint64_t seed() const { return seed_; }
  // Sample mean of ||v_i||^2; its expectation is 2 / tau^2.
  double mean_freq_norm_sq() const { return mean_freq_norm_sq_; }
  const Eigen::Matrix2Xd& frequencies() const { return freqs_; }

  Eigen::VectorXd features(Point2 x) const;
  void features_into(Point2 x, Eigen::Ref<Eigen::VectorXd> out) const;
  // Columns are feature vectors of the given points (dim x N).
  Eigen::MatrixXd feature_matrix(std::span<const Point2> pts) const;

  // phi(a).phi(b), evaluated as the paired-trig cosine sum.
  double approx_kbar(Point2 a, Point2 b) const;

 private:
  RandomFeatureMap() = default;
  Eigen::Matrix2Xd freqs_;
  double tau_ = 1.0;
  std::uint64_t seed_ = 0;
  double mean_freq_norm_sq_ = 0.0;
};

// Largest |phi(a).phi(b) - exp(-||a-b||^2/(2 tau^2))| over n_pairs point
// pairs drawn uniformly from the bounds (seeded, deterministic).
double kernel_approx_sup_error(const RandomFeatureMap& map,
                               const Bounds& bounds, int n_pairs,
                               std::uint64_t seed);

}  // namespace cov
