// Bayesian linear regression in a random feature basis.
//
// Batch: given feature rows Phi (N x d) and targets y,
//   theta = (Phi^T Phi + ridge/sv I)^-1 Phi^T y
//   Sigma = (Phi^T Phi / ridge + I/sv)^-1
// which is the weight-space posterior with prior N(0, sv I) and observation
// noise variance `ridge`.
//
// Online: rank-one conditioning on one observation at a time,
//   s = phi^T Sigma phi + gain_noise_sq
//   theta += Sigma phi (y - phi^T theta) / s
//   Sigma -= Sigma phi phi^T Sigma / s
// With gain_noise_sq equal to the batch ridge, the recursion started from
// the prior reproduces the batch posterior exactly. gain_noise_sq = 0 is the
// aggressive interpolating variant; it can collapse Sigma to singularity,
// so updates with a non-positive (or numerically vanished) s are skipped
// and counted rather than applied.
#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace cov {

struct RfBatchFit {
  Eigen::VectorXd theta;
  Eigen::MatrixXd sigma;
};

// phi: N x d feature rows (N may be 0, giving the prior).
RfBatchFit rf_batch_fit(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                        double ridge, double signal_var);

class RfOnline {
 public:
  RfOnline(int dim, double signal_var, double gain_noise_sq);

  // Returns false when the update was skipped as degenerate.
  bool update(const Eigen::VectorXd& phi, double y);

  double mean(const Eigen::VectorXd& phi) const { return phi.dot(theta_); }
  double var(const Eigen::VectorXd& phi) const;

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  std::uint64_t updates_applied() const { return updates_; }
  std::uint64_t updates_skipped() const { return skipped_; }

 private:
  Eigen::VectorXd theta_;
  Eigen::MatrixXd sigma_;
  double gain_noise_sq_;
  double degenerate_floor_;
  std::uint64_t updates_ = 0;
  std::uint64_t skipped_ = 0;
};

}  // namespace cov
