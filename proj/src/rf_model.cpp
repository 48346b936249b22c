#include "cov/rf_model.hpp"

#include <stdexcept>

namespace cov {

RfBatchFit rf_batch_fit(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                        double ridge, double signal_var) {
  if (phi.rows() != y.size())
    throw std::invalid_argument("rf_batch_fit: phi/y size mismatch");
  if (!(ridge > 0.0) || !(signal_var > 0.0))
    throw std::invalid_argument("rf_batch_fit: ridge and prior must be > 0");
  const Eigen::Index d = phi.cols();
  RfBatchFit out;
  if (phi.rows() == 0) {
    out.theta = Eigen::VectorXd::Zero(d);
    out.sigma = signal_var * Eigen::MatrixXd::Identity(d, d);
    return out;
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::MatrixXd a = gram;
  a.diagonal().array() += ridge / signal_var;
  out.theta = a.llt().solve(phi.transpose() * y);

  Eigen::MatrixXd p = gram / ridge;
  p.diagonal().array() += 1.0 / signal_var;
  out.sigma = p.llt().solve(Eigen::MatrixXd::Identity(d, d));
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  return out;
}

RfOnline::RfOnline(int dim, double signal_var, double gain_noise_sq)
    : gain_noise_sq_(gain_noise_sq) {
  if (dim < 1) throw std::invalid_argument("rf online: dim must be >= 1");
  if (!(signal_var > 0.0))
    throw std::invalid_argument("rf online: prior variance must be > 0");
  if (gain_noise_sq < 0.0)
    throw std::invalid_argument("rf online: gain noise must be >= 0");
  theta_ = Eigen::VectorXd::Zero(dim);
  sigma_ = signal_var * Eigen::MatrixXd::Identity(dim, dim);
  degenerate_floor_ = 1e-14 * signal_var;
}

bool RfOnline::update(const Eigen::VectorXd& phi, double y) {
  if (phi.size() != theta_.size())
    throw std::invalid_argument("rf online: feature size mismatch");
  Eigen::VectorXd sp = sigma_.selfadjointView<Eigen::Lower>() * phi;
  double s = phi.dot(sp) + gain_noise_sq_;
  if (!(s > degenerate_floor_)) {
    // Direction already fully determined (possible only with zero gain
    // noise); applying the update would divide by ~0.
    ++skipped_;
    return false;
  }
  double innov = y - phi.dot(theta_);
  theta_.noalias() += sp * (innov / s);
  sigma_.noalias() -= sp * (sp.transpose() / s);
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
  ++updates_;
  return true;
}

double RfOnline::var(const Eigen::VectorXd& phi) const {
  double v = phi.dot(sigma_.selfadjointView<Eigen::Lower>() * phi);
  return v > 0.0 ? v : 0.0;
}

}  // namespace cov
