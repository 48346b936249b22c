// Squared-exponential kernel k(a,b) = sv * exp(-||a-b||^2 / (2 tau^2)).
#pragma once

#include <cmath>
#include <stdexcept>

#include "cov/geometry.hpp"

namespace cov {

struct RbfKernel {
  double tau = 1.0;        // lengthscale
  double signal_var = 1.0; // prior variance, k(x,x)

  RbfKernel() = default;
  RbfKernel(double tau_, double signal_var_)
      : tau(tau_), signal_var(signal_var_) {
    if (!(tau > 0.0)) throw std::invalid_argument("kernel: tau must be > 0");
    if (!(signal_var > 0.0))
      throw std::invalid_argument("kernel: signal variance must be > 0");
  }

  // Correlation in [0, 1].
  double kbar(Point2 a, Point2 b) const {
    return std::exp(-dist_sq(a, b) / (2.0 * tau * tau));
  }
  double operator()(Point2 a, Point2 b) const { return signal_var * kbar(a, b); }
};

}  // namespace cov
