// Run instrumentation: reference coverage optimum via multi-start Lloyd,
// pointwise confidence coverage, field MSE, and information-gain bounds for
// the random-feature Gram matrix.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "cov/geometry.hpp"

namespace cov {

struct CvtReference {
  double cost = 0.0;
  std::vector<Point2> positions;
  int best_restart = -1;
  bool all_converged = true;
};

// Best locational cost over `restarts` Lloyd descents from uniformly drawn
// initial placements (seeded). tol defaults to h/10 inside.
CvtReference cvt_reference(std::span<const double> density,
                           const DomainGrid& grid, int robots, int restarts,
                           std::uint64_t seed, int max_iter = 500);

// max(cost - reference, 0); clipped flag reported via the pointer.
double regret(double cost, double reference_cost, bool* clipped = nullptr);

// Fraction of cells where |f - mu| <= sqrt(beta) * sd.
double confidence_coverage(std::span<const double> f,
                           std::span<const double> mu,
                           std::span<const double> sd, double beta);

double mean_squared_error(std::span<const double> f,
                          std::span<const double> mu);

// Upper bound for log det(I + c3 Phi^T Phi) given `pairs` sin/cos feature
// pairs and `measurements` unit-norm feature rows:
//   2 * pairs * log((pairs + c3 * measurements) / pairs).
double rf_info_gain_bound(int pairs, double c3, std::size_t measurements);

}  // namespace cov
