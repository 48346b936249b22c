#include "cov/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "cov/rng.hpp"

namespace cov {

CvtReference cvt_reference(std::span<const double> density,
                           const DomainGrid& grid, int robots, int restarts,
                           std::uint64_t seed, int max_iter) {
  if (robots < 1) throw std::invalid_argument("cvt_reference: robots < 1");
  if (restarts < 1) throw std::invalid_argument("cvt_reference: restarts < 1");
  RngStream rng(seed);
  const Bounds& b = grid.bounds;
  const double tol = grid.h / 10.0;
  CvtReference best;
  for (int r = 0; r < restarts; ++r) {
    std::vector<Point2> start(static_cast<std::size_t>(robots));
    for (auto& p : start)
      p = {rng.uniform_in(b.xmin, b.xmax), rng.uniform_in(b.ymin, b.ymax)};
    LloydResult res = lloyd_descend(start, density, grid, 1.0, tol, max_iter);
    if (!res.converged) best.all_converged = false;
    if (best.best_restart < 0 || res.cost < best.cost) {
      best.cost = res.cost;
      best.positions = res.positions;
      best.best_restart = r;
    }
  }
  return best;
}

double regret(double cost, double reference_cost, bool* clipped) {
  double r = cost - reference_cost;
  if (clipped) *clipped = r < 0.0;
  return r > 0.0 ? r : 0.0;
}

double confidence_coverage(std::span<const double> f,
                           std::span<const double> mu,
                           std::span<const double> sd, double beta) {
  if (f.size() != mu.size() || f.size() != sd.size())
    throw std::invalid_argument("confidence_coverage: size mismatch");
  if (f.empty()) return 1.0;
  double sb = std::sqrt(beta);
  std::size_t inside = 0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (std::abs(f[k] - mu[k]) <= sb * sd[k]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(f.size());
}

double mean_squared_error(std::span<const double> f,
                          std::span<const double> mu) {
  if (f.size() != mu.size())
    throw std::invalid_argument("mean_squared_error: size mismatch");
  if (f.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double d = f[k] - mu[k];
    acc += d * d;
  }
  return acc / static_cast<double>(f.size());
}

double rf_info_gain_bound(int pairs, double c3, std::size_t measurements) {
  if (pairs < 1) throw std::invalid_argument("info gain bound: pairs < 1");
  double d = static_cast<double>(pairs);
  return 2.0 * d *
         std::log((d + c3 * static_cast<double>(measurements)) / d);
}

}  // namespace cov
