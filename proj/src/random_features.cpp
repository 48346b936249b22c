#include "cov/random_features.hpp"

#include <cmath>
#include <stdexcept>

#include "cov/rng.hpp"

namespace cov {

RandomFeatureMap RandomFeatureMap::sample(double tau, int pairs,
                                          std::uint64_t seed) {
  if (!(tau > 0.0))
    throw std::invalid_argument("feature map: tau must be > 0");
  if (pairs < 1)
    throw std::invalid_argument("feature map: needs at least one pair");
  RandomFeatureMap m;
  m.tau_ = tau;
  m.seed_ = seed;
  m.freqs_.resize(2, pairs);
  RngStream rng(seed);
  double acc = 0.0;
  for (int i = 0; i < pairs; ++i) {
    // Spectral density of the kernel: N(0, tau^-2 I).
    double vx = rng.normal() / tau;
    double vy = rng.normal() / tau;
    m.freqs_(0, i) = vx;
    m.freqs_(1, i) = vy;
    acc += vx * vx + vy * vy;
  }
  m.mean_freq_norm_sq_ = acc / pairs;
  return m;
}

void RandomFeatureMap::features_into(Point2 x,
                                     Eigen::Ref<Eigen::VectorXd> out) const {
  const int d = pairs();
  if (out.size() != 2 * d)
    throw std::invalid_argument("feature map: output size mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) {
    double a = freqs_(0, i) * x.x + freqs_(1, i) * x.y;
    out[2 * i] = scale * std::sin(a);
    out[2 * i + 1] = scale * std::cos(a);
  }
}

Eigen::VectorXd RandomFeatureMap::features(Point2 x) const {
  Eigen::VectorXd v(dim());
  features_into(x, v);
  return v;
}

Eigen::MatrixXd RandomFeatureMap::feature_matrix(
    std::span<const Point2> pts) const {
  Eigen::MatrixXd m(dim(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j)
    features_into(pts[j], m.col(static_cast<Eigen::Index>(j)));
  return m;
}

double RandomFeatureMap::approx_kbar(Point2 a, Point2 b) const {
  // sin s sin t + cos s cos t = cos(s - t), summed over pairs.
  const int d = pairs();
  double dx = a.x - b.x, dy = a.y - b.y;
  double acc = 0.0;
  for (int i = 0; i < d; ++i)
    acc += std::cos(freqs_(0, i) * dx + freqs_(1, i) * dy);
  return acc / d;
}

double kernel_approx_sup_error(const RandomFeatureMap& map,
                               const Bounds& bounds, int n_pairs,
                               std::uint64_t seed) {
  if (n_pairs < 1)
    throw std::invalid_argument("sup error: n_pairs must be >= 1");
  RngStream rng(seed);
  const double inv2t2 = 1.0 / (2.0 * map.tau() * map.tau());
  double worst = 0.0;
  for (int p = 0; p < n_pairs; ++p) {
    Point2 a{rng.uniform_in(bounds.xmin, bounds.xmax),
             rng.uniform_in(bounds.ymin, bounds.ymax)};
    Point2 b{rng.uniform_in(bounds.xmin, bounds.xmax),
             rng.uniform_in(bounds.ymin, bounds.ymax)};
    double exact = std::exp(-dist_sq(a, b) * inv2t2);
    double err = std::abs(map.approx_kbar(a, b) - exact);
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace cov
