#include "cov/fields.hpp"

#include <algorithm>
#include <stdexcept>

namespace cov {

void validate_density(const AnalyticDensity& d) {
  if (d.components.empty())
    throw std::invalid_argument("density: needs at least one component");
  for (const auto& c : d.components) {
    if (c.amplitude < 0.0)
      throw std::invalid_argument("density: negative amplitude");
    if (std::abs(c.mod_depth) > 1.0)
      throw std::invalid_argument("density: |mod_depth| must be <= 1");
    if (!(c.sxx > 0.0) || !(c.syy > 0.0))
      throw std::invalid_argument("density: shape coefficients must be > 0");
  }
}

namespace {
AnalyticDensity six_bump_base() {
  auto sq = [](double v) { return v * v; };
  AnalyticDensity d;
  d.components = {
      {150.0, {1.3, -0.75}, sq(0.3), sq(0.8), 0.0, 0.0},
      {150.0, {-1.2, 0.7}, sq(0.3), sq(0.8), 0.0, 0.0},
      {150.0, {1.0, 0.8}, sq(0.8), sq(0.4), 0.0, 0.0},
      {150.0, {-1.0, -0.8}, sq(0.4), sq(0.8), 0.0, 0.0},
      {50.0, {-1.0, -0.8}, sq(0.85), sq(0.2), 0.0, 0.0},
      {50.0, {1.0, 0.8}, sq(0.85), sq(0.2), 0.0, 0.0},
  };
  return d;
}
}  // namespace

AnalyticDensity benchmark_density_static() { return six_bump_base(); }

AnalyticDensity benchmark_density_time_varying() {
  AnalyticDensity d = six_bump_base();
  d.components[4].mod_depth = 1.0;
  d.components[4].mod_rate = 0.12;
  d.components[5].mod_depth = -1.0;
  d.components[5].mod_rate = 0.12;
  return d;
}

GridFieldCache::GridFieldCache(const AnalyticDensity& density,
                               const DomainGrid& grid)
    : density_(&density),
      cells_(grid.cell_count()),
      time_varying_(density.time_varying()) {
  shapes_.resize(density.components.size());
  for (std::size_t c = 0; c < density.components.size(); ++c) {
    auto& s = shapes_[c];
    s.resize(static_cast<std::size_t>(cells_));
    for (int k = 0; k < cells_; ++k)
      s[static_cast<std::size_t>(k)] =
          density.components[c].shape(grid.center(k));
  }
  buffer_.resize(static_cast<std::size_t>(cells_));
}

const std::vector<double>& GridFieldCache::values(double t) const {
  if (cache_valid_ && (!time_varying_ || cached_t_ == t)) return buffer_;
  std::fill(buffer_.begin(), buffer_.end(), 0.0);
  for (std::size_t c = 0; c < shapes_.size(); ++c) {
    double a = density_->components[c].amplitude_at(t);
    const auto& s = shapes_[c];
    for (int k = 0; k < cells_; ++k)
      buffer_[static_cast<std::size_t>(k)] +=
          a * s[static_cast<std::size_t>(k)];
  }
  cached_t_ = t;
  cache_valid_ = true;
  return buffer_;
}

std::vector<double> confidence_lower_bound(std::span<const double> mu,
                                           std::span<const double> sd,
                                           double beta, double floor) {
  if (mu.size() != sd.size())
    throw std::invalid_argument("confidence_lower_bound: size mismatch");
  if (!(floor > 0.0))
    throw std::invalid_argument("confidence_lower_bound: floor must be > 0");
  if (beta < 0.0)
    throw std::invalid_argument("confidence_lower_bound: beta must be >= 0");
  double sb = std::sqrt(beta);
  std::vector<double> out(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k)
    out[k] = std::max(mu[k] - sb * sd[k], floor);
  return out;
}

}  // namespace cov
