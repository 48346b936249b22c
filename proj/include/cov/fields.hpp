// Analytic density fields: sums of axis-aligned Gaussian bumps with
// optionally sinusoidally modulated amplitudes, plus the clamped lower
// confidence surrogate used to drive coverage on a learned field.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cov/geometry.hpp"

namespace cov {

// amplitude(t) = amplitude * (1 + mod_depth * sin(mod_rate * t));
// shape(q) = exp(-(sxx*(qx-mx)^2 + syy*(qy-my)^2)).
struct GaussianComponent {
  double amplitude = 1.0;
  Point2 mean;
  double sxx = 1.0;
  double syy = 1.0;
  double mod_depth = 0.0;  // in [-1, 1] so the amplitude stays >= 0
  double mod_rate = 0.0;

  double amplitude_at(double t) const {
    return amplitude * (1.0 + mod_depth * std::sin(mod_rate * t));
  }
  double shape(Point2 q) const {
    double dx = q.x - mean.x, dy = q.y - mean.y;
    return std::exp(-(sxx * dx * dx + syy * dy * dy));
  }
};

struct AnalyticDensity {
  std::vector<GaussianComponent> components;

  bool time_varying() const {
    for (const auto& c : components)
      if (c.mod_depth != 0.0 && c.mod_rate != 0.0) return true;
    return false;
  }
  double eval(Point2 q, double t = 0.0) const {
    double f = 0.0;
    for (const auto& c : components) f += c.amplitude_at(t) * c.shape(q);
    return f;
  }
};

// Throws if any component has a negative base amplitude, |mod_depth| > 1,
// or a non-positive shape coefficient.
void validate_density(const AnalyticDensity& d);

// Six-bump benchmark field on [-1.6,1.6]x[-1,1]; the time-varying variant
// swaps mass between the two wide horizontal bands at rate 0.12/step.
AnalyticDensity benchmark_density_static();
AnalyticDensity benchmark_density_time_varying();

// Per-component shapes cached over a grid so f_t on the whole grid is a
// cheap amplitude-weighted sum (exact, not an approximation).
class GridFieldCache {
 public:
  GridFieldCache() = default;
  GridFieldCache(const AnalyticDensity& density, const DomainGrid& grid);

  // Field values over the grid at time t (fixed cell order).
  const std::vector<double>& values(double t) const;

 private:
  const AnalyticDensity* density_ = nullptr;
  int cells_ = 0;
  bool time_varying_ = false;
  std::vector<std::vector<double>> shapes_;  // per component
  mutable std::vector<double> buffer_;
  mutable double cached_t_ = 0.0;
  mutable bool cache_valid_ = false;
};

// max(mu - sqrt(beta) * sd, floor), elementwise. floor must be positive so
// the result is a valid density for centroid computations.
std::vector<double> confidence_lower_bound(std::span<const double> mu,
                                           std::span<const double> sd,
                                           double beta, double floor);

}  // namespace cov
