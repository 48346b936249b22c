#include "cov/loop.hpp"

#include <chrono>
#include <stdexcept>

#include "cov/metrics.hpp"

namespace cov {

double BetaSchedule::beta(int t) const {
  if (t < 1) throw std::invalid_argument("beta: step index must be >= 1");
  if (mode == Mode::constant) {
    if (sqrt_beta < 0.0)
      throw std::invalid_argument("beta: sqrt_beta must be >= 0");
    return sqrt_beta * sqrt_beta;
  }
  if (domain_cells < 1)
    throw std::invalid_argument("beta: domain cell count not set");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("beta: delta must be in (0, 1)");
  constexpr double pi_sq = 9.869604401089358;
  double td = static_cast<double>(t);
  return 2.0 * std::log(static_cast<double>(domain_cells) * td * td * pi_sq /
                        (6.0 * delta));
}

std::string flags_to_string(std::uint32_t flags) {
  static constexpr std::pair<std::uint32_t, const char*> names[] = {
      {flag::empty_cell, "empty_cell"},
      {flag::regret_clipped, "regret_clipped"},
      {flag::jitter, "jitter"},
      {flag::degenerate_gain, "degenerate_gain"},
      {flag::nonfinite_metric, "nonfinite_metric"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (flags & bit) {
      if (!out.empty()) out += ';';
      out += name;
    }
  }
  return out;
}

int argmax_cell(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax_cell: empty");
  int best = 0;
  double best_v = values[0];
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > best_v) {  // strict: ties keep the lowest index
      best_v = values[k];
      best = static_cast<int>(k);
    }
  }
  return best;
}

Simulation::Simulation(const DomainGrid& grid, const AnalyticDensity& density,
                       const LoopConfig& cfg,
                       std::vector<Point2> initial_positions,
                       std::unique_ptr<DensityLearner> learner,
                       std::uint64_t noise_seed)
    : grid_(grid),
      density_(density),
      field_cache_(density_, grid_),
      cfg_(cfg),
      learner_(std::move(learner)),
      noise_(noise_seed),
      positions_(std::move(initial_positions)) {
  validate_density(density_);
  if (positions_.empty())
    throw std::invalid_argument("simulation: no initial positions");
  for (auto& p : positions_) {
    if (!grid_.bounds.contains(p))
      throw std::invalid_argument("simulation: initial position outside domain");
  }
  if (cfg_.inner_steps < 1)
    throw std::invalid_argument("simulation: inner_steps must be >= 1");
  if (!(cfg_.noise_sd >= 0.0))
    throw std::invalid_argument("simulation: noise_sd must be >= 0");
  partition_ = assign_voronoi(positions_, grid_);
}

StepRecord Simulation::step() {
  const int t = t_ + 1;
  StepRecord rec;
  rec.t = t;
  const std::vector<double>& f_t = field_cache_.values(static_cast<double>(t));
  const double beta = cfg_.beta.beta(t);

  // (1) surrogate from the pre-update posterior (or the true field).
  std::vector<double> surrogate;
  int explore_cell = -1;
  if (learner_) {
    std::span<const double> mu_pre = learner_->grid_mean();
    std::span<const double> sd_pre = learner_->grid_sd();
    surrogate = confidence_lower_bound(mu_pre, sd_pre, beta, cfg_.eps_pos);
    rec.coverage = confidence_coverage(f_t, mu_pre, sd_pre, beta);
    explore_cell = argmax_cell(sd_pre);
  } else {
    surrogate.assign(f_t.begin(), f_t.end());
    rec.coverage = 1.0;
  }

  // (2) move toward surrogate-weighted centroids.
  CentroidResult cr = centroids(partition_, surrogate, positions_, grid_);
  if (cr.any_empty) rec.flags |= flag::empty_cell;
  positions_ =
      control_step(positions_, cr.centroids, cfg_.kappa, cfg_.dt, grid_.bounds);
  for (int inner = 1; inner < cfg_.inner_steps; ++inner) {
    if (cfg_.recompute_centroids) {
      partition_ = assign_voronoi(positions_, grid_);
      cr = centroids(partition_, surrogate, positions_, grid_);
      if (cr.any_empty) rec.flags |= flag::empty_cell;
    }
    positions_ = control_step(positions_, cr.centroids, cfg_.kappa, cfg_.dt,
                              grid_.bounds);
  }

  // (3)-(5) sample the field and update the learner.
  if (learner_) {
    std::vector<Point2> sample_at = positions_;
    sample_at.push_back(grid_.center(explore_cell));
    std::vector<double> ys(sample_at.size());
    for (std::size_t i = 0; i < sample_at.size(); ++i)
      ys[i] = density_.eval(sample_at[i], static_cast<double>(t)) +
              cfg_.noise_sd * noise_.normal();
    auto t0 = std::chrono::steady_clock::now();
    learner_->observe(sample_at, ys);
    auto t1 = std::chrono::steady_clock::now();
    if (cfg_.emit_timing)
      rec.update_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    std::uint64_t anomalies = learner_->anomalies();
    if (anomalies != seen_anomalies_) {
      seen_anomalies_ = anomalies;
      rec.flags |= (learner_->kind_name() == "gp") ? flag::jitter
                                                   : flag::degenerate_gain;
    }
  }

  // (6) metrics at the new positions.
  partition_ = assign_voronoi(positions_, grid_);
  rec.cost_true = locational_cost(positions_, partition_, f_t, grid_);
  rec.cost_surrogate =
      locational_cost(positions_, partition_, surrogate, grid_);
  if (cfg_.has_reference) {
    bool clipped = false;
    rec.regret = regret(rec.cost_true, cfg_.reference_cost, &clipped);
    if (clipped) rec.flags |= flag::regret_clipped;
  }
  if (learner_) {
    rec.mse = mean_squared_error(f_t, learner_->grid_mean());
    rec.gamma = learner_->info_gain();
  }
  for (double* v : {&rec.cost_true, &rec.cost_surrogate, &rec.regret, &rec.mse,
                    &rec.gamma, &rec.coverage}) {
    if (!std::isfinite(*v)) {
      rec.flags |= flag::nonfinite_metric;
      *v = *v > 0 ? 1e300 : -1e300;  // keep the CSV parseable
    }
  }
  rec.positions = positions_;
  t_ = t;
  return rec;
}

}  // namespace cov
