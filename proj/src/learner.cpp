#include "cov/learner.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cov/random_features.hpp"
#include "cov/rf_model.hpp"

namespace cov {

namespace {

class GpLearner final : public DensityLearner {
 public:
  GpLearner(const LearnerParams& p, const DomainGrid& grid)
      : params_(p), grid_(grid), model_(make_hyper(p)) {
    model_.reserve(p.expected_points);
    model_.attach_grid(grid);
    sd_.resize(static_cast<std::size_t>(grid.cell_count()));
    refresh_sd();
  }

  void observe(std::span<const Point2> xs, std::span<const double> ys) override {
    if (params_.refit_per_step) {
      all_x_.insert(all_x_.end(), xs.begin(), xs.end());
      all_y_.insert(all_y_.end(), ys.begin(), ys.end());
      last_block_ = xs.size();
      refit();
      return;
    }
    if (params_.window_current) model_.reset();
    model_.add_block(xs, ys);
    refresh_sd();
  }

  std::span<const double> grid_mean() const override {
    return model_.grid_mean();
  }
  std::span<const double> grid_sd() const override {
    return {sd_.data(), sd_.size()};
  }
  double info_gain() const override { return model_.info_gain(); }
  std::size_t history_points() const override {
    return static_cast<std::size_t>(model_.size());
  }
  std::uint64_t anomalies() const override { return model_.jitter_events(); }
  std::string kind_name() const override { return "gp"; }

  void serialize(nlohmann::json& out) const override {
    const GpHyper& h = model_.hyper();
    out["kind"] = "gp";
    out["points"] = model_.size();
    out["tau"] = h.kernel.tau;
    out["signal_var"] = h.kernel.signal_var;
    out["noise_sq"] = h.noise_sq;
    out["rho"] = {h.rho[0], h.rho[1]};
    nlohmann::json xs = nlohmann::json::array();
    for (const Point2& p : model_.train_x()) xs.push_back({p.x, p.y});
    out["train_x"] = std::move(xs);
    out["train_y"] = std::vector<double>(model_.train_y().begin(),
                                         model_.train_y().end());
  }

 private:
  static GpHyper make_hyper(const LearnerParams& p) {
    GpHyper h;
    h.rho = p.rho;
    h.kernel = RbfKernel(p.tau, p.signal_var);
    h.noise_sq = p.noise_sq;
    return h;
  }

  void refit() {
    std::span<const Point2> fit_x(all_x_);
    std::span<const double> fit_y(all_y_);
    std::size_t last = all_x_.size();
    if (params_.window_current) {
      // only the newest block identifies the fit
      std::size_t b = last_block_;
      fit_x = fit_x.subspan(last - b);
      fit_y = fit_y.subspan(last - b);
    }
    GpFitResult r =
        fit_hyperparams(fit_x, fit_y, params_.noise_sq, params_.refit_search,
                        params_.rho, params_.tau, params_.signal_var);
    GpHyper h = model_.hyper();
    h.rho = r.rho;
    h.kernel.tau = r.tau;
    model_ = GpModel(h);
    model_.reserve(params_.expected_points);
    model_.attach_grid(grid_);
    if (params_.window_current)
      model_.add_block(fit_x, fit_y);
    else
      model_.add_block(all_x_, all_y_);
    refresh_sd();
  }

  void refresh_sd() {
    std::span<const double> var = model_.grid_var();
    for (std::size_t k = 0; k < var.size(); ++k) sd_[k] = std::sqrt(var[k]);
  }

  LearnerParams params_;
  DomainGrid grid_;
  GpModel model_;
  std::vector<Point2> all_x_;
  std::vector<double> all_y_;
  std::size_t last_block_ = 0;
  std::vector<double> sd_;
};

// Shared plumbing for the two random-feature learners: the frozen map, the
// feature matrix of all grid cells, the accumulated Gram matrix driving the
// information-gain metric, and the grid mean/sd buffers.
class RfLearnerBase : public DensityLearner {
 public:
  RfLearnerBase(const LearnerParams& p, const DomainGrid& grid)
      : params_(p),
        map_(RandomFeatureMap::sample(p.tau, p.feature_pairs, p.feature_seed)),
        grid_features_(map_.feature_matrix(grid.centers())),
        gram_(Eigen::MatrixXd::Zero(map_.dim(), map_.dim())),
        mean_(static_cast<std::size_t>(grid.cell_count())),
        sd_(static_cast<std::size_t>(grid.cell_count())) {}

  std::span<const double> grid_mean() const override {
    return {mean_.data(), mean_.size()};
  }
  std::span<const double> grid_sd() const override {
    return {sd_.data(), sd_.size()};
  }

  double info_gain() const override {
    // log det(I + (sv / noise) Phi^T Phi) over every measurement so far.
    const Eigen::Index d = gram_.rows();
    Eigen::MatrixXd a =
        (params_.signal_var / params_.noise_sq) * gram_ +
        Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  }

  std::size_t measurements_seen() const { return gram_count_; }

 protected:
  void accumulate_gram(const Eigen::MatrixXd& phi_rows) {
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(phi_rows.transpose());
    gram_ = gram_.selfadjointView<Eigen::Lower>();
    gram_count_ += static_cast<std::size_t>(phi_rows.rows());
  }

  void refresh_grid(const Eigen::VectorXd& theta, const Eigen::MatrixXd& sigma) {
    Eigen::VectorXd m = grid_features_.transpose() * theta;
    Eigen::MatrixXd h = sigma.selfadjointView<Eigen::Lower>() * grid_features_;
    Eigen::ArrayXd v =
        (grid_features_.array() * h.array()).colwise().sum().transpose();
    for (std::size_t k = 0; k < mean_.size(); ++k) {
      mean_[k] = m[static_cast<Eigen::Index>(k)];
      sd_[k] = std::sqrt(std::max(v[static_cast<Eigen::Index>(k)], 0.0));
    }
  }

  LearnerParams params_;
  RandomFeatureMap map_;
  Eigen::MatrixXd grid_features_;  // dim x cells
  Eigen::MatrixXd gram_;           // accumulated Phi^T Phi, never reset
  std::size_t gram_count_ = 0;
  std::vector<double> mean_;
  std::vector<double> sd_;
};

class RfBatchLearner final : public RfLearnerBase {
 public:
  RfBatchLearner(const LearnerParams& p, const DomainGrid& grid)
      : RfLearnerBase(p, grid) {
    rows_ = Eigen::MatrixXd(0, map_.dim());
    RfBatchFit prior = rf_batch_fit(rows_, Eigen::VectorXd(), p.ridge,
                                    p.signal_var);
    theta_ = std::move(prior.theta);
    sigma_ = std::move(prior.sigma);
    refresh_grid(theta_, sigma_);
  }

  void observe(std::span<const Point2> xs, std::span<const double> ys) override {
    if (xs.size() != ys.size())
      throw std::invalid_argument("rf learner: xs/ys size mismatch");
    Eigen::MatrixXd phi = map_.feature_matrix(xs).transpose();  // b x dim
    accumulate_gram(phi);
    if (params_.window_current) used_ = 0;
    const Eigen::Index b = phi.rows();
    if (used_ + b > rows_.rows()) {
      Eigen::Index cap = std::max<Eigen::Index>(2 * rows_.rows(), used_ + b);
      cap = std::max<Eigen::Index>(cap, 256);
      Eigen::MatrixXd grown(cap, map_.dim());
      if (used_ > 0) grown.topRows(used_) = rows_.topRows(used_);
      rows_.swap(grown);
      y_.conservativeResize(cap);
    }
    rows_.middleRows(used_, b) = phi;
    for (Eigen::Index j = 0; j < b; ++j)
      y_[used_ + j] = ys[static_cast<std::size_t>(j)];
    used_ += b;
    // Full refit from the stored window each step.
    RfBatchFit fit = rf_batch_fit(rows_.topRows(used_), y_.head(used_),
                                  params_.ridge, params_.signal_var);
    theta_ = std::move(fit.theta);
    sigma_ = std::move(fit.sigma);
    refresh_grid(theta_, sigma_);
  }

  std::size_t history_points() const override {
    return static_cast<std::size_t>(used_);
  }
  std::string kind_name() const override { return "rfgp"; }

  void serialize(nlohmann::json& out) const override {
    out["kind"] = "rfgp";
    out["feature_pairs"] = map_.pairs();
    out["feature_seed"] = map_.seed();
    out["tau"] = map_.tau();
    out["ridge"] = params_.ridge;
    out["signal_var"] = params_.signal_var;
    out["stored_points"] = static_cast<std::size_t>(used_);
    out["theta"] = std::vector<double>(theta_.data(), theta_.data() + theta_.size());
  }

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }

 private:
  Eigen::MatrixXd rows_;  // stored feature rows (the fit window)
  Eigen::VectorXd y_;
  Eigen::Index used_ = 0;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd sigma_;
};

class RfOnlineLearner final : public RfLearnerBase {
 public:
  RfOnlineLearner(const LearnerParams& p, const DomainGrid& grid)
      : RfLearnerBase(p, grid),
        state_(map_.dim(), p.signal_var, p.gain_noise_sq) {
    refresh_grid(state_.theta(), state_.sigma());
  }

  void observe(std::span<const Point2> xs, std::span<const double> ys) override {
    if (xs.size() != ys.size())
      throw std::invalid_argument("rf learner: xs/ys size mismatch");
    Eigen::MatrixXd phi = map_.feature_matrix(xs).transpose();
    accumulate_gram(phi);
    for (Eigen::Index j = 0; j < phi.rows(); ++j)
      state_.update(phi.row(j).transpose(), ys[static_cast<std::size_t>(j)]);
    refresh_grid(state_.theta(), state_.sigma());
  }

  std::size_t history_points() const override { return 0; }  // keeps none
  std::uint64_t anomalies() const override { return state_.updates_skipped(); }
  std::string kind_name() const override { return "orfgp"; }

  void serialize(nlohmann::json& out) const override {
    out["kind"] = "orfgp";
    out["feature_pairs"] = map_.pairs();
    out["feature_seed"] = map_.seed();
    out["tau"] = map_.tau();
    out["gain_noise_sq"] = params_.gain_noise_sq;
    out["signal_var"] = params_.signal_var;
    const Eigen::VectorXd& th = state_.theta();
    out["theta"] = std::vector<double>(th.data(), th.data() + th.size());
    const Eigen::MatrixXd& sg = state_.sigma();
    out["sigma"] = std::vector<double>(sg.data(), sg.data() + sg.size());
  }

  const RfOnline& state() const { return state_; }

 private:
  RfOnline state_;
};

}  // namespace

std::unique_ptr<DensityLearner> make_learner(const LearnerParams& params,
                                             const DomainGrid& grid) {
  switch (params.kind) {
    case LearnerKind::gp:
      return std::make_unique<GpLearner>(params, grid);
    case LearnerKind::rfgp:
      return std::make_unique<RfBatchLearner>(params, grid);
    case LearnerKind::orfgp:
      return std::make_unique<RfOnlineLearner>(params, grid);
  }
  throw std::invalid_argument("make_learner: unknown kind");
}

}  // namespace cov
