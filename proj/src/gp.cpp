#include "cov/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cov {

GpModel::GpModel(const GpHyper& hyper) : hyper_(hyper) {
  if (!(hyper_.noise_sq > 0.0))
    throw std::invalid_argument("gp: noise variance must be > 0");
}

void GpModel::reserve(int points) {
  if (points > cap_) ensure_capacity(points);
}

void GpModel::ensure_capacity(int new_m) {
  if (new_m <= cap_) return;
  int new_cap = std::max({2 * cap_, new_m, 64});
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(new_cap, new_cap);
  if (m_ > 0) l.topLeftCorner(m_, m_) = lfac_.topLeftCorner(m_, m_);
  lfac_.swap(l);
  xs_x_.conservativeResize(new_cap);
  xs_y_.conservativeResize(new_cap);
  ys_.conservativeResize(new_cap);
  white_.conservativeResize(new_cap);
  cap_ = new_cap;
  if (grid_ && grid_->cross_cap < new_cap) {
    Eigen::MatrixXd c(grid_->grid.cell_count(), new_cap);
    if (m_ > 0) c.leftCols(m_) = grid_->cross.leftCols(m_);
    grid_->cross.swap(c);
    grid_->cross_cap = new_cap;
  }
}

void GpModel::kernel_column(Point2 p, Eigen::Ref<Eigen::VectorXd> out) const {
  const double inv2t2 = 1.0 / (2.0 * hyper_.kernel.tau * hyper_.kernel.tau);
  out.array() = hyper_.kernel.signal_var *
                (-((xs_x_.head(m_) - p.x).square() +
                   (xs_y_.head(m_) - p.y).square()) *
                 inv2t2)
                    .exp();
}

Eigen::MatrixXd GpModel::cholesky_with_jitter(Eigen::MatrixXd c) {
  double scale = c.diagonal().mean();
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) {
      if (attempt > 0) ++jitter_events_;
      return llt.matrixL();
    }
    jitter = (jitter == 0.0) ? 1e-12 * std::max(scale, 1.0) : jitter * 100.0;
    c.diagonal().array() += jitter;
  }
  throw std::runtime_error("gp: block factorization failed (singular update)");
}

void GpModel::add_block(std::span<const Point2> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("gp: xs/ys size mismatch");
  if (xs.empty()) return;
  const int b = static_cast<int>(xs.size());
  const int m0 = m_;
  ensure_capacity(m0 + b);

  Eigen::MatrixXd kob(m0, b);  // kernel(old, new)
  for (int j = 0; j < b; ++j)
    if (m0 > 0) kernel_column(xs[j], kob.col(j));
  Eigen::MatrixXd c(b, b);  // kernel(new, new) + noise
  for (int j = 0; j < b; ++j) {
    for (int i = 0; i < b; ++i)
      c(i, j) = hyper_.kernel(xs[static_cast<std::size_t>(i)],
                              xs[static_cast<std::size_t>(j)]);
    c(j, j) += hyper_.noise_sq;
  }

  Eigen::MatrixXd bmat;  // L^-1 kob
  if (m0 > 0) {
    bmat = kob;
    lfac_.topLeftCorner(m0, m0).triangularView<Eigen::Lower>().solveInPlace(
        bmat);
    c.noalias() -= bmat.transpose() * bmat;
  }
  Eigen::MatrixXd lb = cholesky_with_jitter(std::move(c));

  if (grid_) {
    GridCache& gc = *grid_;
    const int cells = gc.grid.cell_count();
    const double inv2t2 = 1.0 / (2.0 * hyper_.kernel.tau * hyper_.kernel.tau);
    Eigen::MatrixXd kgb(cells, b);
    for (int j = 0; j < b; ++j)
      kgb.col(j).array() = hyper_.kernel.signal_var *
                           (-((gc.gx - xs[static_cast<std::size_t>(j)].x).square() +
                              (gc.gy - xs[static_cast<std::size_t>(j)].y).square()) *
                            inv2t2)
                               .exp();
    // Posterior (pre-update) cross covariance between cells and the block.
    Eigen::MatrixXd cg = kgb;
    if (m0 > 0) {
      Eigen::MatrixXd s = bmat;  // A^-1 kob = L^-T (L^-1 kob)
      lfac_.topLeftCorner(m0, m0)
          .transpose()
          .triangularView<Eigen::Upper>()
          .solveInPlace(s);
      cg.noalias() -= gc.cross.leftCols(m0) * s;
    }
    // var -= cg C^-1 cg^T, row by row, via whitened columns.
    Eigen::MatrixXd w = lb.triangularView<Eigen::Lower>()
                            .solve(cg.transpose());  // b x G
    gc.var -= w.colwise().squaredNorm().transpose().array();
    gc.cross.middleCols(m0, b) = kgb;
  }

  // Extend the factor: [[L, 0], [B^T, Lb]].
  if (m0 > 0) lfac_.block(m0, 0, b, m0) = bmat.transpose();
  lfac_.block(m0, m0, b, b) = lb;
  logdet_ += 2.0 * lb.diagonal().array().log().sum();

  Eigen::VectorXd rb(b);
  for (int j = 0; j < b; ++j) {
    xs_.push_back(xs[static_cast<std::size_t>(j)]);
    xs_x_[m0 + j] = xs[static_cast<std::size_t>(j)].x;
    xs_y_[m0 + j] = xs[static_cast<std::size_t>(j)].y;
    ys_[m0 + j] = ys[static_cast<std::size_t>(j)];
    rb[j] = ys[static_cast<std::size_t>(j)] -
            prior_mean(xs[static_cast<std::size_t>(j)]);
  }
  if (m0 > 0) rb.noalias() -= bmat.transpose() * white_.head(m0);
  lb.triangularView<Eigen::Lower>().solveInPlace(rb);
  white_.segment(m0, b) = rb;
  m_ = m0 + b;
  refresh_solves();
}

void GpModel::refresh_solves() {
  alpha_ = white_.head(m_);
  lfac_.topLeftCorner(m_, m_)
      .transpose()
      .triangularView<Eigen::Upper>()
      .solveInPlace(alpha_);
  if (grid_) {
    GridCache& gc = *grid_;
    gc.mean = gc.mu0;
    gc.mean.noalias() += gc.cross.leftCols(m_) * alpha_;
  }
}

void GpModel::reset() {
  m_ = 0;
  xs_.clear();
  logdet_ = 0.0;
  alpha_.resize(0);
  if (grid_) rebuild_grid_cache();
}

void GpModel::bulk_load(std::span<const Point2> xs, std::span<const double> ys) {
  if (grid_)
    throw std::logic_error("gp: bulk_load is not supported with a grid cache");
  if (xs.size() != ys.size())
    throw std::invalid_argument("gp: xs/ys size mismatch");
  reset();
  if (xs.empty()) return;
  const int m = static_cast<int>(xs.size());
  ensure_capacity(m);
  for (int i = 0; i < m; ++i) {
    xs_.push_back(xs[static_cast<std::size_t>(i)]);
    xs_x_[i] = xs[static_cast<std::size_t>(i)].x;
    xs_y_[i] = xs[static_cast<std::size_t>(i)].y;
    ys_[i] = ys[static_cast<std::size_t>(i)];
  }
  m_ = m;
  Eigen::MatrixXd a(m, m);
  for (int j = 0; j < m; ++j) {
    kernel_column(xs_[static_cast<std::size_t>(j)], a.col(j));
    a(j, j) += hyper_.noise_sq;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gp: bulk factorization failed");
  lfac_.topLeftCorner(m, m) = llt.matrixL();
  logdet_ = 2.0 * lfac_.topLeftCorner(m, m).diagonal().array().log().sum();
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i)
    r[i] = ys_[i] - prior_mean(xs_[static_cast<std::size_t>(i)]);
  lfac_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solveInPlace(r);
  white_.head(m) = r;
  refresh_solves();
}

GpModel::Posterior GpModel::posterior(Point2 x) const {
  if (m_ == 0) return {prior_mean(x), hyper_.kernel.signal_var};
  Eigen::VectorXd v(m_);
  kernel_column(x, v);
  lfac_.topLeftCorner(m_, m_).triangularView<Eigen::Lower>().solveInPlace(v);
  double mean = prior_mean(x) + v.dot(white_.head(m_));
  double var = hyper_.kernel.signal_var - v.squaredNorm();
  return {mean, std::max(var, 0.0)};
}

void GpModel::attach_grid(const DomainGrid& grid) {
  grid_.emplace();
  GridCache& gc = *grid_;
  gc.grid = grid;
  const int cells = grid.cell_count();
  gc.gx.resize(cells);
  gc.gy.resize(cells);
  gc.mu0.resize(cells);
  for (int k = 0; k < cells; ++k) {
    Point2 q = grid.center(k);
    gc.gx[k] = q.x;
    gc.gy[k] = q.y;
    gc.mu0[k] = prior_mean(q);
  }
  gc.cross.resize(cells, std::max(cap_, 1));
  gc.cross_cap = std::max(cap_, 1);
  rebuild_grid_cache();
}

void GpModel::rebuild_grid_cache() {
  GridCache& gc = *grid_;
  const int cells = gc.grid.cell_count();
  gc.var = Eigen::ArrayXd::Constant(cells, hyper_.kernel.signal_var);
  gc.mean = gc.mu0;
  if (m_ == 0) return;
  const double inv2t2 = 1.0 / (2.0 * hyper_.kernel.tau * hyper_.kernel.tau);
  if (gc.cross_cap < cap_) {
    gc.cross.resize(cells, cap_);
    gc.cross_cap = cap_;
  }
  for (int j = 0; j < m_; ++j)
    gc.cross.col(j).array() =
        hyper_.kernel.signal_var *
        (-((gc.gx - xs_[static_cast<std::size_t>(j)].x).square() +
           (gc.gy - xs_[static_cast<std::size_t>(j)].y).square()) *
         inv2t2)
            .exp();
  Eigen::MatrixXd z = lfac_.topLeftCorner(m_, m_)
                          .triangularView<Eigen::Lower>()
                          .solve(gc.cross.leftCols(m_).transpose());
  gc.var -= z.colwise().squaredNorm().transpose().array();
  refresh_solves();
}

std::span<const double> GpModel::grid_mean() const {
  if (!grid_) throw std::logic_error("gp: no grid cache attached");
  return {grid_->mean.data(), static_cast<std::size_t>(grid_->mean.size())};
}

std::span<const double> GpModel::grid_var() const {
  if (!grid_) throw std::logic_error("gp: no grid cache attached");
  // Clamp tiny negative values produced by the running downdates.
  auto& v = const_cast<Eigen::ArrayXd&>(grid_->var);
  v = v.max(0.0);
  return {grid_->var.data(), static_cast<std::size_t>(grid_->var.size())};
}

double GpModel::info_gain() const {
  // log det(I + K/noise) = log det(A) - m log(noise).
  return 0.5 * (logdet_ - m_ * std::log(hyper_.noise_sq));
}

namespace {

struct NllEval {
  double nll = 0.0;
  Eigen::Vector2d rho = Eigen::Vector2d::Zero();
  bool ok = false;
};

NllEval eval_nll(const Eigen::MatrixXd& dsq, const Eigen::MatrixXd& design,
                 const Eigen::VectorXd& y, double tau, double signal_var,
                 double noise_sq) {
  NllEval out;
  const int m = static_cast<int>(y.size());
  Eigen::MatrixXd a =
      (signal_var * (-dsq / (2.0 * tau * tau)).array().exp()).matrix();
  a.diagonal().array() += noise_sq;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return out;
  Eigen::VectorXd ay = llt.solve(y);
  Eigen::MatrixXd ax = llt.solve(design);
  Eigen::Matrix2d gram = design.transpose() * ax;
  Eigen::Vector2d rhs = design.transpose() * ay;
  bool rho_ok = std::abs(gram.determinant()) >
                1e-12 * std::max(gram(0, 0) * gram(1, 1), 1e-300);
  Eigen::Vector2d rho =
      rho_ok ? gram.ldlt().solve(rhs).eval() : Eigen::Vector2d::Zero();
  Eigen::VectorXd r = y - design * rho;
  double quad = r.dot(llt.solve(r));
  double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL())
                            .diagonal()
                            .array()
                            .log()
                            .sum();
  out.nll = quad + logdet;
  out.rho = rho;
  out.ok = std::isfinite(out.nll) && m > 0;
  return out;
}

}  // namespace

GpFitResult fit_hyperparams(std::span<const Point2> xs,
                            std::span<const double> ys, double noise_sq,
                            const FitSearch& search,
                            const Eigen::Vector2d& fallback_rho,
                            double fallback_tau, double signal_var) {
  GpFitResult fallback;
  fallback.rho = fallback_rho;
  fallback.tau = fallback_tau;
  fallback.degenerate = true;
  const int m = static_cast<int>(xs.size());
  if (m != static_cast<int>(ys.size()))
    throw std::invalid_argument("fit: xs/ys size mismatch");
  if (!(search.tau_min > 0.0) || !(search.tau_max > search.tau_min) ||
      search.grid_points < 2)
    throw std::invalid_argument("fit: bad search space");
  if (m < 2) return fallback;
  bool all_same = true;
  for (int i = 1; i < m && all_same; ++i)
    all_same = dist_sq(xs[static_cast<std::size_t>(i)], xs[0]) < 1e-24;
  if (all_same) return fallback;

  Eigen::MatrixXd dsq(m, m);
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    design(i, 0) = xs[static_cast<std::size_t>(i)].x;
    design(i, 1) = xs[static_cast<std::size_t>(i)].y;
    y[i] = ys[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j)
      dsq(i, j) = dist_sq(xs[static_cast<std::size_t>(i)],
                          xs[static_cast<std::size_t>(j)]);
  }

  auto nll_at = [&](double tau) {
    return eval_nll(dsq, design, y, tau, signal_var, noise_sq);
  };

  double log_lo = std::log(search.tau_min), log_hi = std::log(search.tau_max);
  int best_i = -1;
  NllEval best;
  std::vector<double> taus(static_cast<std::size_t>(search.grid_points));
  for (int i = 0; i < search.grid_points; ++i) {
    double t = std::exp(log_lo + (log_hi - log_lo) * i /
                                     (search.grid_points - 1));
    taus[static_cast<std::size_t>(i)] = t;
    NllEval e = nll_at(t);
    if (e.ok && (best_i < 0 || e.nll < best.nll)) {
      best = e;
      best_i = i;
    }
  }
  if (best_i < 0) return fallback;

  // Golden-section refinement between the grid neighbors of the winner.
  double lo = taus[static_cast<std::size_t>(std::max(best_i - 1, 0))];
  double hi = taus[static_cast<std::size_t>(
      std::min(best_i + 1, search.grid_points - 1))];
  double a = std::log(lo), b = std::log(hi);
  const double gr = 0.6180339887498949;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  NllEval ec = nll_at(std::exp(c)), ed = nll_at(std::exp(d));
  for (int it = 0; it < 40 && (b - a) > 1e-4; ++it) {
    if (ec.ok && (!ed.ok || ec.nll < ed.nll)) {
      b = d;
      d = c;
      ed = ec;
      c = b - gr * (b - a);
      ec = nll_at(std::exp(c));
    } else {
      a = c;
      c = d;
      ec = ed;
      d = a + gr * (b - a);
      ed = nll_at(std::exp(d));
    }
  }
  double tau_ref = std::exp(0.5 * (a + b));
  NllEval er = nll_at(tau_ref);
  GpFitResult out;
  if (er.ok && er.nll < best.nll) {
    out.rho = er.rho;
    out.tau = tau_ref;
    out.nll = er.nll;
  } else {
    out.rho = best.rho;
    out.tau = taus[static_cast<std::size_t>(best_i)];
    out.nll = best.nll;
  }
  out.degenerate = false;
  return out;
}

}  // namespace cov
