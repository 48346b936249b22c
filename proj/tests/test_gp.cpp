#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "cov/fields.hpp"
#include "cov/geometry.hpp"
#include "cov/gp.hpp"
#include "cov/rng.hpp"

using namespace cov;

namespace {

const Bounds kDomain{-1.6, 1.6, -1.0, 1.0};

std::vector<Point2> random_points(int n, RngStream& rng) {
  std::vector<Point2> pts(n);
  for (Point2& p : pts)
    p = {rng.uniform_in(-1.6, 1.6), rng.uniform_in(-1.0, 1.0)};
  return pts;
}

std::vector<double> gmm_at(const std::vector<Point2>& pts) {
  AnalyticDensity d = benchmark_density_static();
  std::vector<double> y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) y[i] = d.eval(pts[i]);
  return y;
}

// reference posterior via the textbook closed form with an explicit inverse
struct DenseOracle {
  GpHyper hyper;
  std::vector<Point2> xs;
  Eigen::MatrixXd kinv;
  Eigen::VectorXd resid;

  DenseOracle(const GpHyper& h, const std::vector<Point2>& x,
              const std::vector<double>& y)
      : hyper(h), xs(x) {
    int m = static_cast<int>(x.size());
    Eigen::MatrixXd k(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) k(i, j) = h.kernel(x[i], x[j]);
    kinv = (k + h.noise_sq * Eigen::MatrixXd::Identity(m, m)).inverse();
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i)
      r[i] = y[i] - (h.rho[0] * x[i].x + h.rho[1] * x[i].y);
    resid = r;
  }

  GpModel::Posterior at(Point2 q) const {
    int m = static_cast<int>(xs.size());
    Eigen::VectorXd kq(m);
    for (int i = 0; i < m; ++i) kq[i] = hyper.kernel(xs[i], q);
    GpModel::Posterior p;
    p.mean = hyper.rho[0] * q.x + hyper.rho[1] * q.y + kq.dot(kinv * resid);
    p.var = hyper.kernel(q, q) - kq.dot(kinv * kq);
    return p;
  }
};

}  // namespace

TEST_CASE("prior and single-point conditioning") {
  GpHyper h{Eigen::Vector2d(2.0, -1.0), RbfKernel(0.3, 4.0), 0.01};
  GpModel gp(h);
  GpModel::Posterior p = gp.posterior({0.5, 0.25});
  CHECK(p.mean == doctest::Approx(2.0 * 0.5 - 1.0 * 0.25).epsilon(1e-15));
  CHECK(p.var == doctest::Approx(4.0).epsilon(1e-15));

  // one observation, queried at the same spot, zero prior mean
  GpHyper h0{Eigen::Vector2d::Zero(), RbfKernel(0.3, 4.0), 0.01};
  GpModel g0(h0);
  Point2 x{0.2, -0.3};
  double y = 1.7;
  g0.add_block({&x, 1}, {&y, 1});
  GpModel::Posterior q = g0.posterior(x);
  CHECK(q.mean == doctest::Approx(y * 4.0 / (4.0 + 0.01)).epsilon(1e-12));
  CHECK(q.var == doctest::Approx(4.0 * 0.01 / (4.0 + 0.01)).epsilon(1e-12));
}

TEST_CASE("block updates match the dense closed form") {
  RngStream rng(31);
  std::vector<Point2> pts = random_points(50, rng);
  std::vector<double> y = gmm_at(pts);
  GpHyper h{Eigen::Vector2d(0.5, 1.5), RbfKernel(0.25, 100.0), 1e-4};

  GpModel gp(h);
  for (int b = 0; b < 5; ++b)  // five blocks of ten
    gp.add_block({pts.data() + 10 * b, 10}, {y.data() + 10 * b, 10});

  DenseOracle oracle(h, pts, y);
  DomainGrid g = build_grid(kDomain, 0.2);
  for (const Point2& q : g.centers()) {
    GpModel::Posterior a = gp.posterior(q);
    GpModel::Posterior b = oracle.at(q);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-8));
    CHECK(a.var == doctest::Approx(b.var).epsilon(1e-8).scale(100.0));
  }

  // bulk load reproduces the same posterior
  GpModel bulk(h);
  bulk.bulk_load(pts, y);
  for (const Point2& q : g.centers()) {
    CHECK(bulk.posterior(q).mean ==
          doctest::Approx(gp.posterior(q).mean).epsilon(1e-10));
    CHECK(bulk.posterior(q).var ==
          doctest::Approx(gp.posterior(q).var).epsilon(1e-8).scale(100.0));
  }
}

TEST_CASE("grid cache tracks the exact posterior across blocks") {
  RngStream rng(5);
  std::vector<Point2> pts = random_points(60, rng);
  std::vector<double> y = gmm_at(pts);
  GpHyper h{Eigen::Vector2d::Zero(), RbfKernel(0.2, 50.0), 1e-4};
  DomainGrid g = build_grid(kDomain, 0.2);

  GpModel gp(h);
  gp.attach_grid(g);
  for (int b = 0; b < 6; ++b) {
    gp.add_block({pts.data() + 10 * b, 10}, {y.data() + 10 * b, 10});
    std::span<const double> mean = gp.grid_mean();
    std::span<const double> var = gp.grid_var();
    for (int k = 0; k < g.cell_count(); k += 13) {
      GpModel::Posterior p = gp.posterior(g.center(k));
      CHECK(mean[k] == doctest::Approx(p.mean).epsilon(1e-8));
      CHECK(var[k] == doctest::Approx(p.var).epsilon(1e-8).scale(50.0));
    }
  }

  // attaching the grid after the fact gives the same cache
  GpModel late(h);
  late.add_block(pts, y);
  late.attach_grid(g);
  for (int k = 0; k < g.cell_count(); ++k) {
    CHECK(late.grid_mean()[k] ==
          doctest::Approx(gp.grid_mean()[k]).epsilon(1e-8));
    CHECK(late.grid_var()[k] ==
          doctest::Approx(gp.grid_var()[k]).epsilon(1e-8).scale(50.0));
  }
}

TEST_CASE("posterior variance never exceeds the prior") {
  RngStream rng(77);
  GpHyper h{Eigen::Vector2d::Zero(), RbfKernel(0.3, 5.0), 1e-3};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Point2> pts = random_points(30, rng);
    std::vector<double> y(30);
    for (double& v : y) v = rng.normal();
    GpModel gp(h);
    gp.add_block(pts, y);
    for (int i = 0; i < 20; ++i) {
      Point2 q{rng.uniform_in(-1.6, 1.6), rng.uniform_in(-1, 1)};
      CHECK(gp.posterior(q).var <= 5.0 + 1e-10);
      CHECK(gp.posterior(q).var >= 0.0);
    }
  }
}

TEST_CASE("near-noiseless models interpolate the data") {
  RngStream rng(15);
  std::vector<Point2> pts = random_points(25, rng);
  std::vector<double> y = gmm_at(pts);
  GpHyper h{Eigen::Vector2d::Zero(), RbfKernel(0.3, 10000.0), 1e-10};
  GpModel gp(h);
  gp.add_block(pts, y);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(std::abs(gp.posterior(pts[i]).mean - y[i]) < 1e-4);
}

TEST_CASE("training order does not matter") {
  RngStream rng(23);
  std::vector<Point2> pts = random_points(40, rng);
  std::vector<double> y = gmm_at(pts);
  GpHyper h{Eigen::Vector2d::Zero(), RbfKernel(0.25, 50.0), 1e-4};

  GpModel fwd(h), rev(h);
  fwd.add_block(pts, y);
  std::vector<Point2> rp(pts.rbegin(), pts.rend());
  std::vector<double> ry(y.rbegin(), y.rend());
  rev.add_block(rp, ry);

  for (int i = 0; i < 30; ++i) {
    Point2 q{rng.uniform_in(-1.6, 1.6), rng.uniform_in(-1, 1)};
    CHECK(fwd.posterior(q).mean ==
          doctest::Approx(rev.posterior(q).mean).epsilon(1e-10));
    CHECK(fwd.posterior(q).var ==
          doctest::Approx(rev.posterior(q).var).epsilon(1e-10).scale(50.0));
  }
}

TEST_CASE("information gain matches the dense determinant") {
  RngStream rng(41);
  std::vector<Point2> pts = random_points(35, rng);
  std::vector<double> y = gmm_at(pts);
  GpHyper h{Eigen::Vector2d::Zero(), RbfKernel(0.3, 5.0), 1e-3};
  GpModel gp(h);
  CHECK(gp.info_gain() == 0.0);
  gp.add_block({pts.data(), 20}, {y.data(), 20});
  gp.add_block({pts.data() + 20, 15}, {y.data() + 20, 15});

  int m = 35;
  Eigen::MatrixXd k(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) k(i, j) = h.kernel(pts[i], pts[j]);
  Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(m, m) + k / h.noise_sq;
  double expected = 0.5 * std::log(a.determinant());
  CHECK(gp.info_gain() == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("reset returns to the prior") {
  GpHyper h{Eigen::Vector2d::Zero(), RbfKernel(0.3, 2.0), 1e-4};
  GpModel gp(h);
  Point2 x{0.1, 0.1};
  double y = 5.0;
  gp.add_block({&x, 1}, {&y, 1});
  gp.reset();
  CHECK(gp.size() == 0);
  CHECK(gp.posterior(x).mean == 0.0);
  CHECK(gp.posterior(x).var == doctest::Approx(2.0));
  CHECK(gp.info_gain() == 0.0);
}

TEST_CASE("hyperparameter fit recovers a known lengthscale") {
  // sample data from a GP with tau = 0.3, fit, expect tau in [0.2, 0.45]
  double tau_true = 0.3, sv = 4.0, noise_sq = 1e-4;
  int n = 200;
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    std::vector<Point2> pts = random_points(n, rng);
    Eigen::MatrixXd k(n, n);
    RbfKernel kern(tau_true, sv);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k(i, j) = kern(pts[i], pts[j]);
    k.diagonal().array() += noise_sq;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    Eigen::VectorXd y = llt.matrixL() * z;
    std::vector<double> yv(y.data(), y.data() + n);

    GpFitResult fit = fit_hyperparams(pts, yv, noise_sq, FitSearch{},
                                      Eigen::Vector2d::Zero(), 0.2, sv);
    CHECK_FALSE(fit.degenerate);
    if (fit.tau >= 0.2 && fit.tau <= 0.45) ++hits;
  }
  CHECK(hits >= 8);
}

TEST_CASE("hyperparameter fit recovers a linear trend") {
  RngStream rng(3);
  std::vector<Point2> pts = random_points(80, rng);
  Eigen::Vector2d rho_true(3.0, -2.0);
  std::vector<double> y(80);
  for (int i = 0; i < 80; ++i)
    y[i] = rho_true[0] * pts[i].x + rho_true[1] * pts[i].y;

  GpFitResult fit = fit_hyperparams(pts, y, 1e-8, FitSearch{},
                                    Eigen::Vector2d::Zero(), 0.2, 1.0);
  CHECK(fit.rho[0] == doctest::Approx(rho_true[0]).epsilon(0.05));
  CHECK(fit.rho[1] == doctest::Approx(rho_true[1]).epsilon(0.05));
}

TEST_CASE("degenerate data falls back to defaults") {
  std::vector<Point2> pts(5, Point2{0.3, 0.3});
  std::vector<double> y(5, 1.0);
  GpFitResult fit = fit_hyperparams(pts, y, 1e-4, FitSearch{},
                                    Eigen::Vector2d(1.0, 2.0), 0.33, 1.0);
  CHECK(fit.degenerate);
  CHECK(fit.tau == 0.33);
  CHECK(fit.rho[0] == 1.0);
  CHECK(fit.rho[1] == 2.0);

  GpFitResult single = fit_hyperparams({pts.data(), 1}, {y.data(), 1}, 1e-4,
                                       FitSearch{}, Eigen::Vector2d::Zero(),
                                       0.2, 1.0);
  CHECK(single.degenerate);
}
