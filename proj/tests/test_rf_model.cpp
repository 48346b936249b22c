#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "cov/fields.hpp"
#include "cov/random_features.hpp"
#include "cov/rf_model.hpp"
#include "cov/rng.hpp"

using namespace cov;

namespace {

Eigen::MatrixXd feature_rows(const RandomFeatureMap& map,
                             const std::vector<Point2>& pts) {
  return map.feature_matrix(pts).transpose();
}

std::vector<Point2> random_points(int n, RngStream& rng) {
  std::vector<Point2> pts(n);
  for (Point2& p : pts)
    p = {rng.uniform_in(-1.6, 1.6), rng.uniform_in(-1.0, 1.0)};
  return pts;
}

Eigen::VectorXd gmm_at(const std::vector<Point2>& pts) {
  AnalyticDensity d = benchmark_density_static();
  Eigen::VectorXd y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) y[i] = d.eval(pts[i]);
  return y;
}

}  // namespace

TEST_CASE("batch fit prior and closed form") {
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 25, 3);
  int d = map.dim();
  double ridge = 0.1, sv = 5.0;

  RfBatchFit prior = rf_batch_fit(Eigen::MatrixXd(0, d),
                                  Eigen::VectorXd(0), ridge, sv);
  CHECK(prior.theta.norm() == 0.0);
  CHECK((prior.sigma - sv * Eigen::MatrixXd::Identity(d, d))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  RngStream rng(6);
  std::vector<Point2> pts = random_points(30, rng);
  Eigen::VectorXd y = gmm_at(pts);
  Eigen::MatrixXd phi = feature_rows(map, pts);
  RfBatchFit fit = rf_batch_fit(phi, y, ridge, sv);

  // against the textbook expressions with explicit inverses
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd gram = phi.transpose() * phi;
  Eigen::VectorXd theta_ref =
      (gram + (ridge / sv) * eye).inverse() * phi.transpose() * y;
  Eigen::MatrixXd sigma_ref = (gram / ridge + eye / sv).inverse();
  CHECK((fit.theta - theta_ref).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((fit.sigma - sigma_ref).cwiseAbs().maxCoeff() < 1e-10);

  // total shrinkage limit, relative to the working-ridge fit
  RfBatchFit shrunk = rf_batch_fit(phi, y, 1e9, sv);
  CHECK(shrunk.theta.norm() < 1e-6 * fit.theta.norm());
}

TEST_CASE("online update basics") {
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 20, 4);
  int d = map.dim();
  double sv = 5.0;

  RfOnline st(d, sv, 0.1);
  Eigen::VectorXd phi = map.features({0.4, -0.2});
  CHECK(st.mean(phi) == 0.0);
  CHECK(st.var(phi) == doctest::Approx(sv).epsilon(1e-12));

  // zero innovation: theta frozen, variance still contracts
  Eigen::VectorXd theta_before = st.theta();
  CHECK(st.update(phi, 0.0));
  CHECK((st.theta() - theta_before).norm() == 0.0);
  CHECK(st.var(phi) < sv);

  // variance at an observed point drops strictly below the prior
  RfOnline st2(d, sv, 0.1);
  CHECK(st2.update(phi, 2.0));
  CHECK(st2.var(phi) < sv);
  CHECK(st2.mean(phi) > 0.0);
}

TEST_CASE("zero gain noise interpolates a single observation") {
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 20, 4);
  RfOnline st(map.dim(), 5.0, 0.0);
  Eigen::VectorXd phi = map.features({-0.7, 0.3});
  CHECK(st.update(phi, 3.25));
  CHECK(st.mean(phi) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("sequential updates reproduce the batch posterior") {
  double sv = 5.0, ridge = 0.1;
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 30, 9);
  RngStream rng(12);
  for (int n : {1, 7, 40, 200}) {
    std::vector<Point2> pts = random_points(n, rng);
    Eigen::VectorXd y = gmm_at(pts);
    Eigen::MatrixXd phi = feature_rows(map, pts);

    RfOnline st(map.dim(), sv, ridge);  // gain noise equal to the ridge
    for (int i = 0; i < n; ++i) st.update(phi.row(i).transpose(), y[i]);

    RfBatchFit batch = rf_batch_fit(phi, y, ridge, sv);
    CHECK((st.theta() - batch.theta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((st.sigma() - batch.sigma).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("update order is immaterial") {
  double sv = 5.0, ridge = 0.1;
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 25, 2);
  RngStream rng(8);
  std::vector<Point2> pts = random_points(11, rng);
  Eigen::VectorXd y = gmm_at(pts);
  Eigen::MatrixXd phi = feature_rows(map, pts);

  RfOnline fwd(map.dim(), sv, ridge), rev(map.dim(), sv, ridge);
  for (int i = 0; i < 11; ++i) fwd.update(phi.row(i).transpose(), y[i]);
  for (int i = 10; i >= 0; --i) rev.update(phi.row(i).transpose(), y[i]);
  CHECK((fwd.theta() - rev.theta()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((fwd.sigma() - rev.sigma()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("covariance stays bounded and uncertainty shrinks monotonically") {
  double sv = 5.0;
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 15, 5);
  RngStream rng(19);
  std::vector<Point2> pts = random_points(120, rng);
  Eigen::VectorXd y = gmm_at(pts);
  Eigen::MatrixXd phi = feature_rows(map, pts);
  Eigen::VectorXd probe = map.features({0.123, -0.456});

  RfOnline st(map.dim(), sv, 0.1);
  double prev = st.var(probe);
  for (int i = 0; i < 120; ++i) {
    st.update(phi.row(i).transpose(), y[i]);
    double now = st.var(probe);
    CHECK(now <= prev + 1e-12);
    prev = now;

    if (i % 20 == 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.sigma());
      CHECK(es.eigenvalues().minCoeff() > 0.0);
      CHECK(es.eigenvalues().maxCoeff() <= sv + 1e-10);
    }
  }
}

TEST_CASE("degenerate gains are skipped, not applied") {
  // with zero gain noise, repeatedly observing the same point drives
  // phi' Sigma phi to zero; the guarded update must refuse eventually
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 10, 7);
  RfOnline st(map.dim(), 5.0, 0.0);
  Eigen::VectorXd phi = map.features({0.5, 0.5});
  for (int i = 0; i < 5; ++i) st.update(phi, 1.0);
  CHECK(st.updates_skipped() > 0);
  CHECK(st.var(phi) >= 0.0);
  CHECK(std::isfinite(st.theta().norm()));
}

TEST_CASE("update cost does not grow with history") {
  // time a window of updates early and late in a long stream; constant
  // per-update cost means the two medians stay within 20%
  RandomFeatureMap map = RandomFeatureMap::sample(0.2, 40, 3);
  RngStream rng(25);
  std::vector<Point2> pts = random_points(512, rng);
  Eigen::VectorXd y = gmm_at(pts);
  Eigen::MatrixXd phi = feature_rows(map, pts);
  RfOnline st(map.dim(), 5.0, 0.1);

  auto time_window = [&](int count) {
    auto a = std::chrono::steady_clock::now();
    for (int i = 0; i < count; ++i) {
      int j = i % 512;
      st.update(phi.row(j).transpose(), y[j]);
    }
    auto b = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(b - a).count() / count;
  };

  auto median5 = [&](int count) {
    std::vector<double> w;
    for (int r = 0; r < 5; ++r) w.push_back(time_window(count));
    std::sort(w.begin(), w.end());
    return w[2];
  };

  for (int i = 0; i < 10; ++i)  // warm caches
    st.update(phi.row(i).transpose(), y[i]);
  double early = median5(500);   // updates ~10..2500
  for (int i = 0; i < 7500; ++i) st.update(phi.row(i % 512).transpose(),
                                           y[i % 512]);
  double late = median5(500);    // updates past 10000
  CHECK(std::abs(late - early) / early < 0.20);
}
