#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cov/fields.hpp"
#include "cov/geometry.hpp"
#include "cov/metrics.hpp"
#include "cov/rng.hpp"

using namespace cov;

namespace {
const Bounds kDomain{-1.6, 1.6, -1.0, 1.0};

std::vector<double> gmm_values(const DomainGrid& grid) {
  AnalyticDensity d = benchmark_density_static();
  return sample_on_grid([&](Point2 q) { return d.eval(q, 0.0); }, grid);
}
}  // namespace

TEST_CASE("reference optimum on a uniform field") {
  DomainGrid g = build_grid(kDomain, 0.05);
  std::vector<double> uniform(g.cell_count(), 1.0);

  CvtReference one = cvt_reference(uniform, g, 1, 5, 17);
  CHECK(std::abs(one.positions[0].x) < 0.05);
  CHECK(std::abs(one.positions[0].y) < 0.05);
  // closed form (4ab)(a^2+b^2)/3 for the centered robot
  CHECK(one.cost == doctest::Approx(7.5947).epsilon(0.01));

  // two robots split the long axis at (+-0.8, 0)
  CvtReference two = cvt_reference(uniform, g, 2, 20, 23);
  std::vector<Point2> p = two.positions;
  std::sort(p.begin(), p.end(),
            [](Point2 a, Point2 b) { return a.x < b.x; });
  CHECK(p[0].x == doctest::Approx(-0.8).epsilon(0.1));
  CHECK(p[1].x == doctest::Approx(0.8).epsilon(0.1));
  CHECK(std::abs(p[0].y) < 0.1);
  CHECK(std::abs(p[1].y) < 0.1);
  // halves are 1.6 x 2 rectangles about their centroids
  double half = 4.0 * 0.8 * 1.0 * (0.64 + 1.0) / 3.0;
  CHECK(two.cost == doctest::Approx(2 * half).epsilon(0.01));
}

TEST_CASE("reference optimum is restart-stable on the benchmark field") {
  DomainGrid g = build_grid(kDomain, 0.05);
  std::vector<double> f = gmm_values(g);
  CvtReference a = cvt_reference(f, g, 10, 50, 1001);
  CvtReference b = cvt_reference(f, g, 10, 50, 2002);
  CHECK(a.cost == doctest::Approx(b.cost).epsilon(0.01));
  CHECK(a.best_restart >= 0);
  CHECK(a.best_restart < 50);

  // the reported cost really is the cost of the reported positions
  double check = locational_cost(a.positions, assign_voronoi(a.positions, g),
                                 f, g);
  CHECK(check == doctest::Approx(a.cost).epsilon(1e-12));
}

TEST_CASE("regret clamps below zero and flags it") {
  bool clipped = false;
  CHECK(regret(10.0, 7.0, &clipped) == doctest::Approx(3.0));
  CHECK_FALSE(clipped);
  CHECK(regret(6.9, 7.0, &clipped) == 0.0);
  CHECK(clipped);
  CHECK(regret(7.0, 7.0) == 0.0);
}

TEST_CASE("confidence coverage counting") {
  std::vector<double> f = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> mu = {1.0, 2.5, 2.0, 10.0};
  std::vector<double> sd = {0.1, 0.5, 0.5, 1.0};

  // beta = 1: |f-mu| <= sd at cells 0 (0<=0.1), 1 (0.5<=0.5); not 2 (1>0.5)
  // or 3 (6>1)
  CHECK(confidence_coverage(f, mu, sd, 1.0) == doctest::Approx(0.5));
  // huge beta covers everything
  CHECK(confidence_coverage(f, mu, sd, 1e12) == 1.0);
  // beta = 0 keeps only exact matches
  CHECK(confidence_coverage(f, mu, sd, 0.0) == doctest::Approx(0.25));
}

TEST_CASE("mse identities") {
  DomainGrid g = build_grid(kDomain, 0.1);
  std::vector<double> f = gmm_values(g);
  CHECK(mean_squared_error(f, f) == 0.0);
  std::vector<double> shifted = f;
  for (double& v : shifted) v += 2.5;
  CHECK(mean_squared_error(f, shifted) == doctest::Approx(6.25).epsilon(1e-12));
}

TEST_CASE("information gain bound expression") {
  CHECK(rf_info_gain_bound(20, 50.0, 0) == 0.0);
  // one unit-norm observation: 2D log((D + c3)/D)
  CHECK(rf_info_gain_bound(20, 50.0, 1) ==
        doctest::Approx(40.0 * std::log(70.0 / 20.0)).epsilon(1e-12));
  // monotone in the measurement count
  double prev = 0.0;
  for (std::size_t m : {1u, 5u, 50u, 500u, 5000u}) {
    double b = rf_info_gain_bound(40, 5.0 / 1e-4, m);
    CHECK(b > prev);
    prev = b;
  }
}
