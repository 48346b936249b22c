#include "cov/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cov {

Point2 Bounds::clamp(Point2 p) const {
  return {std::min(std::max(p.x, xmin), xmax),
          std::min(std::max(p.y, ymin), ymax)};
}

int DomainGrid::cell_index(Point2 p) const {
  Point2 q = bounds.clamp(p);
  int ix = static_cast<int>((q.x - bounds.xmin) / h);
  int iy = static_cast<int>((q.y - bounds.ymin) / h);
  ix = std::min(std::max(ix, 0), nx - 1);
  iy = std::min(std::max(iy, 0), ny - 1);
  return iy * nx + ix;
}

const std::vector<Point2>& DomainGrid::centers() const {
  if (centers_.empty()) {
    centers_.reserve(static_cast<std::size_t>(cell_count()));
    for (int k = 0; k < cell_count(); ++k) centers_.push_back(center(k));
  }
  return centers_;
}

DomainGrid build_grid(const Bounds& bounds, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grid: h must be positive");
  if (!(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin))
    throw std::invalid_argument("grid: empty domain rectangle");
  auto cells_along = [h](double length, const char* which) {
    double r = length / h;
    double n = std::round(r);
    if (n < 1.0 || std::abs(n * h - length) > 1e-9)
      throw std::invalid_argument(std::string("grid: h does not divide the ") +
                                  which + " edge length");
    return static_cast<int>(n);
  };
  DomainGrid g;
  g.bounds = bounds;
  g.h = h;
  g.nx = cells_along(bounds.width(), "x");
  g.ny = cells_along(bounds.height(), "y");
  return g;
}

VoronoiPartition assign_voronoi(std::span<const Point2> positions,
                                const DomainGrid& grid) {
  if (positions.empty())
    throw std::invalid_argument("assign_voronoi: no robot positions");
  const int n = static_cast<int>(positions.size());
  const int cells = grid.cell_count();
  VoronoiPartition part;
  part.robot_count = n;
  part.owner.resize(static_cast<std::size_t>(cells));
  for (int k = 0; k < cells; ++k) {
    Point2 q = grid.center(k);
    int best = 0;
    double best_d = dist_sq(q, positions[0]);
    for (int i = 1; i < n; ++i) {
      double d = dist_sq(q, positions[i]);
      if (d < best_d) {  // strict: ties stay with the lower index
        best_d = d;
        best = i;
      }
    }
    part.owner[static_cast<std::size_t>(k)] = best;
  }
  return part;
}

CentroidResult centroids(const VoronoiPartition& part,
                         std::span<const double> density,
                         std::span<const Point2> positions,
                         const DomainGrid& grid) {
  const int n = part.robot_count;
  const int cells = grid.cell_count();
  if (static_cast<int>(part.owner.size()) != cells)
    throw std::invalid_argument("centroids: partition does not match grid");
  if (static_cast<int>(density.size()) != cells)
    throw std::invalid_argument("centroids: density does not match grid");
  if (static_cast<int>(positions.size()) != n)
    throw std::invalid_argument("centroids: positions do not match partition");

  std::vector<double> mass(n, 0.0), mx(n, 0.0), my(n, 0.0);
  for (int k = 0; k < cells; ++k) {
    int i = part.owner[static_cast<std::size_t>(k)];
    double f = density[static_cast<std::size_t>(k)];
    Point2 q = grid.center(k);
    mass[i] += f;
    mx[i] += f * q.x;
    my[i] += f * q.y;
  }
  CentroidResult out;
  out.centroids.resize(static_cast<std::size_t>(n));
  out.masses.resize(static_cast<std::size_t>(n));
  out.empty.assign(static_cast<std::size_t>(n), 0);
  const double area = grid.cell_area();
  for (int i = 0; i < n; ++i) {
    out.masses[static_cast<std::size_t>(i)] = mass[i] * area;
    if (mass[i] > 0.0) {
      out.centroids[static_cast<std::size_t>(i)] = {mx[i] / mass[i],
                                                    my[i] / mass[i]};
    } else {
      out.centroids[static_cast<std::size_t>(i)] = positions[i];
      out.empty[static_cast<std::size_t>(i)] = 1;
      out.any_empty = true;
    }
  }
  return out;
}

Point2 centroid(const VoronoiPartition& part, std::span<const double> density,
                std::span<const Point2> positions, const DomainGrid& grid,
                int robot) {
  if (robot < 0 || robot >= part.robot_count)
    throw std::invalid_argument("centroid: robot index out of range");
  return centroids(part, density, positions, grid)
      .centroids[static_cast<std::size_t>(robot)];
}

double locational_cost(std::span<const Point2> positions,
                       const VoronoiPartition& part,
                       std::span<const double> density,
                       const DomainGrid& grid) {
  const int cells = grid.cell_count();
  if (static_cast<int>(part.owner.size()) != cells ||
      static_cast<int>(density.size()) != cells)
    throw std::invalid_argument("locational_cost: size mismatch");
  double acc = 0.0;
  for (int k = 0; k < cells; ++k) {
    int i = part.owner[static_cast<std::size_t>(k)];
    acc += dist_sq(grid.center(k), positions[static_cast<std::size_t>(i)]) *
           density[static_cast<std::size_t>(k)];
  }
  return acc * grid.cell_area();
}

std::vector<Point2> control_step(std::span<const Point2> positions,
                                 std::span<const Point2> targets, double kappa,
                                 double dt, const Bounds& bounds) {
  if (positions.size() != targets.size())
    throw std::invalid_argument("control_step: positions/targets mismatch");
  double gain = kappa * dt;
  if (!(gain > 0.0) || gain > 1.0)
    throw std::invalid_argument("control_step: kappa*dt must be in (0, 1]");
  std::vector<Point2> next(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Point2 p = positions[i] + gain * (targets[i] - positions[i]);
    next[i] = bounds.clamp(p);
  }
  return next;
}

std::vector<double> sample_on_grid(const std::function<double(Point2)>& f,
                                   const DomainGrid& grid) {
  std::vector<double> v(static_cast<std::size_t>(grid.cell_count()));
  for (int k = 0; k < grid.cell_count(); ++k)
    v[static_cast<std::size_t>(k)] = f(grid.center(k));
  return v;
}

LloydResult lloyd_descend(std::span<const Point2> start,
                          std::span<const double> density,
                          const DomainGrid& grid, double kappa_dt, double tol,
                          int max_iter) {
  LloydResult res;
  res.positions.assign(start.begin(), start.end());
  VoronoiPartition part;
  for (int it = 0; it < max_iter; ++it) {
    part = assign_voronoi(res.positions, grid);
    CentroidResult c = centroids(part, density, res.positions, grid);
    std::vector<Point2> next =
        control_step(res.positions, c.centroids, kappa_dt, 1.0, grid.bounds);
    double max_move = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      max_move = std::max(max_move, std::sqrt(dist_sq(next[i], res.positions[i])));
    res.positions = std::move(next);
    res.iterations = it + 1;
    if (max_move < tol) {
      res.converged = true;
      break;
    }
  }
  part = assign_voronoi(res.positions, grid);
  res.cost = locational_cost(res.positions, part, density, grid);
  return res;
}

}  // namespace cov
