// Rectangular domain discretization, Voronoi assignment, density-weighted
// centroids, locational cost, and the proportional move-to-centroid control
// law. All integrals are midpoint sums over grid cell centers; accumulation
// order is fixed (cell index ascending) so results are deterministic.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cov {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dist_sq(Point2 a, Point2 b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct Bounds {
  double xmin = 0.0, xmax = 1.0;
  double ymin = 0.0, ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(Point2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  Point2 clamp(Point2 p) const;
  // Squared diameter of the rectangle (largest pairwise distance).
  double diameter_sq() const {
    return width() * width() + height() * height();
  }
};

// Uniform grid of cell centers; cell k has ix = k % nx, iy = k / nx
// (x varies fastest), center at (xmin + (ix+0.5)h, ymin + (iy+0.5)h).
struct DomainGrid {
  Bounds bounds;
  double h = 0.0;
  int nx = 0;
  int ny = 0;

  int cell_count() const { return nx * ny; }
  double cell_area() const { return h * h; }
  Point2 center(int k) const {
    int ix = k % nx, iy = k / nx;
    return {bounds.xmin + (ix + 0.5) * h, bounds.ymin + (iy + 0.5) * h};
  }
  // Index of the cell containing p (p clamped onto the domain first).
  int cell_index(Point2 p) const;
  const std::vector<Point2>& centers() const;  // built once, cached

 private:
  mutable std::vector<Point2> centers_;
};

// Throws std::invalid_argument unless h > 0 and h divides both edge
// lengths within 1e-9, and the resulting grid is non-empty.
DomainGrid build_grid(const Bounds& bounds, double h);

// owner[k] = index of the robot whose position is nearest to cell k's
// center; ties broken toward the lowest robot index.
struct VoronoiPartition {
  std::vector<std::int32_t> owner;
  int robot_count = 0;
};

VoronoiPartition assign_voronoi(std::span<const Point2> positions,
                                const DomainGrid& grid);

// Mass and centroid of every robot's cell in a single pass over the grid.
// A robot owning no cells (or zero mass) keeps its own position as the
// centroid and is marked empty. density[k] is the field value at cell k.
struct CentroidResult {
  std::vector<Point2> centroids;
  std::vector<double> masses;  // sum f(q) * cell_area over owned cells
  std::vector<std::uint8_t> empty;
  bool any_empty = false;
};

CentroidResult centroids(const VoronoiPartition& part,
                         std::span<const double> density,
                         std::span<const Point2> positions,
                         const DomainGrid& grid);

// Convenience single-robot form.
Point2 centroid(const VoronoiPartition& part, std::span<const double> density,
                std::span<const Point2> positions, const DomainGrid& grid,
                int robot);

// Sum over cells of ||q - x_owner||^2 f(q) * cell_area.
double locational_cost(std::span<const Point2> positions,
                       const VoronoiPartition& part,
                       std::span<const double> density,
                       const DomainGrid& grid);

// One proportional step x <- x + kappa*dt*(c - x) per robot, positions
// clamped to the domain. Requires kappa*dt in (0, 1].
std::vector<Point2> control_step(std::span<const Point2> positions,
                                 std::span<const Point2> targets, double kappa,
                                 double dt, const Bounds& bounds);

// Materialize a pointwise sampler over the grid (fixed cell order).
std::vector<double> sample_on_grid(const std::function<double(Point2)>& f,
                                   const DomainGrid& grid);

// Lloyd iteration on a fixed density until the largest per-robot move is
// below tol or max_iter is reached. kappa_dt = 1 gives the classic
// assign/recenter iteration.
struct LloydResult {
  std::vector<Point2> positions;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

LloydResult lloyd_descend(std::span<const Point2> start,
                          std::span<const double> density,
                          const DomainGrid& grid, double kappa_dt, double tol,
                          int max_iter);

}  // namespace cov
