#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlkpp/core/error.hpp"

namespace nlkpp {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double norm(const Point& p) { return std::hypot(p.x, p.y); }

/// Boundary treatment of the dispersal integral.
///
/// `hostile` integrates only over the domain, so mass leaving it is lost. `torus`
/// identifies opposite faces and is meant for tests that need exact
/// conservation; it is never used for hostile-exterior experiments.
enum class Topology { hostile, torus };

inline const char* to_string(Topology t) { return t == Topology::hostile ? "hostile" : "torus"; }

struct Box {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
};

/// Uniform tensor-product quadrature grid on an axis-aligned box (1D or 2D).
///
/// Nodes are numbered x-fastest. In hostile mode the grid includes the boundary
/// and carries trapezoid weights; in torus mode the upper face is identified with
/// the lower one, so there are no duplicate nodes and all weights are equal.
class DomainGrid {
 public:
  DomainGrid() = default;

  int dimension() const { return dimension_; }
  const Box& bounds() const { return bounds_; }
  Topology topology() const { return topology_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int resolution(int axis) const { return resolution_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  /// Largest axis spacing.
  double h() const { return dimension_ == 1 ? spacing_[0] : std::max(spacing_[0], spacing_[1]); }
  double extent(int axis) const { return bounds_.hi[axis] - bounds_.lo[axis]; }
  double volume() const { return dimension_ == 1 ? extent(0) : extent(0) * extent(1); }
  double diameter() const {
    return dimension_ == 1 ? extent(0) : std::hypot(extent(0), extent(1));
  }

  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int i) const { return nodes_[i]; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(int i) const { return weights_[i]; }
  bool is_boundary(int i) const { return boundary_[i] != 0; }
  int boundary_count() const {
    return static_cast<int>(std::count(boundary_.begin(), boundary_.end(), 1));
  }

  /// x_i - x_j, wrapped to the nearest image on the torus.
  Point displacement(int i, int j) const {
    Point d{nodes_[i].x - nodes_[j].x, nodes_[i].y - nodes_[j].y};
    if (topology_ == Topology::torus) {
      d.x = wrap(d.x, extent(0));
      if (dimension_ == 2) d.y = wrap(d.y, extent(1));
    }
    return d;
  }

  /// Distance from a node to the boundary of the box (infinite on the torus).
  double distance_to_boundary(int i) const {
    if (topology_ == Topology::torus) return std::numeric_limits<double>::infinity();
    const Point& p = nodes_[i];
    double d = std::min(p.x - bounds_.lo[0], bounds_.hi[0] - p.x);
    if (dimension_ == 2) d = std::min({d, p.y - bounds_.lo[1], bounds_.hi[1] - p.y});
    return std::max(d, 0.0);
  }

  /// Index of the node at integer coordinates (ix, iy).
  int index(int ix, int iy = 0) const { return ix + resolution_[0] * iy; }

  bool contains(const Point& p, double tol = 1e-12) const {
    bool in = p.x >= bounds_.lo[0] - tol && p.x <= bounds_.hi[0] + tol;
    if (dimension_ == 2) in = in && p.y >= bounds_.lo[1] - tol && p.y <= bounds_.hi[1] + tol;
    return in;
  }

 private:
  friend DomainGrid build_grid(int, const Box&, std::array<int, 2>, Topology);

  static double wrap(double d, double period) {
    d -= period * std::round(d / period);
    return d;
  }

  int dimension_ = 1;
  Box bounds_;
  Topology topology_ = Topology::hostile;
  std::array<int, 2> resolution_{0, 1};
  std::array<double, 2> spacing_{0.0, 0.0};
  std::vector<Point> nodes_;
  Eigen::VectorXd weights_;
  std::vector<char> boundary_;
};

inline constexpr int kMinResolution = 3;

/// Builds a uniform grid. `resolution[1]` is ignored in 1D.
inline DomainGrid build_grid(int dimension, const Box& bounds, std::array<int, 2> resolution,
                             Topology topology = Topology::hostile) {
  if (dimension != 1 && dimension != 2)
    throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dimension));
  for (int a = 0; a < dimension; ++a) {
    if (!(bounds.hi[a] > bounds.lo[a]) || !std::isfinite(bounds.hi[a] - bounds.lo[a]))
      throw ConfigError("grid bounds describe a zero-volume box");
    if (resolution[a] < kMinResolution)
      throw ConfigError("grid resolution below minimum of " + std::to_string(kMinResolution) +
                        " nodes per axis");
  }

  DomainGrid g;
  g.dimension_ = dimension;
  g.bounds_ = bounds;
  g.topology_ = topology;
  g.resolution_ = {resolution[0], dimension == 2 ? resolution[1] : 1};
  if (dimension == 1) {
    g.bounds_.lo[1] = 0.0;
    g.bounds_.hi[1] = 0.0;
  }

  const bool torus = topology == Topology::torus;
  std::array<std::vector<double>, 2> coord;
  std::array<std::vector<double>, 2> w1d;
  std::array<std::vector<char>, 2> edge;
  for (int a = 0; a < 2; ++a) {
    int n = g.resolution_[a];
    coord[a].assign(n, 0.0);
    w1d[a].assign(n, 1.0);
    edge[a].assign(n, 0);
    if (a >= dimension) continue;
    double len = bounds.hi[a] - bounds.lo[a];
    double h = torus ? len / n : len / (n - 1);
    g.spacing_[a] = h;
    for (int i = 0; i < n; ++i) {
      coord[a][i] = bounds.lo[a] + i * h;
      w1d[a][i] = h;
    }
    if (!torus) {
      coord[a][n - 1] = bounds.hi[a];
      w1d[a][0] = w1d[a][n - 1] = 0.5 * h;
      edge[a][0] = edge[a][n - 1] = 1;
    }
  }

  int n = g.resolution_[0] * g.resolution_[1];
  g.nodes_.resize(n);
  g.weights_.resize(n);
  g.boundary_.assign(n, 0);
  for (int iy = 0; iy < g.resolution_[1]; ++iy) {
    for (int ix = 0; ix < g.resolution_[0]; ++ix) {
      int i = g.index(ix, iy);
      g.nodes_[i] = {coord[0][ix], coord[1][iy]};
      g.weights_[i] = w1d[0][ix] * w1d[1][iy];
      g.boundary_[i] = edge[0][ix] || edge[1][iy];
    }
  }
  return g;
}

/// Convenience overload for 1D intervals.
inline DomainGrid build_interval(double lo, double hi, int resolution,
                                 Topology topology = Topology::hostile) {
  Box b;
  b.lo = {lo, 0.0};
  b.hi = {hi, 0.0};
  return build_grid(1, b, {resolution, 1}, topology);
}

}  // namespace nlkpp
