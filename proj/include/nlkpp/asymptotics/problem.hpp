#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/grid.hpp"
#include "nlkpp/core/kernel.hpp"
#include "nlkpp/core/nonlinearity.hpp"
#include "nlkpp/dynamics/evolution.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"
#include "nlkpp/spectral/principal.hpp"

namespace nlkpp {

/// Everything needed to rebuild the discrete problem at other values of
/// (D, sigma, m) or other resolutions.
struct Problem {
  int dimension = 1;
  Box bounds{{-1.0, 0.0}, {1.0, 0.0}};
  Topology topology = Topology::hostile;
  KernelProfile kernel = builtin_kernel(KernelShape::triangular);
  double sigma = 1.0;
  double m = 0.0;
  double D = 1.0;
  double period = 1.0;
  Sampler a = [](double, const Point& x) { return 2.0 - x.x * x.x; };
  /// Logistic crowding b; constant 1 when empty.
  Sampler b;
  /// logistic: f = u (a - b u); linear: f = a u.
  KPPNonlinearity::Family reaction = KPPNonlinearity::Family::logistic;
  /// Base nodes per axis.
  int resolution = 201;
  int time_samples = 64;
  EigenOptions eigen;
  EvolutionConfig evolution;
};

/// A concrete discretization of a Problem.
struct Instance {
  std::shared_ptr<const DomainGrid> grid;
  LinearOperatorSpec spec;
  KPPNonlinearity f;
};

inline double base_spacing(const Problem& p) {
  const double n = p.topology == Topology::torus ? p.resolution : p.resolution - 1;
  double h = (p.bounds.hi[0] - p.bounds.lo[0]) / n;
  if (p.dimension == 2) h = std::max(h, (p.bounds.hi[1] - p.bounds.lo[1]) / n);
  return h;
}

/// Uniform grid with spacing at most min(base spacing, h_max).
inline DomainGrid problem_grid(const Problem& p, double h_max = 0.0) {
  double h = base_spacing(p);
  if (h_max > 0.0) h = std::min(h, h_max);
  std::array<int, 2> res{1, 1};
  for (int axis = 0; axis < p.dimension; ++axis) {
    double len = p.bounds.hi[axis] - p.bounds.lo[axis];
    int cells = static_cast<int>(std::ceil(len / h - 1e-9));
    res[axis] = p.topology == Topology::torus ? std::max(cells, kMinResolution) : std::max(cells + 1, kMinResolution);
  }
  return build_grid(p.dimension, p.bounds, res, p.topology);
}

/// Co-refinement for small kernels: h = min(h_base, sigma gamma / 4).
inline double corefined_spacing(const Problem& p, double sigma) {
  return std::min(base_spacing(p), sigma * p.kernel.radius() / 4.0);
}

inline Instance instantiate(const Problem& p, const DomainGrid& grid, double sigma, double m, double D) {
  auto g = std::make_shared<const DomainGrid>(grid);
  PeriodicCoefficient a(p.period, p.a, grid, p.time_samples);
  Sampler bs = p.b ? p.b : Sampler([](double, const Point&) { return 1.0; });
  auto K = std::make_shared<const DispersalMatrix>(assemble(grid, ScaledKernel(p.kernel, sigma, m, D)));
  if (p.reaction == KPPNonlinearity::Family::linear) return {g, LinearOperatorSpec(K, a), KPPNonlinearity::linear(a)};
  if (p.reaction != KPPNonlinearity::Family::logistic) throw ConfigError("problem reaction must be logistic or linear");
  PeriodicCoefficient b(p.period, bs, grid, p.time_samples);
  return {g, LinearOperatorSpec(K, a), KPPNonlinearity::logistic(a, b)};
}

inline Instance instantiate(const Problem& p) { return instantiate(p, problem_grid(p), p.sigma, p.m, p.D); }

}  // namespace nlkpp
