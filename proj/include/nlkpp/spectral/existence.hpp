#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"
#include "nlkpp/nonlocal/resolvent.hpp"

namespace nlkpp {

struct RadiusOptions {
  int time_samples = 32;
  int max_iters = 5000;
  double tol = 1e-11;
  /// exists requires some radius above 1 + margin.
  double margin = 1e-8;
};

struct RadiusPoint {
  double alpha = 0.0;
  double radius = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ExistenceReport {
  bool exists = false;
  /// First alpha with radius above one, NaN when none.
  double witness = std::numeric_limits<double>::quiet_NaN();
  std::vector<RadiusPoint> points;
};

/// Spectral radius of v -> rate K (alpha - H)^{-1} v on periodic fields, by
/// power iteration in the sup norm from the constant field.
inline RadiusPoint resolvent_radius(const LinearOperatorSpec& spec, double alpha,
                                    const RadiusOptions& opt = {}) {
  LocalResolvent R(spec.coefficient(), spec.rate(), alpha, opt.time_samples);
  const auto& K = spec.dispersal();
  SpaceTimeField v(spec.period(), opt.time_samples, spec.size());
  v.values().setOnes();
  RadiusPoint p;
  p.alpha = alpha;
  SpaceField col, Kcol;
  for (int it = 0; it < opt.max_iters; ++it) {
    SpaceTimeField w = R(v);
    for (int k = 0; k < w.time_samples(); ++k) {
      col = w.slice(k);
      K.multiply(col, Kcol);
      w.slice(k) = spec.rate() * Kcol;
    }
    double r = w.sup_norm();
    if (!(r > 0.0)) throw SolverError("resolvent iterate vanished");
    // Collatz-Wielandt enclosure; the sup ratio alone can stall while the
    // profile is still moving.
    double lo = (w.values().array() / v.values().array()).minCoeff();
    double hi = (w.values().array() / v.values().array()).maxCoeff();
    v.values() = w.values() / r;
    p.radius = r;
    p.iterations = it + 1;
    if (hi - lo < opt.tol * hi) {
      p.converged = true;
      break;
    }
  }
  return p;
}

/// Existence of a principal eigenvalue through the radius criterion: some alpha
/// in (-lambda*, -lambda* + 1] with radius above one.
inline ExistenceReport existence_by_resolvent_radius(const LinearOperatorSpec& spec,
                                                     const std::vector<double>& alphas,
                                                     const RadiusOptions& opt = {}) {
  const double lo = -spec.lambda_star();
  ExistenceReport rep;
  for (double alpha : alphas) {
    if (!(alpha > lo && alpha <= lo + 1.0 + 1e-12))
      throw PreconditionError("alpha=" + std::to_string(alpha) + " outside (" + std::to_string(lo) +
                              ", " + std::to_string(lo + 1.0) + "]");
    rep.points.push_back(resolvent_radius(spec, alpha, opt));
    if (!rep.exists && rep.points.back().radius > 1.0 + opt.margin) {
      rep.exists = true;
      rep.witness = alpha;
    }
  }
  return rep;
}

/// Evenly spaced alphas in (-lambda*, -lambda* + 1].
inline std::vector<double> admissible_alpha_grid(const LinearOperatorSpec& spec, int count) {
  const double lo = -spec.lambda_star();
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(lo + static_cast<double>(k) / count);
  return out;
}

}  // namespace nlkpp
