#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/core/nonlinearity.hpp"

namespace nlkpp {

struct ScalarOptions {
  /// RK4 steps per period.
  int steps = 2048;
  int time_samples = 64;
};

struct ScalarPeriodic {
  bool exists = false;
  double initial = 0.0;
  /// v*(t_k) at t_k = k T / n_t.
  std::vector<double> values;
  int evaluations = 0;
};

namespace detail {

// RK4 for v' = f(t, x, v) over [0, T]; `samples` receives n_t values if given.
inline double scalar_period(const KPPNonlinearity& f, const Point& x, double v0, const ScalarOptions& opt,
                            std::vector<double>* samples = nullptr) {
  const double T = f.period();
  const double h = T / opt.steps;
  const int stride = opt.steps / opt.time_samples;
  double v = v0;
  if (samples) samples->clear();
  for (int i = 0; i < opt.steps; ++i) {
    if (samples && i % stride == 0) samples->push_back(v);
    double t = i * h;
    double k1 = f(t, x, v);
    double k2 = f(t + 0.5 * h, x, v + 0.5 * h * k1);
    double k3 = f(t + 0.5 * h, x, v + 0.5 * h * k2);
    double k4 = f(t + h, x, v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

}  // namespace detail

/// Positive T-periodic solution of v' = f(t, x, v) at the point x, found as
/// the root of v0 -> v(T; v0) - v0 in (0, sup S]. None exists when a_T(x) <= 0.
inline ScalarPeriodic scalar_periodic_solution(const KPPNonlinearity& f, const Point& x, double aT,
                                               const ScalarOptions& opt = {}) {
  if (opt.steps % opt.time_samples != 0)
    throw ConfigError("scalar steps must be a multiple of the time samples");
  ScalarPeriodic out;
  if (!(aT > 0.0)) return out;
  double hi = f.sup_bound();
  if (!std::isfinite(hi)) throw PreconditionError("scalar solution needs a finite level S");
  auto g = [&](double v0) {
    ++out.evaluations;
    return detail::scalar_period(f, x, v0, opt) - v0;
  };
  double ghi = g(hi);
  for (int k = 0; ghi > 0.0 && k < 10; ++k) ghi = g(hi *= 2.0);
  if (ghi > 0.0) throw SolverError("bracketing failed above: no sign change up to 2^10 S");
  double lo = 1e-3 * hi, glo = g(lo);
  while (glo <= 0.0 && lo > 1e-14 * hi) glo = g(lo *= 0.5);
  if (!(glo > 0.0)) throw SolverError("bracketing failed below although a_T(x) > 0");
  if (ghi == 0.0) {
    out.initial = hi;
  } else {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    out.initial = 0.5 * (r.first + r.second);
  }
  detail::scalar_period(f, x, out.initial, opt, &out.values);
  out.exists = true;
  return out;
}

/// Per-node v* on the grid of the nonlinearity; zero where none exists.
inline SpaceTimeField scalar_periodic_field(const KPPNonlinearity& f, const ScalarOptions& opt = {},
                                            std::vector<char>* exists = nullptr) {
  const auto& a = f.linearization();
  const auto& nodes = a.node_points();
  SpaceTimeField out(f.period(), opt.time_samples, a.nodes());
  if (exists) exists->assign(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto s = scalar_periodic_solution(f, nodes[i], a.average()[static_cast<Eigen::Index>(i)], opt);
    if (!s.exists) continue;
    if (exists) (*exists)[i] = 1;
    for (int k = 0; k < opt.time_samples; ++k) out.values()(static_cast<Eigen::Index>(i), k) = s.values[k];
  }
  return out;
}

}  // namespace nlkpp
