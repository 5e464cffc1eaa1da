#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nlkpp/asymptotics/problem.hpp"
#include "nlkpp/asymptotics/sweeps.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/parallel.hpp"
#include "nlkpp/dynamics/periodic.hpp"
#include "nlkpp/dynamics/scalar.hpp"

namespace nlkpp {

struct LimitRecord {
  std::string parameter;
  double value = 0.0;
  double lambda1 = 0.0;
  bool exists = false;
  /// sup over all samples and nodes of |u* - v*|.
  double error = std::numeric_limits<double>::quiet_NaN();
  /// Same, restricted to nodes farther than the interior margin from the
  /// boundary.
  double interior_error = std::numeric_limits<double>::quiet_NaN();
  int nodes = 0;
  int interior_nodes = 0;
  int periods = 0;
};

struct LimitResult {
  std::vector<LimitRecord> records;
  bool errors_decrease = false;
  bool interior_errors_decrease = false;
};

namespace detail {

inline LimitRecord limit_record(const std::string& name, double value, const Problem& p, const Instance& inst,
                                double interior_radius) {
  LimitRecord rec;
  rec.parameter = name;
  rec.value = value;
  rec.nodes = inst.grid->size();
  auto eig = principal_spectrum_point(inst.spec, p.eigen);
  rec.lambda1 = eig.lambda1;
  NonlinearFlow flow(inst.f, inst.spec, p.evolution);
  auto sol = periodic_solution_squeeze(flow, eig);
  rec.exists = sol.exists;
  rec.periods = sol.periods;
  if (!sol.exists) return rec;
  ScalarOptions so;
  so.time_samples = sol.u_star.time_samples();
  auto v = scalar_periodic_field(inst.f, so);
  double err = 0.0, inner = 0.0;
  const auto& grid = *inst.grid;
  for (int k = 0; k < so.time_samples; ++k) {
    auto u = sol.u_star.slice(k);
    auto w = v.slice(k);
    for (int i = 0; i < grid.size(); ++i) {
      double e = std::abs(u[i] - w[i]);
      err = std::max(err, e);
      if (grid.distance_to_boundary(i) > interior_radius) inner = std::max(inner, e);
    }
  }
  for (int i = 0; i < grid.size(); ++i) rec.interior_nodes += grid.distance_to_boundary(i) > interior_radius;
  rec.error = err;
  rec.interior_error = rec.interior_nodes > 0 ? inner : std::numeric_limits<double>::quiet_NaN();
  return rec;
}

inline void require_positive_average(const Problem& p) {
  PeriodicCoefficient a(p.period, p.a, problem_grid(p), p.time_samples);
  if (!(a.average().minCoeff() > 0.0))
    throw PreconditionError("limit experiment needs min a_T > 0 so that v* exists everywhere");
}

inline LimitResult finish(std::vector<LimitRecord> recs, bool toward_zero) {
  // Records are ordered by increasing parameter; the limit is approached at
  // the small end when toward_zero.
  LimitResult out;
  std::vector<double> e, ie;
  for (const auto& r : recs) {
    e.push_back(r.error);
    ie.push_back(r.interior_error);
  }
  if (toward_zero) {
    std::reverse(e.begin(), e.end());
    std::reverse(ie.begin(), ie.end());
  }
  auto decreasing = [](const std::vector<double>& v) {
    if (v.size() < 2) return false;
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return tail_monotone(v, true, static_cast<int>(v.size())) && v.back() < v.front();
  };
  out.errors_decrease = decreasing(e);
  out.interior_errors_decrease = decreasing(ie);
  out.records = std::move(recs);
  return out;
}

}  // namespace detail

/// sup |u*_sigma - v*| along a sigma list. When `toward_zero` the kernel shrinks
/// and the grid co-refines; otherwise the base grid is used. The interior error
/// ignores a boundary band of width max(margin, sigma gamma): the boundary
/// disturbance decays over a few kernel hops, not one.
inline LimitResult u_star_limit_experiment(const Problem& p, double m, const std::vector<double>& sigmas,
                                           bool toward_zero, int threads = 1, double margin = 0.25) {
  detail::require_sorted_positive(sigmas, "sigma");
  detail::require_positive_average(p);
  std::vector<LimitRecord> recs(sigmas.size());
  parallel_for(static_cast<int>(sigmas.size()), threads, [&](int i) {
    double s = sigmas[i];
    DomainGrid grid = toward_zero ? problem_grid(p, corefined_spacing(p, s)) : problem_grid(p);
    recs[i] = detail::limit_record("sigma", s, p, instantiate(p, grid, s, m, p.D),
                                std::max(margin, s * p.kernel.radius()));
  });
  return detail::finish(std::move(recs), toward_zero);
}

/// sup |u*_D - v*| as D decreases, on the base grid.
inline LimitResult dispersal_rate_solution_limit(const Problem& p, const std::vector<double>& Ds, int threads = 1,
                                                 double margin = 0.25) {
  detail::require_sorted_positive(Ds, "D");
  detail::require_positive_average(p);
  DomainGrid grid = problem_grid(p);
  std::vector<LimitRecord> recs(Ds.size());
  parallel_for(static_cast<int>(Ds.size()), threads, [&](int i) {
    recs[i] = detail::limit_record("D", Ds[i], p, instantiate(p, grid, p.sigma, p.m, Ds[i]),
                                   std::max(margin, p.sigma * p.kernel.radius()));
  });
  return detail::finish(std::move(recs), true);
}

}  // namespace nlkpp
