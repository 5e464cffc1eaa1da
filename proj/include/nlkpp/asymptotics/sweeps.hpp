#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "nlkpp/asymptotics/problem.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/parallel.hpp"
#include "nlkpp/dynamics/periodic.hpp"
#include "nlkpp/spectral/principal.hpp"
#include "nlkpp/spectral/stationary.hpp"

namespace nlkpp {

struct SweepRecord {
  std::string parameter;
  double value = 0.0;
  double lambda1 = 0.0;
  double lambda_star = 0.0;
  bool is_principal = false;
  bool converged = false;
  /// Sup of u* when solutions were requested and one exists; NaN otherwise.
  double u_sup = std::numeric_limits<double>::quiet_NaN();
  bool persists = false;
  /// |lambda1 + max a_T|.
  double gap_small = 0.0;
  /// |lambda1 - target| for the large-parameter limit (sigma sweeps only).
  double gap_large = std::numeric_limits<double>::quiet_NaN();
  /// lambda1 - (rate lambda0 - max a) (D sweeps only).
  double large_D_margin = std::numeric_limits<double>::quiet_NaN();
  int nodes = 0;
  double spacing = 0.0;
  std::string method;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  /// Shift-equivariance smoke check on one randomly chosen record.
  int shift_index = -1;
  double shift_error = std::numeric_limits<double>::quiet_NaN();
  std::string refinement;
};

struct SweepOptions {
  int threads = 1;
  std::uint64_t seed = 1;
  bool solutions = false;
  /// Shift used by the smoke check.
  double shift = 0.37;
};

namespace detail {

inline SweepRecord eigen_record(const std::string& name, double value, const Instance& inst,
                                const Problem& p, bool solutions) {
  auto r = principal_spectrum_point(inst.spec, p.eigen);
  SweepRecord rec;
  rec.parameter = name;
  rec.value = value;
  rec.lambda1 = r.lambda1;
  rec.lambda_star = r.lambda_star;
  rec.is_principal = r.is_principal;
  rec.converged = r.converged;
  rec.gap_small = std::abs(r.lambda1 + inst.spec.coefficient().average().maxCoeff());
  rec.nodes = inst.grid->size();
  rec.spacing = inst.grid->h();
  rec.method = r.method;
  if (solutions) {
    NonlinearFlow flow(inst.f, inst.spec, p.evolution);
    auto sol = periodic_solution_squeeze(flow, r);
    rec.persists = sol.exists;
    if (sol.exists) rec.u_sup = sol.u_star.sup_norm();
  }
  return rec;
}

inline void shift_check(SweepResult& out, const std::vector<Instance>& insts, const Problem& p,
                        const SweepOptions& opt) {
  if (insts.empty()) return;
  std::mt19937_64 rng(opt.seed);
  int k = static_cast<int>(rng() % insts.size());
  const auto& spec = insts[k].spec;
  double l0 = out.records[k].lambda1;
  double l1 = principal_spectrum_point(spec.with_coefficient(spec.coefficient().shifted(opt.shift)), p.eigen).lambda1;
  out.shift_index = k;
  out.shift_error = std::abs(l1 - (l0 - opt.shift));
}

inline void require_sorted_positive(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw PreconditionError(std::string(what) + " values must be positive");
    if (i > 0 && !(v[i] > v[i - 1])) throw PreconditionError(std::string(what) + " list must be increasing");
  }
}

}  // namespace detail

/// lambda1 across D on the base grid, with the small-D gap and the large-D
/// lower-bound margin.
inline SweepResult sweep_dispersal_rate(const Problem& p, const std::vector<double>& Ds,
                                        const SweepOptions& opt = {}) {
  detail::require_sorted_positive(Ds, "D");
  DomainGrid grid = problem_grid(p);
  std::vector<Instance> insts;
  for (double D : Ds) insts.push_back(instantiate(p, grid, p.sigma, p.m, D));
  SweepResult out;
  out.records.resize(Ds.size());
  out.refinement = "fixed grid h=" + std::to_string(grid.h());
  const double lambda0 = dispersal_ground_state(insts.front().spec.dispersal());
  parallel_for(static_cast<int>(Ds.size()), opt.threads, [&](int i) {
    auto rec = detail::eigen_record("D", Ds[i], insts[i], p, opt.solutions);
    rec.large_D_margin = rec.lambda1 - (insts[i].spec.rate() * lambda0 - insts[i].spec.coefficient().max_value());
    out.records[i] = rec;
  });
  detail::shift_check(out, insts, p, opt);
  return out;
}

/// lambda1 across sigma for cost exponent m. With co_refine the grid spacing
/// follows h = min(h_base, sigma gamma / 4); otherwise the base grid is used
/// and under-resolved sigma are rejected.
inline SweepResult sweep_dispersal_range(const Problem& p, double m, const std::vector<double>& sigmas,
                                         bool co_refine, const SweepOptions& opt = {}) {
  detail::require_sorted_positive(sigmas, "sigma");
  std::vector<Instance> insts;
  for (double s : sigmas) {
    DomainGrid grid = co_refine ? problem_grid(p, corefined_spacing(p, s)) : problem_grid(p);
    insts.push_back(instantiate(p, grid, s, m, p.D));
  }
  SweepResult out;
  out.records.resize(sigmas.size());
  out.refinement = co_refine ? "h = min(h_base, sigma*gamma/4)" : "fixed grid";
  parallel_for(static_cast<int>(sigmas.size()), opt.threads, [&](int i) {
    auto rec = detail::eigen_record("sigma", sigmas[i], insts[i], p, opt.solutions);
    const double amax = insts[i].spec.coefficient().average().maxCoeff();
    const double target = m == 0.0 ? p.D - amax : -amax;
    rec.gap_large = std::abs(rec.lambda1 - target);
    out.records[i] = rec;
  });
  detail::shift_check(out, insts, p, opt);
  return out;
}

/// True when the last `count` values are monotone (non-increasing when
/// `decreasing`).
inline bool tail_monotone(const std::vector<double>& v, bool decreasing, int count = 3, double tol = 0.0) {
  int n = static_cast<int>(v.size());
  for (int i = std::max(1, n - count + 1); i < n; ++i) {
    if (decreasing && v[i] > v[i - 1] + tol) return false;
    if (!decreasing && v[i] < v[i - 1] - tol) return false;
  }
  return true;
}

struct RadialCheck {
  bool radial = false;
  double symmetry_defect = 0.0;
  double monotonicity_defect = 0.0;
  bool contains_origin = false;
};

/// a(t, x) = a(t, y) when |x| = |y| and a(t, x) <= a(t, y) when |x| >= |y|,
/// at every time sample.
inline RadialCheck check_radial(const Problem& p, const DomainGrid& grid, double tol = 1e-10) {
  RadialCheck rc;
  rc.contains_origin = grid.contains({0.0, 0.0}, 0.0);
  PeriodicCoefficient a(p.period, p.a, grid, p.time_samples);
  const int n = grid.size();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = norm(grid.node(i));
  std::sort(order.begin(), order.end(), [&](int i, int j) { return r[i] < r[j]; });
  SpaceField col;
  for (int k = 0; k < p.time_samples; ++k) {
    a.sample(p.period * k / p.time_samples, col);
    // Walk outward: equal radii must agree, larger radii may not exceed the
    // running minimum over smaller radii.
    double running_min = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n;) {
      int e = s;
      double lo = col[order[s]], hi = col[order[s]];
      while (e < n && r[order[e]] <= r[order[s]] + 1e-12) {
        lo = std::min(lo, col[order[e]]);
        hi = std::max(hi, col[order[e]]);
        ++e;
      }
      rc.symmetry_defect = std::max(rc.symmetry_defect, hi - lo);
      if (std::isfinite(running_min)) rc.monotonicity_defect = std::max(rc.monotonicity_defect, hi - running_min);
      running_min = std::min(running_min, lo);
      s = e;
    }
  }
  rc.radial = rc.contains_origin && rc.symmetry_defect <= tol && rc.monotonicity_defect <= tol;
  return rc;
}

struct MonotonicityReport {
  bool holds = false;
  RadialCheck radial;
  std::vector<SweepRecord> records;
  /// max_i (lambda1(sigma_i) - lambda1(sigma_{i+1})).
  double worst_drop = 0.0;
};

/// Checks that sigma -> lambda1 (m = 0) is non-decreasing for radially
/// symmetric, radially non-increasing a. All sigma share one grid that
/// resolves the smallest kernel.
inline MonotonicityReport check_sigma_monotonicity(const Problem& p, const std::vector<double>& sigmas,
                                                   double mono_tol = 1e-6, const SweepOptions& opt = {}) {
  detail::require_sorted_positive(sigmas, "sigma");
  MonotonicityReport rep;
  DomainGrid grid = problem_grid(p, corefined_spacing(p, sigmas.front()));
  rep.radial = check_radial(p, grid);
  if (!rep.radial.radial)
    throw PreconditionError("coefficient is not radially symmetric and non-increasing about an interior origin");
  rep.records.resize(sigmas.size());
  parallel_for(static_cast<int>(sigmas.size()), opt.threads, [&](int i) {
    rep.records[i] = detail::eigen_record("sigma", sigmas[i], instantiate(p, grid, sigmas[i], 0.0, p.D), p, false);
  });
  for (std::size_t i = 1; i < rep.records.size(); ++i)
    rep.worst_drop = std::max(rep.worst_drop, rep.records[i - 1].lambda1 - rep.records[i].lambda1);
  rep.holds = rep.worst_drop <= mono_tol;
  return rep;
}

struct CriticalSigma {
  bool found = false;
  double sigma_star = std::numeric_limits<double>::quiet_NaN();
  double lambda_at = std::numeric_limits<double>::quiet_NaN();
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  /// (sigma, lambda1) for every evaluation, in order.
  std::vector<std::pair<double, double>> history;
  int nodes = 0;
};

/// sigma* with lambda1(sigma*) = 0 for m = 0 on one grid, by bracketed
/// root finding in log sigma. Returns found = false when the endpoints do not
/// bracket a sign change.
inline CriticalSigma critical_sigma(const Problem& p, double sigma_lo, double sigma_hi, double h_max = 0.0,
                                    double lambda_tol = 1e-4) {
  if (!(sigma_lo > 0.0 && sigma_hi > sigma_lo)) throw PreconditionError("need 0 < sigma_lo < sigma_hi");
  double h = corefined_spacing(p, sigma_lo);
  if (h_max > 0.0) h = std::min(h, h_max);
  DomainGrid grid = problem_grid(p, h);
  CriticalSigma out;
  out.nodes = grid.size();
  auto lambda = [&](double log_sigma) {
    double s = std::exp(log_sigma);
    double l = principal_spectrum_point(instantiate(p, grid, s, 0.0, p.D).spec, p.eigen).lambda1;
    out.history.emplace_back(s, l);
    return l;
  };
  double a = std::log(sigma_lo), b = std::log(sigma_hi);
  out.lambda_lo = lambda(a);
  out.lambda_hi = lambda(b);
  if (!(out.lambda_lo < 0.0 && out.lambda_hi > 0.0)) return out;
  std::uintmax_t iters = 60;
  auto stop = [&](double l, double r) { return std::abs(r - l) < 1e-7; };
  auto root = boost::math::tools::toms748_solve(lambda, a, b, out.lambda_lo, out.lambda_hi, stop, iters);
  out.sigma_star = std::exp(0.5 * (root.first + root.second));
  out.lambda_at = lambda(std::log(out.sigma_star));
  out.found = std::abs(out.lambda_at) <= lambda_tol;
  return out;
}

struct ProbePoint {
  double sigma = 0.0;
  double lambda1 = 0.0;
  bool exists = false;
  double u_sup = 0.0;
  int periods = 0;
};

/// Sup of u*_sigma along sigma increasing to sigma*; observational only.
inline std::vector<ProbePoint> open_problem_probe(const Problem& p, const CriticalSigma& crit,
                                                  const std::vector<double>& fractions) {
  std::vector<ProbePoint> out;
  if (!crit.found) return out;
  DomainGrid grid = problem_grid(p, corefined_spacing(p, crit.sigma_star * fractions.front()));
  for (double frac : fractions) {
    ProbePoint pt;
    pt.sigma = crit.sigma_star * frac;
    auto inst = instantiate(p, grid, pt.sigma, 0.0, p.D);
    auto eig = principal_spectrum_point(inst.spec, p.eigen);
    pt.lambda1 = eig.lambda1;
    auto sol = periodic_solution_squeeze(NonlinearFlow(inst.f, inst.spec, p.evolution), eig);
    pt.exists = sol.exists;
    pt.periods = sol.periods;
    pt.u_sup = sol.exists ? sol.u_star.sup_norm() : 0.0;
    out.push_back(pt);
  }
  return out;
}

}  // namespace nlkpp
