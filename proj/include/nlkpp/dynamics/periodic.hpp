#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/dynamics/evolution.hpp"
#include "nlkpp/spectral/principal.hpp"

namespace nlkpp {

struct PeriodicSolution {
  bool exists = false;
  /// |lambda1| below the existence tolerance: nothing is claimed.
  bool critical = false;
  bool converged = false;
  SpaceTimeField u_star;
  /// Sup norm of -u_t + rate (K u - u) + f(u) on the samples of u_star.
  double residual = std::numeric_limits<double>::infinity();
  /// |u(T; u*(0)) - u*(0)|_inf.
  double closure = std::numeric_limits<double>::infinity();
  /// max over nodes of |ln(upper_n / lower_n)|.
  std::vector<double> part_metric_history;
  /// Sup norm of the upper iterate after each period.
  std::vector<double> upper_history;
  SpaceField upper, lower;
  double M = 0.0;
  double epsilon = 0.0;
  int periods = 0;
  std::string status;
  std::string diagnostic;
};

struct SqueezeOptions {
  /// Upper start M = M_factor * sup S.
  double M_factor = 2.0;
  double residual_tol = 1e-6;
  /// Replaces the eps phi1 lower start when set (must be a sub-solution start).
  std::optional<SpaceField> lower_start;
  /// Periods of evidence collected when no positive solution exists.
  int extinction_periods = 200;
};

/// Largest eps = 2^-k with eps phi a discrete sub-solution at every sample.
inline double subsolution_epsilon(const NonlinearFlow& flow, const SpaceTimeField& phi, double cap,
                                  int max_halvings = 60) {
  double eps = 1.0;
  for (int k = 0; k <= max_halvings; ++k, eps *= 0.5) {
    if (eps * phi.sup_norm() > cap) continue;
    SpaceTimeField trial = phi;
    trial.values() *= eps;
    if (flow.defect(trial).min() >= 0.0) return eps;
  }
  return 0.0;
}

namespace detail {

inline double part_metric(const SpaceField& upper, const SpaceField& lower) {
  return (upper.array() / lower.array()).log().abs().maxCoeff();
}

}  // namespace detail

/// Two-sided Poincare iteration from a super-solution level M and a
/// sub-solution eps phi1, stopped when the iterates are within squeeze_tol.
inline PeriodicSolution periodic_solution_squeeze(const NonlinearFlow& flow, const EigenResult& eig,
                                                  const SqueezeOptions& opt = {}) {
  const auto& cfg = flow.config();
  const double S = flow.nonlinearity().sup_bound();
  if (!std::isfinite(S)) throw PreconditionError("squeeze needs a finite super-solution level S");
  PeriodicSolution sol;
  sol.M = opt.M_factor * S;
  const int n = flow.size();
  SpaceField upper = SpaceField::Constant(n, sol.M);

  if (!(eig.lambda1 < -cfg.exist_tol)) {
    sol.critical = std::abs(eig.lambda1) <= cfg.exist_tol;
    for (int p = 0; p < opt.extinction_periods; ++p) {
      upper = flow.period_map(upper);
      sol.upper_history.push_back(upper.cwiseAbs().maxCoeff());
      ++sol.periods;
      if (sol.upper_history.back() < 1e-12 * sol.M) break;
    }
    sol.upper = upper;
    bool extinct = sol.upper_history.back() < 1e-6 * sol.M;
    if (sol.critical)
      sol.status = extinct ? "critical: extinction observed" : "critical: extinction not observed";
    else
      sol.status = "extinction";
    return sol;
  }

  SpaceField lower;
  if (opt.lower_start) {
    lower = *opt.lower_start;
    if (lower.size() != n || !(lower.minCoeff() > 0.0))
      throw PreconditionError("lower start must be strictly positive on every node");
  } else {
    if (eig.phi1.nodes() != n || !(eig.phi1.min() > 0.0))
      throw PreconditionError("principal eigenfunction is missing or not positive");
    sol.epsilon = subsolution_epsilon(flow, eig.phi1, sol.M);
    if (!(sol.epsilon > 0.0))
      throw SolverError("no eps = 2^-k (k <= 60) makes eps phi1 a discrete sub-solution");
    lower = sol.epsilon * eig.phi1.slice(0);
  }

  for (; sol.periods < cfg.max_periods;) {
    upper = flow.period_map(upper);
    lower = flow.period_map(lower);
    ++sol.periods;
    if ((lower - upper).maxCoeff() > 1e-12 * sol.M) {
      std::ostringstream os;
      os << "upper and lower iterates crossed after " << sol.periods << " periods";
      throw SolverError(os.str());
    }
    sol.upper_history.push_back(upper.cwiseAbs().maxCoeff());
    sol.part_metric_history.push_back(detail::part_metric(upper, lower));
    if ((upper - lower).cwiseAbs().maxCoeff() <= cfg.squeeze_tol) {
      sol.converged = true;
      break;
    }
  }
  sol.upper = upper;
  sol.lower = lower;
  SpaceField mid = 0.5 * (upper + lower);
  SpaceField end;
  sol.u_star = flow.orbit(mid, &end);
  sol.closure = (end - mid).cwiseAbs().maxCoeff();
  sol.residual = flow.defect(sol.u_star).sup_norm();
  const bool positive = sol.u_star.min() > 0.0;
  sol.exists = sol.converged && positive && sol.residual <= opt.residual_tol;
  sol.status = sol.exists ? "persistence" : "unresolved";
  if (!sol.converged)
    sol.diagnostic = "squeeze did not close within " + std::to_string(cfg.max_periods) + " periods";
  else if (!positive)
    sol.diagnostic = "limit is not strictly positive";
  else if (!sol.exists)
    sol.diagnostic = "residual " + std::to_string(sol.residual) + " above tolerance";
  return sol;
}

/// |u(nT; u0) - u*(0)|_inf for n = 1..periods.
inline std::vector<double> attraction_history(const NonlinearFlow& flow, const SpaceField& u_star0,
                                              const SpaceField& u0, int periods) {
  require_nonnegative(u0);
  std::vector<double> out;
  SpaceField u = u0;
  for (int p = 0; p < periods; ++p) {
    u = flow.period_map(u);
    out.push_back((u - u_star0).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace nlkpp
