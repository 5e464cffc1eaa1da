#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "nlkpp/core/field.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"
#include "nlkpp/spectral/monodromy.hpp"

namespace nlkpp {

/// (L + lambda)[phi] = -phi_t + rate (K phi - phi) + a phi + lambda phi on every
/// sample of a periodic field, with the spectral time derivative.
inline SpaceTimeField periodic_operator(const LinearOperatorSpec& spec, double lambda,
                                        const SpaceTimeField& phi) {
  if (phi.nodes() != spec.size()) throw PreconditionError("field does not match the grid");
  SpaceTimeField out = time_derivative(phi);
  out.values() *= -1.0;
  SpaceField a, col, Av;
  for (int k = 0; k < phi.time_samples(); ++k) {
    spec.coefficient().sample(phi.time(k), a);
    col = phi.slice(k);
    spec.apply_with(a, col, Av);
    out.slice(k) += Av + lambda * col;
  }
  return out;
}

struct EigenOptions {
  int max_iters = 10000;
  /// Successive eigenvalue estimates closer than this end the iteration.
  double tol = 1e-10;
  double residual_tol = 1e-6;
  int time_samples = 64;
  /// Default 1e-3 (1 + |lambda*|).
  std::optional<double> principality_gap;
  /// Power iterations before switching to a dense monodromy matrix.
  int dense_switch = 200;
  /// Largest grid for which the dense monodromy matrix is formed.
  int dense_limit = 1600;
  IntegratorSettings integrator;
};

struct EigenResult {
  double lambda1 = std::numeric_limits<double>::quiet_NaN();
  double lambda_star = std::numeric_limits<double>::quiet_NaN();
  SpaceTimeField phi1;
  bool is_principal = false;
  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double gap = 0.0;
  /// Collatz-Wielandt enclosure of lambda1 from the final iterate.
  double lambda_lower = -std::numeric_limits<double>::infinity();
  double lambda_upper = std::numeric_limits<double>::infinity();
  std::string method;
  std::string diagnostic;
};

namespace detail {

struct PowerState {
  SpaceField v;
  double mu = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// One normalized step v <- P v / |P v|_inf with Collatz-Wielandt ratios.
inline void collatz(const SpaceField& v, const SpaceField& w, PowerState& st) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] <= 0.0) continue;
    double r = w[i] / v[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  st.lo = lo;
  st.hi = hi;
}

}  // namespace detail

inline double default_principality_gap(double lambda_star) { return 1e-3 * (1.0 + std::abs(lambda_star)); }

/// lambda1 = -ln r(Phi(T, 0)) / T by power iteration from the constant field,
/// with a dense repeated-squaring fallback on small grids when the spectral
/// gap is too small for the plain iteration.
inline EigenResult principal_spectrum_point(const LinearOperatorSpec& spec, const EigenOptions& opt = {}) {
  EigenResult res;
  res.lambda_star = spec.lambda_star();
  res.gap = opt.principality_gap.value_or(default_principality_gap(res.lambda_star));
  MonodromyMap map(spec, opt.integrator, opt.time_samples);
  const double T = spec.period();
  const int n = spec.size();
  // The sup-norm ratio can stay flat while the profile is still moving (the
  // interior does not feel the boundary for a few periods), so the
  // Collatz-Wielandt enclosure has to be tight as well.
  auto settled = [&](const detail::PowerState& s) {
    return s.lo > 0.0 && std::log(s.hi / s.lo) / T < 1e3 * opt.tol;
  };

  detail::PowerState st;
  st.v = SpaceField::Ones(n);
  double lambda = std::numeric_limits<double>::quiet_NaN();
  int it = 0;
  int calm = 0;
  SpaceField w;
  res.method = "power";
  for (; it < opt.max_iters; ++it) {
    w = map.period_map(st.v);
    double mu = w.cwiseAbs().maxCoeff();
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      res.diagnostic = "monodromy iterate vanished or overflowed";
      break;
    }
    detail::collatz(st.v, w, st);
    double next = -std::log(mu) / T;
    st.mu = mu;
    st.v = w / mu;
    if (std::isfinite(lambda) && std::abs(next - lambda) < opt.tol && settled(st)) {
      if (++calm >= 2) {
        lambda = next;
        res.converged = true;
        ++it;
        break;
      }
    } else {
      calm = 0;
    }
    lambda = next;
    if (it + 1 >= opt.dense_switch && n <= opt.dense_limit) {
      ++it;
      break;
    }
  }

  if (!res.converged && it < opt.max_iters && n <= opt.dense_limit && std::isfinite(lambda)) {
    // Dense monodromy and repeated squaring: Phi^(2^k) v converges after a
    // handful of products even when |mu_2 / mu_1| is within 1e-6 of one.
    res.method = "dense-squaring";
    Eigen::MatrixXd P = map.dense();
    Eigen::MatrixXd Q = P;
    SpaceField v = st.v;
    int squarings = 0;
    for (; squarings < 64; ++squarings) {
      SpaceField nv = Q * v;
      double s = nv.cwiseAbs().maxCoeff();
      if (!(s > 0.0) || !std::isfinite(s)) break;
      nv /= s;
      double change = (nv - v).cwiseAbs().maxCoeff();
      v = nv;
      if (change < 1e-13 && squarings > 2) break;
      Q = Q * Q;
      double qs = Q.cwiseAbs().maxCoeff();
      if (!(qs > 0.0) || !std::isfinite(qs)) break;
      Q /= qs;
    }
    // Polish with plain products of the exact monodromy matrix.
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < 50; ++k) {
      w = P * v;
      double mu = w.cwiseAbs().maxCoeff();
      detail::collatz(v, w, st);
      double next = -std::log(mu) / T;
      v = w / mu;
      st.mu = mu;
      if (std::isfinite(prev) && std::abs(next - prev) < opt.tol && settled(st)) {
        lambda = next;
        res.converged = true;
        break;
      }
      prev = next;
      lambda = next;
    }
    st.v = v;
    it += squarings + 1;
  }
  res.iterations = it;
  res.lambda1 = lambda;
  if (st.hi > 0.0 && std::isfinite(st.lo) && st.lo > 0.0) {
    res.lambda_lower = -std::log(st.hi) / T;
    res.lambda_upper = -std::log(st.lo) / T;
  }
  if (!res.converged) {
    std::ostringstream os;
    os << "no convergence after " << it << " iterations";
    if (!res.diagnostic.empty()) os << " (" << res.diagnostic << ")";
    res.diagnostic = os.str();
  }

  if (std::isfinite(lambda)) {
    // phi1(t_k) = e^{lambda t_k} Phi(t_k, 0) v*, normalized to sup 1.
    SpaceTimeField phi = map.orbit(st.v);
    for (int k = 0; k < phi.time_samples(); ++k) phi.slice(k) *= std::exp(lambda * phi.time(k));
    double s = phi.sup_norm();
    if (s > 0.0) phi.values() /= s;
    res.phi1 = std::move(phi);
    res.residual = periodic_operator(spec, lambda, res.phi1).sup_norm();
  }

  const bool positive = res.phi1.nodes() > 0 && res.phi1.min() > 0.0;
  res.is_principal = res.converged && positive && lambda < res.lambda_star - res.gap &&
                     res.residual <= opt.residual_tol;
  if (res.converged && !res.is_principal) {
    std::ostringstream os;
    if (!(lambda < res.lambda_star - res.gap))
      os << "lambda1=" << lambda << " within principality gap " << res.gap << " of lambda*="
         << res.lambda_star;
    else if (!positive)
      os << "eigenfunction not strictly positive";
    else
      os << "residual " << res.residual << " above tolerance " << opt.residual_tol;
    res.diagnostic = os.str();
  }
  return res;
}

/// True iff lambda1 < lambda* - gap.
inline bool principality_by_threshold(const EigenResult& r) {
  return std::isfinite(r.lambda1) && r.lambda1 < r.lambda_star - r.gap;
}

}  // namespace nlkpp
