#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"

namespace nlkpp {

/// Periodic solution of w' = (-rate + a(t, x) - alpha) w + v(t, x) at every
/// node, i.e. the inverse of (alpha - H) on periodic fields where H is the
/// local part of the operator. Between samples v is interpolated linearly, so
/// nonnegative input gives nonnegative output. The initial value comes from one
/// period of integration and the closure w(0) = w_p(T) / (1 - rho).
class LocalResolvent {
 public:
  LocalResolvent(const PeriodicCoefficient& a, double rate, double alpha, int time_samples,
                 int substeps = 0)
      : rate_(rate), alpha_(alpha), nt_(time_samples), a_(a) {
    const double growth = a.average().maxCoeff() - rate;
    if (!(alpha > growth))
      throw PreconditionError("resolvent diverges: alpha=" + std::to_string(alpha) +
                              " must exceed max a_T - rate = " + std::to_string(growth));
    if (time_samples < 4) throw ConfigError("resolvent needs at least 4 time samples");
    const double T = a.period();
    const double stiff = rate + alpha + a.sup_abs();
    const int need = static_cast<int>(std::ceil(stiff * T / nt_ / 0.25));
    sub_ = std::max({substeps, need, 8});
    // Coefficient values at the RK4 stage times: two per substep.
    const int lattice = 2 * sub_ * nt_;
    coef_.resize(a.nodes(), lattice);
    SpaceField col;
    for (int j = 0; j < lattice; ++j) {
      a.sample(T * j / lattice, col);
      coef_.col(j) = col.array() - rate - alpha;
    }
    // Homogeneous period factor per node, integrated with the same scheme.
    rho_.resize(a.nodes());
    for (int i = 0; i < a.nodes(); ++i) {
      double y = 1.0;
      for (int k = 0; k < nt_; ++k) y = step_interval(i, k, y, 0.0, 0.0);
      rho_[i] = y;
    }
  }

  SpaceTimeField operator()(const SpaceTimeField& v) const {
    if (v.nodes() != a_.nodes() || v.time_samples() != nt_)
      throw PreconditionError("resolvent input has the wrong shape");
    SpaceTimeField out(v.period(), nt_, v.nodes());
    for (int i = 0; i < v.nodes(); ++i) {
      double w = 0.0;
      for (int k = 0; k < nt_; ++k) w = step_interval(i, k, w, v(k, i), v(k + 1, i));
      w /= (1.0 - rho_[i]);
      for (int k = 0; k < nt_; ++k) {
        out(k, i) = w;
        w = step_interval(i, k, w, v(k, i), v(k + 1, i));
      }
    }
    return out;
  }

  /// exp(int_0^T (-rate + a - alpha)) per node, as integrated.
  const SpaceField& period_factor() const { return rho_; }
  double alpha() const { return alpha_; }
  double rate() const { return rate_; }
  int substeps() const { return sub_; }

 private:
  // RK4 across sample interval k with v linear from v0 to v1.
  double step_interval(int i, int k, double w, double v0, double v1) const {
    const double dt = a_.period() / (nt_ * sub_);
    for (int s = 0; s < sub_; ++s) {
      const int j = 2 * (k * sub_ + s);
      const double c0 = coef_(i, j);
      const double ch = coef_(i, j + 1);
      const double c1 = coef_(i, (j + 2) % coef_.cols());
      const double f0 = v0 + (v1 - v0) * s / sub_;
      const double fh = v0 + (v1 - v0) * (s + 0.5) / sub_;
      const double f1 = v0 + (v1 - v0) * (s + 1.0) / sub_;
      double k1 = c0 * w + f0;
      double k2 = ch * (w + 0.5 * dt * k1) + fh;
      double k3 = ch * (w + 0.5 * dt * k2) + fh;
      double k4 = c1 * (w + dt * k3) + f1;
      w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return w;
  }

  double rate_;
  double alpha_;
  int nt_;
  int sub_ = 8;
  PeriodicCoefficient a_;
  Eigen::MatrixXd coef_;
  SpaceField rho_;
};

inline SpaceTimeField local_resolvent(const PeriodicCoefficient& a, double rate, double alpha,
                                      const SpaceTimeField& v) {
  return LocalResolvent(a, rate, alpha, v.time_samples())(v);
}

/// Largest M with R_alpha(1) >= M / (alpha + rate - a_T(x)) at every sample.
inline double resolvent_lower_constant(const PeriodicCoefficient& a, double rate, double alpha,
                                       int time_samples = 64) {
  SpaceTimeField one(a.period(), time_samples, a.nodes());
  one.values().setOnes();
  SpaceTimeField r = local_resolvent(a, rate, alpha, one);
  const SpaceField& aT = a.average();
  double M = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.nodes(); ++i) {
    double scale = alpha + rate - aT[i];
    M = std::min(M, r.values().row(i).minCoeff() * scale);
  }
  return M;
}

}  // namespace nlkpp
