#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/core/nonlinearity.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"

namespace nlkpp {

struct EvolutionConfig {
  int min_steps_per_period = 256;
  /// dt <= positivity_factor / (rate + Lipschitz bound of f).
  double positivity_factor = 0.5;
  int time_samples = 64;
  /// |u|_inf above blowup_factor * sup S aborts the run.
  double blowup_factor = 10.0;
  /// Lipschitz bound of f is taken over [0, lipschitz_factor * sup S].
  double lipschitz_factor = 4.0;
  long max_steps_per_period = 5'000'000;
  /// Cap on Poincare iterations in the periodic-solution drivers.
  int max_periods = 20000;
  double squeeze_tol = 1e-8;
  double exist_tol = 1e-4;
};

/// u_t = rate (K u - u) + f(t, x, u) by classical RK4 on a fixed per-period
/// step lattice. Logistic and linear reactions are tabulated on the stage
/// times; custom reactions are evaluated directly.
class NonlinearFlow {
 public:
  NonlinearFlow(KPPNonlinearity f, LinearOperatorSpec spec, const EvolutionConfig& cfg = {})
      : f_(std::move(f)), spec_(std::move(spec)), cfg_(cfg) {
    if (f_.linearization().nodes() != spec_.size())
      throw ConfigError("nonlinearity and operator live on different grids");
    if (std::abs(f_.period() - spec_.period()) > 1e-12 * spec_.period())
      throw ConfigError("nonlinearity and operator periods differ");
    if (cfg.time_samples < 4) throw ConfigError("at least 4 time samples are required");
    nt_ = cfg.time_samples;
    const double S = f_.sup_bound();
    double lip = f_.lipschitz_bound(std::isfinite(S) ? cfg.lipschitz_factor * S : 1.0);
    const double T = spec_.period();
    const double dt_max = cfg.positivity_factor / std::max(spec_.rate() + lip, 1e-300);
    long steps = std::max<long>(cfg.min_steps_per_period,
                                static_cast<long>(std::ceil(T / dt_max - 1e-9)));
    steps = (steps + nt_ - 1) / nt_ * nt_;
    if (steps > cfg.max_steps_per_period)
      throw SolverError("stiffness guard: " + std::to_string(steps) + " steps per period exceed the cap");
    steps_ = static_cast<int>(steps);
    dt_ = T / steps_;
    if (f_.family() != KPPNonlinearity::Family::custom) {
      a_ = CoefficientTable(f_.linearization(), 2 * steps_);
      if (f_.crowding()) b_ = CoefficientTable(*f_.crowding(), 2 * steps_);
    }
    limit_ = std::isfinite(S) ? cfg.blowup_factor * S : std::numeric_limits<double>::infinity();
  }

  const KPPNonlinearity& nonlinearity() const { return f_; }
  const LinearOperatorSpec& spec() const { return spec_; }
  const EvolutionConfig& config() const { return cfg_; }
  int steps_per_period() const { return steps_; }
  int time_samples() const { return nt_; }
  double dt() const { return dt_; }
  double period() const { return spec_.period(); }
  int size() const { return spec_.size(); }

  /// Right-hand side at half-step lattice index j (time j dt / 2).
  void rhs(long j, const SpaceField& u, SpaceField& out) const {
    spec_.dispersal().multiply(u, out);
    out = spec_.rate() * (out - u);
    const int lattice = 2 * steps_;
    const int jj = static_cast<int>(((j % lattice) + lattice) % lattice);
    switch (f_.family()) {
      case KPPNonlinearity::Family::linear:
        out.array() += a_.column(jj).array() * u.array();
        break;
      case KPPNonlinearity::Family::logistic:
        out.array() += u.array() * (a_.column(jj).array() - b_.column(jj).array() * u.array());
        break;
      case KPPNonlinearity::Family::custom:
        f_.evaluate(0.5 * dt_ * jj, u, scratch_);
        out += scratch_;
        break;
    }
  }

  /// `count` RK4 steps from lattice time k0 dt.
  void advance(long k0, long count, SpaceField& u) const {
    for (long n = 0; n < count; ++n) {
      const long j = 2 * (k0 + n);
      rhs(j, u, k1_);
      tmp_ = u + 0.5 * dt_ * k1_;
      rhs(j + 1, tmp_, k2_);
      tmp_ = u + 0.5 * dt_ * k2_;
      rhs(j + 1, tmp_, k3_);
      tmp_ = u + dt_ * k3_;
      rhs(j + 2, tmp_, k4_);
      u += (dt_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
      guard(u);
    }
  }

  /// RK4 with uniform steps no longer than dt between arbitrary times, with
  /// the reaction evaluated at the exact stage times.
  void advance_time(double s, double t, SpaceField& u) const {
    long n = static_cast<long>(std::ceil((t - s) / dt_ - 1e-9));
    if (n <= 0) return;
    const double h = (t - s) / n;
    auto F = [&](double tau, const SpaceField& x, SpaceField& out) {
      spec_.dispersal().multiply(x, out);
      out = spec_.rate() * (out - x);
      f_.evaluate(tau, x, scratch_);
      out += scratch_;
    };
    for (long i = 0; i < n; ++i) {
      double ti = s + i * h;
      F(ti, u, k1_);
      tmp_ = u + 0.5 * h * k1_;
      F(ti + 0.5 * h, tmp_, k2_);
      tmp_ = u + 0.5 * h * k2_;
      F(ti + 0.5 * h, tmp_, k3_);
      tmp_ = u + h * k3_;
      F(ti + h, tmp_, k4_);
      u += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
      guard(u);
    }
  }

  /// u(T; u0).
  SpaceField period_map(const SpaceField& u0) const {
    SpaceField u = u0;
    advance(0, steps_, u);
    return u;
  }

  /// u(t_k; u0) at t_k = k T / n_t, k = 0..n_t-1; `end` receives u(T).
  SpaceTimeField orbit(const SpaceField& u0, SpaceField* end = nullptr) const {
    SpaceTimeField out(period(), nt_, size());
    SpaceField u = u0;
    const int stride = steps_ / nt_;
    for (int k = 0; k < nt_; ++k) {
      out.slice(k) = u;
      advance(static_cast<long>(k) * stride, stride, u);
    }
    if (end) *end = u;
    return out;
  }

  /// -u_t + rate (K u - u) + f(t, x, u) on every sample of a periodic field,
  /// with the spectral time derivative.
  SpaceTimeField defect(const SpaceTimeField& u) const {
    SpaceTimeField out = time_derivative(u);
    out.values() *= -1.0;
    SpaceField col, Ku, fu;
    for (int k = 0; k < u.time_samples(); ++k) {
      col = u.slice(k);
      spec_.dispersal().multiply(col, Ku);
      f_.evaluate(u.time(k), col, fu);
      out.slice(k) += spec_.rate() * (Ku - col) + fu;
    }
    return out;
  }

 private:
  void guard(const SpaceField& u) const {
    double top = u.cwiseAbs().maxCoeff();
    if (!std::isfinite(top) || top > limit_)
      throw SolverError("blow-up guard: |u|_inf=" + std::to_string(top) + " exceeds " +
                        std::to_string(limit_));
  }

  KPPNonlinearity f_;
  LinearOperatorSpec spec_;
  EvolutionConfig cfg_;
  int nt_ = 64;
  int steps_ = 0;
  double dt_ = 0.0;
  double limit_ = std::numeric_limits<double>::infinity();
  CoefficientTable a_, b_;
  mutable SpaceField k1_, k2_, k3_, k4_, tmp_, scratch_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpaceField> states;
};

inline void require_nonnegative(const SpaceField& u0) {
  if (!u0.allFinite()) throw PreconditionError("initial data is not finite");
  if (u0.size() > 0 && u0.minCoeff() < 0.0) throw PreconditionError("initial data must be nonnegative");
}

/// Solution from u0 at t = 0, sampled every T / n_t up to t_end (the last
/// sample is at t_end exactly).
inline Trajectory evolve(const NonlinearFlow& flow, const SpaceField& u0, double t_end) {
  require_nonnegative(u0);
  if (u0.size() != flow.size()) throw PreconditionError("initial data does not match the grid");
  if (!(t_end >= 0.0)) throw PreconditionError("t_end must be nonnegative");
  Trajectory tr;
  SpaceField u = u0;
  const int stride = flow.steps_per_period() / flow.time_samples();
  const double sample_dt = stride * flow.dt();
  const long whole = static_cast<long>(std::floor(t_end / sample_dt + 1e-9));
  tr.times.push_back(0.0);
  tr.states.push_back(u);
  for (long k = 0; k < whole; ++k) {
    flow.advance(k * stride, stride, u);
    tr.times.push_back((k + 1) * sample_dt);
    tr.states.push_back(u);
  }
  double reached = whole * sample_dt;
  if (t_end - reached > 1e-12 * std::max(1.0, t_end)) {
    flow.advance_time(reached, t_end, u);
    tr.times.push_back(t_end);
    tr.states.push_back(u);
  }
  return tr;
}

inline Trajectory evolve(const KPPNonlinearity& f, const LinearOperatorSpec& spec,
                         const SpaceField& u0, double t_end, const EvolutionConfig& cfg = {}) {
  return evolve(NonlinearFlow(f, spec, cfg), u0, t_end);
}

inline SpaceField poincare_map(const NonlinearFlow& flow, const SpaceField& u0) {
  require_nonnegative(u0);
  return flow.period_map(u0);
}

struct DecayReport {
  /// Least-squares slope of ln |u(nT)|_inf against n over the tail.
  double slope = 0.0;
  std::vector<double> log_norms;
  int tail_start = 0;
};

/// Extinction rate over `periods` periods; the slope is fitted on the second
/// half of the record.
inline DecayReport decay_rate(const NonlinearFlow& flow, const SpaceField& u0, int periods = 40) {
  require_nonnegative(u0);
  if (!(u0.cwiseAbs().maxCoeff() > 0.0))
    throw PreconditionError("degenerate trajectory: initial data is identically zero");
  if (periods < 4) throw PreconditionError("decay_rate needs at least 4 periods");
  DecayReport rep;
  SpaceField u = u0;
  rep.log_norms.push_back(std::log(u.cwiseAbs().maxCoeff()));
  for (int n = 0; n < periods; ++n) {
    u = flow.period_map(u);
    double s = u.cwiseAbs().maxCoeff();
    if (!(s > 1e-290)) throw SolverError("trajectory reached zero before enough samples");
    rep.log_norms.push_back(std::log(s));
  }
  rep.tail_start = periods / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int n = rep.tail_start; n <= periods; ++n, ++m) {
    sx += n;
    sy += rep.log_norms[n];
    sxx += double(n) * n;
    sxy += n * rep.log_norms[n];
  }
  rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

struct ModulusRow {
  double delta = 0.0;
  double modulus = 0.0;
};

/// sup over samples with t >= t0 of max_{|x_i - x_j| <= delta} |u_i - u_j|.
inline std::vector<ModulusRow> equicontinuity_modulus(const Trajectory& tr, const DomainGrid& grid,
                                                      double t0, const std::vector<double>& deltas) {
  std::vector<ModulusRow> out;
  for (double d : deltas) out.push_back({d, 0.0});
  const int n = grid.size();
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    if (tr.times[s] < t0 - 1e-12) continue;
    const SpaceField& u = tr.states[s];
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double dist = norm(grid.displacement(i, j));
        double jump = std::abs(u[i] - u[j]);
        for (auto& row : out)
          if (dist <= row.delta + 1e-12) row.modulus = std::max(row.modulus, jump);
      }
    }
  }
  return out;
}

}  // namespace nlkpp
