#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"

namespace nlkpp {

struct IntegratorSettings {
  /// Steps per period never drop below this (accuracy floor).
  int min_steps_per_period = 256;
  /// Cap on the number of steps for one call; exceeding it is an error.
  long max_steps = 50'000'000;
  /// dt <= positivity_factor / (rate + sup|a|).
  double positivity_factor = 0.5;
};

/// Classical RK4 for v' = A(t) v with A(t) = rate (K - I) + diag(a(t, .)).
/// The step is fixed per period so that every period revisits the same stage
/// times; coefficient values on that lattice are cached.
class MonodromyMap {
 public:
  MonodromyMap() = default;
  MonodromyMap(LinearOperatorSpec spec, const IntegratorSettings& settings = {},
               int time_samples = 64)
      : spec_(std::move(spec)), settings_(settings), nt_(time_samples) {
    if (time_samples < 4) throw ConfigError("at least 4 time samples are required");
    const double T = spec_.period();
    const double bound = spec_.rate() + spec_.coefficient().sup_abs();
    const double dt_max = settings.positivity_factor / std::max(bound, 1e-300);
    long steps = std::max<long>(settings.min_steps_per_period,
                                static_cast<long>(std::ceil(T / dt_max - 1e-9)));
    steps = (steps + nt_ - 1) / nt_ * nt_;
    if (steps > settings.max_steps)
      throw SolverError("stiffness guard: " + std::to_string(steps) +
                        " steps per period exceed the cap");
    steps_ = static_cast<int>(steps);
    dt_ = T / steps_;
    table_ = CoefficientTable(spec_.coefficient(), 2 * steps_);
  }

  const LinearOperatorSpec& spec() const { return spec_; }
  int steps_per_period() const { return steps_; }
  int time_samples() const { return nt_; }
  double dt() const { return dt_; }
  double period() const { return spec_.period(); }
  int size() const { return spec_.size(); }

  /// Advances V (a vector or a block of columns) by `count` steps starting at
  /// lattice time k0 * dt.
  template <class Mat>
  void advance(long k0, long count, Mat& V) const {
    Mat k1, k2, k3, k4, tmp;
    const double rate = spec_.rate();
    const auto& K = spec_.dispersal();
    auto rhs = [&](const SpaceField& a, const Mat& x, Mat& out) {
      if constexpr (std::is_same_v<Mat, SpaceField>) {
        K.multiply(x, out);
      } else {
        if (K.has_dense())
          out.noalias() = K.dense_matrix() * x;
        else
          out.noalias() = K.matrix() * x;
      }
      out = rate * (out - x) + a.asDiagonal() * x;
    };
    const int lattice = 2 * steps_;
    for (long n = 0; n < count; ++n) {
      const long j = 2 * (k0 + n);
      const SpaceField& a0 = table_.column(static_cast<int>(j % lattice));
      const SpaceField& ah = table_.column(static_cast<int>((j + 1) % lattice));
      const SpaceField& a1 = table_.column(static_cast<int>((j + 2) % lattice));
      rhs(a0, V, k1);
      tmp = V + 0.5 * dt_ * k1;
      rhs(ah, tmp, k2);
      tmp = V + 0.5 * dt_ * k2;
      rhs(ah, tmp, k3);
      tmp = V + dt_ * k3;
      rhs(a1, tmp, k4);
      V += (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

  /// Phi(t, s) v for t >= s. Lattice-aligned endpoints reuse the cached
  /// coefficient table; other endpoints use uniform sub-steps no longer than
  /// dt with the coefficient sampler.
  SpaceField propagate(double s, double t, const SpaceField& v) const {
    if (t < s) throw PreconditionError("propagate needs t >= s");
    if (v.size() != size()) throw PreconditionError("field size does not match the grid");
    if (!v.allFinite()) throw PreconditionError("initial field is not finite");
    SpaceField out = v;
    const double ks = s / dt_, kt = t / dt_;
    if (std::abs(ks - std::round(ks)) < 1e-9 && std::abs(kt - std::round(kt)) < 1e-9) {
      long k0 = std::lround(ks), k1 = std::lround(kt);
      long start = ((k0 % steps_) + steps_) % steps_;
      if (k1 - k0 > settings_.max_steps) throw SolverError("sub-step cap exceeded");
      advance(start, k1 - k0, out);
      return out;
    }
    long n = static_cast<long>(std::ceil((t - s) / dt_ - 1e-9));
    if (n > settings_.max_steps) throw SolverError("sub-step cap exceeded");
    if (n == 0) return out;
    const double h = (t - s) / n;
    SpaceField k1, k2, k3, k4, a0, ah, a1, tmp;
    auto rhs = [&](const SpaceField& a, const SpaceField& x, SpaceField& o) {
      spec_.apply_with(a, x, o);
    };
    for (long i = 0; i < n; ++i) {
      double ti = s + i * h;
      spec_.coefficient().sample(ti, a0);
      spec_.coefficient().sample(ti + 0.5 * h, ah);
      spec_.coefficient().sample(ti + h, a1);
      rhs(a0, out, k1);
      tmp = out + 0.5 * h * k1;
      rhs(ah, tmp, k2);
      tmp = out + 0.5 * h * k2;
      rhs(ah, tmp, k3);
      tmp = out + h * k3;
      rhs(a1, tmp, k4);
      out += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
  }

  /// Phi(T, 0) v.
  SpaceField period_map(const SpaceField& v) const {
    SpaceField out = v;
    advance(0, steps_, out);
    return out;
  }

  /// Samples Phi(t_k, 0) v at t_k = k T / n_t, k = 0..n_t-1; `end` receives
  /// Phi(T, 0) v.
  SpaceTimeField orbit(const SpaceField& v, SpaceField* end = nullptr) const {
    SpaceTimeField out(period(), nt_, size());
    SpaceField cur = v;
    const int stride = steps_ / nt_;
    for (int k = 0; k < nt_; ++k) {
      out.slice(k) = cur;
      advance(static_cast<long>(k) * stride, stride, cur);
    }
    if (end) *end = cur;
    return out;
  }

  /// Phi(T, 0) as a dense matrix, all columns propagated together.
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(size(), size());
    advance(0, steps_, V);
    return V;
  }

 private:
  LinearOperatorSpec spec_;
  IntegratorSettings settings_;
  int nt_ = 64;
  int steps_ = 0;
  double dt_ = 0.0;
  CoefficientTable table_;
};

}  // namespace nlkpp
