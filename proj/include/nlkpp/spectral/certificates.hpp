#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"
#include "nlkpp/spectral/principal.hpp"
#include "nlkpp/spectral/stationary.hpp"

namespace nlkpp {

enum class TestDirection { lower, upper };

inline const char* to_string(TestDirection d) { return d == TestDirection::lower ? "lower" : "upper"; }

struct TestPairReport {
  bool certified = false;
  /// Largest (lower) or smallest (upper) value of (L + lambda)[phi].
  double worst_slack = 0.0;
  int time_index = 0;
  int node = 0;
  double tolerance = 0.0;
};

/// Checks the one-sided inequality (L + lambda)[phi] <= 0 (lower: lambda is
/// below the generalized eigenvalue) or >= 0 (upper) on every sample.
inline TestPairReport certify_test_pair(const LinearOperatorSpec& spec, double lambda,
                                        const SpaceTimeField& phi, TestDirection direction,
                                        double relative_tol = 1e-6) {
  if (!phi.all_finite() || !(phi.min() > 0.0))
    throw PreconditionError("test function must be strictly positive");
  SpaceTimeField r = periodic_operator(spec, lambda, phi);
  TestPairReport rep;
  rep.tolerance = relative_tol * phi.sup_norm();
  Eigen::Index node = 0, k = 0;
  if (direction == TestDirection::lower) {
    rep.worst_slack = r.values().maxCoeff(&node, &k);
    rep.certified = rep.worst_slack <= rep.tolerance;
  } else {
    rep.worst_slack = r.values().minCoeff(&node, &k);
    rep.certified = rep.worst_slack >= -rep.tolerance;
  }
  rep.node = static_cast<int>(node);
  rep.time_index = static_cast<int>(k);
  return rep;
}

/// phi(t, x) = exp(int_0^t (a(s, x) - a_T(x)) ds) on `samples` times, by the
/// cumulative trapezoid rule with `refine` sub-intervals per sample.
inline SpaceTimeField exponential_test_function(const PeriodicCoefficient& a, int samples = 64,
                                                int refine = 16) {
  const int n = a.nodes();
  const double T = a.period();
  const SpaceField& aT = a.average();
  SpaceTimeField phi(T, samples, n);
  SpaceField acc = SpaceField::Zero(n), prev = a.sample(0.0) - aT, cur;
  const int fine = samples * refine;
  const double h = T / fine;
  phi.slice(0).setOnes();
  for (int j = 1; j < fine; ++j) {
    cur = a.sample(j * h) - aT;
    acc += 0.5 * h * (prev + cur);
    prev = cur;
    if (j % refine == 0) phi.slice(j / refine) = acc.array().exp().matrix();
  }
  return phi;
}

struct AnalyticBounds {
  double epsilon = 0.0;
  /// -max a_T - eps and -min a_T + eps.
  double small_lower = 0.0;
  double small_upper = 0.0;
  /// Largest D for which the exponential test function certifies both sides.
  double admissible_D = 0.0;
  bool lower_certified = false;
  bool upper_certified = false;
  /// lambda0 = principal eigenvalue of -(K - I); large-D bound D lambda0 / sigma^m - max a.
  double lambda0 = 0.0;
  double large_D_lower = 0.0;
};

/// Two-sided small-dispersal bound with its admissible D, plus the large-D
/// lower bound, for the kernel and coefficient of `spec`.
inline AnalyticBounds analytic_bounds(const LinearOperatorSpec& spec, double epsilon,
                                      int samples = 64) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  const auto& a = spec.coefficient();
  const SpaceField& aT = a.average();
  const double amax = aT.maxCoeff(), amin = aT.minCoeff();
  AnalyticBounds out;
  out.epsilon = epsilon;
  out.small_lower = -amax - epsilon;
  out.small_upper = -amin + epsilon;

  const auto& K = spec.dispersal();
  SpaceTimeField phi = exponential_test_function(a, samples);
  double rate_low = std::numeric_limits<double>::infinity();
  double rate_up = rate_low;
  SpaceField col, Kphi;
  for (int k = 0; k < samples; ++k) {
    col = phi.slice(k);
    K.multiply(col, Kphi);
    for (int i = 0; i < col.size(); ++i) {
      double jump = Kphi[i] - col[i];
      if (jump > 0.0) rate_low = std::min(rate_low, (amax - aT[i] + epsilon) * col[i] / jump);
      if (jump < 0.0) rate_up = std::min(rate_up, (aT[i] - amin + epsilon) * col[i] / -jump);
    }
  }
  const double scale = std::pow(K.sigma(), K.m());
  double rate = 0.999 * std::min(rate_low, rate_up);
  out.admissible_D = std::isfinite(rate) ? rate * scale : std::numeric_limits<double>::infinity();

  // Confirm at the admissible D (or the current one if unbounded).
  double D = std::isfinite(out.admissible_D) ? out.admissible_D : K.D();
  auto Kd = std::make_shared<const DispersalMatrix>(assemble(
      K.grid(), ScaledKernel(K.kernel().profile(), K.sigma(), K.m(), D)));
  LinearOperatorSpec probe(Kd, a);
  out.lower_certified = certify_test_pair(probe, out.small_lower, phi, TestDirection::lower).certified;
  out.upper_certified = certify_test_pair(probe, out.small_upper, phi, TestDirection::upper).certified;

  out.lambda0 = dispersal_ground_state(K);
  out.large_D_lower = spec.rate() * out.lambda0 - a.max_value();
  return out;
}

}  // namespace nlkpp
