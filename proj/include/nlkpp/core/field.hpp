#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "nlkpp/core/error.hpp"

namespace nlkpp {

/// One value per grid node.
using SpaceField = Eigen::VectorXd;

/// T-periodic field sampled at t_k = k T / n_t, k = 0..n_t-1. Slice n_t is the
/// same storage as slice 0, so periodic closure holds bitwise.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(double period, int time_samples, int nodes)
      : period_(period), values_(Eigen::MatrixXd::Zero(nodes, time_samples)) {
    if (!(period > 0.0)) throw ConfigError("period must be positive");
    if (time_samples < 4) throw ConfigError("at least 4 time samples are required");
  }

  double period() const { return period_; }
  int time_samples() const { return static_cast<int>(values_.cols()); }
  int nodes() const { return static_cast<int>(values_.rows()); }
  double time(int k) const { return period_ * k / time_samples(); }
  double dt() const { return period_ / time_samples(); }

  auto slice(int k) { return values_.col(k % time_samples()); }
  auto slice(int k) const { return values_.col(k % time_samples()); }
  double operator()(int k, int node) const { return values_(node, k % time_samples()); }
  double& operator()(int k, int node) { return values_(node, k % time_samples()); }

  /// Columns are time slices.
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }
  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }
  bool all_finite() const { return values_.allFinite(); }

 private:
  double period_ = 1.0;
  Eigen::MatrixXd values_;
};

/// Fourier differentiation matrix for n equispaced samples of a function with
/// the given period (n even uses the cotangent form, n odd the cosecant form).
inline Eigen::MatrixXd periodic_differentiation_matrix(int n, double period) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double h = 2.0 * M_PI / n;
  const double scale = 2.0 * M_PI / period;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      double sign = ((j - k) % 2 == 0) ? 1.0 : -1.0;
      double arg = (j - k) * h / 2.0;
      double v = n % 2 == 0 ? 0.5 * sign / std::tan(arg) : 0.5 * sign / std::sin(arg);
      d(j, k) = v * scale;
    }
  }
  return d;
}

/// Spectral time derivative of a periodic field.
inline SpaceTimeField time_derivative(const SpaceTimeField& f) {
  SpaceTimeField out(f.period(), f.time_samples(), f.nodes());
  Eigen::MatrixXd d = periodic_differentiation_matrix(f.time_samples(), f.period());
  out.values() = f.values() * d.transpose();
  return out;
}

}  // namespace nlkpp
