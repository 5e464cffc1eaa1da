#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"

namespace nlkpp {

/// W^{1/2} K W^{-1/2}, symmetric because w_i K_ij = w_j K_ji.
inline Eigen::MatrixXd weighted_symmetric(const DispersalMatrix& K) {
  Eigen::MatrixXd S = K.to_dense();
  const Eigen::VectorXd sw = K.grid().weights().cwiseSqrt();
  S = sw.asDiagonal() * S * sw.cwiseInverse().asDiagonal();
  return 0.5 * (S + S.transpose());
}

struct StationaryEigenpair {
  double lambda = 0.0;
  /// Eigenfunction on the nodes, positive, sup-normalized.
  SpaceField phi;
};

/// Principal eigenpair of -(rate (K - I) + diag(beta)) by a dense symmetric
/// eigensolver.
inline StationaryEigenpair stationary_eigenpair(const DispersalMatrix& K, double rate,
                                                const SpaceField& beta) {
  if (beta.size() != K.size()) throw PreconditionError("coefficient does not match the grid");
  Eigen::MatrixXd S = rate * weighted_symmetric(K);
  S.diagonal().array() += beta.array() - rate;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw SolverError("symmetric eigensolver failed");
  const Eigen::Index top = S.rows() - 1;
  StationaryEigenpair out;
  out.lambda = -es.eigenvalues()[top];
  SpaceField y = es.eigenvectors().col(top);
  if (y.sum() < 0) y = -y;
  out.phi = y.cwiseQuotient(K.grid().weights().cwiseSqrt());
  out.phi /= out.phi.cwiseAbs().maxCoeff();
  return out;
}

/// Principal eigenvalue of -(K - I): 1 - mu_1 with mu_1 the top eigenvalue of
/// the weight-symmetrized K.
inline double dispersal_ground_state(const DispersalMatrix& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted_symmetric(K), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("symmetric eigensolver failed");
  return 1.0 - es.eigenvalues()[es.eigenvalues().size() - 1];
}

/// Maximum over samples of |(a(t,x) - a_T(x)) - (a(t,x0) - a_T(x0))|; zero when
/// a(t, x) = alpha(t) + beta(x).
inline double separability_defect(const PeriodicCoefficient& a, int samples = 64) {
  const SpaceField& aT = a.average();
  SpaceField col;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    a.sample(a.period() * k / samples, col);
    SpaceField osc = col - aT;
    worst = std::max(worst, (osc.array() - osc[0]).abs().maxCoeff());
  }
  return worst;
}

/// Derivative in D of the principal eigenvalue of the spatial problem with
/// coefficient a_T:
///   -(sum_i w_i phi_i (K phi)_i - sum_i w_i phi_i^2) / (sigma^m sum_i w_i phi_i^2).
inline double eigenvalue_derivative_in_D(const LinearOperatorSpec& spec, double separable_tol = 1e-9) {
  double defect = separability_defect(spec.coefficient());
  if (defect > separable_tol)
    throw PreconditionError("coefficient is not of the form alpha(t) + beta(x) (defect " +
                            std::to_string(defect) + ")");
  const auto& K = spec.dispersal();
  auto pair = stationary_eigenpair(K, spec.rate(), spec.coefficient().average());
  const SpaceField& phi = pair.phi;
  const SpaceField& w = K.grid().weights();
  SpaceField Kphi = K * phi;
  double cross = (w.array() * phi.array() * Kphi.array()).sum();
  double mass = (w.array() * phi.array().square()).sum();
  return -(cross - mass) / mass / std::pow(K.sigma(), K.m());
}

}  // namespace nlkpp
