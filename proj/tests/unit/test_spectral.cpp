#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <gtest/gtest.h>

#include "nlkpp/spectral/certificates.hpp"
#include "nlkpp/spectral/existence.hpp"
#include "nlkpp/spectral/monodromy.hpp"
#include "nlkpp/spectral/principal.hpp"
#include "nlkpp/spectral/report.hpp"
#include "nlkpp/spectral/stationary.hpp"

using namespace nlkpp;

namespace {

constexpr double kPi = 3.14159265358979323846;

ScaledKernel triangular(double sigma = 1.0, double m = 0.0, double D = 1.0) {
  return ScaledKernel(builtin_kernel(KernelShape::triangular), sigma, m, D);
}

LinearOperatorSpec make_spec(const DomainGrid& g, const ScaledKernel& k,
                             Sampler a, double T = 1.0) {
  return LinearOperatorSpec(assemble(g, k), PeriodicCoefficient(T, std::move(a), g));
}

double bump(double, const Point& x) { return 2.0 - x.x * x.x; }

// Independent naive assembly of K with the lattice-mass normalization.
Eigen::MatrixXd naive_kernel_matrix(const DomainGrid& g, double sigma) {
  const int n = g.size();
  const double h = g.spacing(0);
  auto J = [&](double z) { return std::max(0.0, 1.0 - std::abs(z / sigma)) / sigma; };
  double Z = 0.0;
  for (int k = -n; k <= n; ++k) Z += h * J(k * h);
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = g.weight(j) * J(g.node(i).x - g.node(j).x) / Z;
  return K;
}

}  // namespace

TEST(Propagate, TorusConstantGrowth) {
  auto g = build_interval(0.0, 2.0, 64, Topology::torus);
  auto spec = make_spec(g, triangular(0.3), [](double, const Point&) { return 0.4; }, 1.5);
  MonodromyMap map(spec);
  SpaceField v = map.period_map(SpaceField::Ones(g.size()));
  EXPECT_LE((v.array() - std::exp(0.4 * 1.5)).abs().maxCoeff(), 1e-8);
}

TEST(Propagate, HostileDecayWithoutReaction) {
  auto g = build_interval(-1.0, 1.0, 81);
  auto spec = make_spec(g, triangular(0.5, 0.0, 2.0), [](double, const Point&) { return 0.0; });
  MonodromyMap map(spec);
  SpaceField v = SpaceField::LinSpaced(g.size(), 0.1, 1.0);
  EXPECT_LE(map.period_map(v).cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
}

TEST(Propagate, MatchesMatrixExponential) {
  auto g = build_interval(-1.0, 1.0, 101);
  auto spec = make_spec(g, triangular(0.4), [](double, const Point& x) { return 1.0 - x.x * x.x; }, 2.0);
  MonodromyMap map(spec);
  Eigen::MatrixXd K = naive_kernel_matrix(g, 0.4);
  Eigen::MatrixXd A = K - Eigen::MatrixXd::Identity(g.size(), g.size());
  for (int i = 0; i < g.size(); ++i) A(i, i) += 1.0 - g.node(i).x * g.node(i).x;
  SpaceField v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = 1.0 + 0.5 * std::cos(3.0 * g.node(i).x);
  // Aligned and non-aligned end times.
  for (double t : {2.0, 0.73}) {
    SpaceField ref = (A * t).exp() * v;
    SpaceField got = map.propagate(0.0, t, v);
    EXPECT_LE((got - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-7) << "t=" << t;
  }
  EXPECT_THROW(map.propagate(1.0, 0.5, v), PreconditionError);
}

TEST(Principal, TorusConstantCoefficient) {
  auto g = build_interval(0.0, 2.0, 50, Topology::torus);
  auto spec = make_spec(g, triangular(0.3), [](double, const Point&) { return 0.7; });
  auto r = principal_spectrum_point(spec);
  EXPECT_NEAR(r.lambda1, -0.7, 1e-8);
  EXPECT_LE((r.phi1.values().array() - 1.0).abs().maxCoeff(), 1e-8);
  EXPECT_TRUE(r.is_principal);
  EXPECT_TRUE(principality_by_threshold(r));
  EXPECT_NEAR(r.lambda_star, 1.0 - 0.7, 1e-12);
}

TEST(Principal, DenseSymmetricOracle) {
  auto g = build_interval(-1.0, 1.0, 201);
  auto spec = make_spec(g, triangular(), bump);
  auto r = principal_spectrum_point(spec);
  ASSERT_TRUE(r.converged) << r.diagnostic;
  Eigen::MatrixXd K = naive_kernel_matrix(g, 1.0);
  Eigen::VectorXd sw = g.weights().cwiseSqrt();
  Eigen::MatrixXd S = sw.asDiagonal() * K * sw.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose());
  Eigen::MatrixXd M = -(S - Eigen::MatrixXd::Identity(g.size(), g.size()));
  for (int i = 0; i < g.size(); ++i) M(i, i) -= 2.0 - g.node(i).x * g.node(i).x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  EXPECT_NEAR(r.lambda1, es.eigenvalues()[0], 1e-6);
  EXPECT_TRUE(r.is_principal);
  EXPECT_LE(r.residual, 1e-6);
  EXPECT_GT(r.phi1.min(), 0.0);
  EXPECT_NEAR(r.phi1.sup_norm(), 1.0, 1e-12);
  EXPECT_LE(r.lambda_lower, r.lambda1 + 1e-9);
  EXPECT_GE(r.lambda_upper, r.lambda1 - 1e-9);
  EXPECT_NEAR(stationary_eigenpair(spec.dispersal(), 1.0, spec.coefficient().average()).lambda,
              es.eigenvalues()[0], 1e-10);
}

TEST(Principal, ShiftEquivariance) {
  auto g = build_interval(-1.0, 1.0, 101);
  auto spec = make_spec(g, triangular(0.5), [](double t, const Point& x) {
    return 2.0 - x.x * x.x + std::sin(2.0 * kPi * t);
  });
  auto base = principal_spectrum_point(spec);
  for (double c : {0.7, -1.3}) {
    auto shifted = principal_spectrum_point(spec.with_coefficient(spec.coefficient().shifted(c)));
    EXPECT_NEAR(shifted.lambda1, base.lambda1 - c, 1e-9) << c;
  }
}

TEST(Principal, TimeTranslationInvariance) {
  auto g = build_interval(-1.0, 1.0, 81);
  auto spec = make_spec(g, triangular(0.5), [](double t, const Point& x) {
    return (2.0 - x.x * x.x) * (1.0 + 0.5 * std::sin(2.0 * kPi * t));
  });
  auto base = principal_spectrum_point(spec);
  for (double s : {0.25, 0.3, 0.77}) {
    auto moved = principal_spectrum_point(spec.with_coefficient(spec.coefficient().translated(s)));
    EXPECT_NEAR(moved.lambda1, base.lambda1, 1e-8) << s;
  }
}

TEST(Principal, LipschitzInCoefficient) {
  auto g = build_interval(-1.0, 1.0, 81);
  auto spec_a = make_spec(g, triangular(0.5), bump);
  auto spec_b = make_spec(g, triangular(0.5), [](double t, const Point& x) {
    return 2.0 - x.x * x.x + 0.3 * std::sin(2.0 * kPi * t) * std::cos(x.x);
  });
  double la = principal_spectrum_point(spec_a).lambda1;
  double lb = principal_spectrum_point(spec_b).lambda1;
  EXPECT_LE(std::abs(la - lb), 0.3 + 1e-8);
}

TEST(Principal, DomainMonotonicity) {
  // Same spacing, nested intervals.
  auto inner = build_interval(-0.5, 0.5, 51);
  auto outer = build_interval(-1.0, 1.0, 101);
  auto k = triangular(0.3);
  double l1 = principal_spectrum_point(make_spec(inner, k, bump)).lambda1;
  double l2 = principal_spectrum_point(make_spec(outer, k, bump)).lambda1;
  EXPECT_GE(l1, l2 - 1e-8);
}

TEST(Principal, SeparableDecomposition) {
  auto g = build_interval(-1.0, 1.0, 101);
  auto spec = make_spec(g, triangular(0.5), [](double t, const Point& x) {
    return std::sin(2.0 * kPi * t) + 0.4 + (2.0 - x.x * x.x);
  });
  auto r = principal_spectrum_point(spec);
  SpaceField beta(g.size());
  for (int i = 0; i < g.size(); ++i) beta[i] = 2.0 - g.node(i).x * g.node(i).x;
  double ls = stationary_eigenpair(spec.dispersal(), spec.rate(), beta).lambda;
  // alpha_T = 0.4; lambda1 = lambda^S - alpha_T.
  EXPECT_NEAR(r.lambda1, ls - 0.4, 1e-6);
}

TEST(Principal, PowerIterationMatchesDenseMonodromy) {
  auto g = build_interval(-1.0, 1.0, 41);
  auto spec = make_spec(g, triangular(0.5), [](double t, const Point& x) {
    return 1.0 - x.x * x.x + std::cos(2.0 * kPi * t) * x.x;
  });
  EigenOptions opt;
  opt.time_samples = 32;
  auto r = principal_spectrum_point(spec, opt);
  MonodromyMap map(spec, {}, 32);
  Eigen::MatrixXd P(g.size(), g.size());
  for (int j = 0; j < g.size(); ++j) P.col(j) = map.period_map(SpaceField::Unit(g.size(), j));
  Eigen::EigenSolver<Eigen::MatrixXd> es(P, false);
  double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(r.lambda1, -std::log(radius), 1e-6);
}

TEST(Principal, CuspFailsPrincipality) {
  // Flatness order 1/2 < N: the discrete gap to lambda* is below the default threshold.
  auto g = build_interval(-1.0, 1.0, 201);
  auto spec = make_spec(g, triangular(1.0, 0.0, 0.05),
                        [](double, const Point& x) { return 2.0 - 20.0 * std::sqrt(std::abs(x.x)); });
  auto r = principal_spectrum_point(spec);
  EXPECT_FALSE(r.is_principal);
  EXPECT_FALSE(principality_by_threshold(r));
  EXPECT_FALSE(r.diagnostic.empty());
  EXPECT_LE(r.lambda1, r.lambda_star + 1e-9);

  auto smooth = principal_spectrum_point(spec.with_coefficient(
      PeriodicCoefficient(1.0, [](double, const Point& x) { return 2.0 - x.x * x.x; }, g)));
  EXPECT_TRUE(smooth.is_principal) << smooth.diagnostic;
}

TEST(Certificates, EigenpairPerturbations) {
  auto g = build_interval(-1.0, 1.0, 81);
  auto spec = make_spec(g, triangular(0.5), [](double t, const Point& x) {
    return 2.0 - x.x * x.x + std::sin(2.0 * kPi * t);
  });
  auto r = principal_spectrum_point(spec);
  auto lo = certify_test_pair(spec, r.lambda1 - 1e-3, r.phi1, TestDirection::lower);
  auto up = certify_test_pair(spec, r.lambda1 + 1e-3, r.phi1, TestDirection::upper);
  EXPECT_TRUE(lo.certified);
  EXPECT_TRUE(up.certified);
  EXPECT_NEAR(lo.worst_slack, -1e-3 * r.phi1.min(), 1e-6);
  EXPECT_FALSE(certify_test_pair(spec, r.lambda1 + 1e-3, r.phi1, TestDirection::lower).certified);
  SpaceTimeField bad = r.phi1;
  bad.values()(0, 0) = -1.0;
  EXPECT_THROW(certify_test_pair(spec, 0.0, bad, TestDirection::lower), PreconditionError);
}

TEST(Certificates, ExponentialTestFunctionSmallD) {
  auto g = build_interval(-1.0, 1.0, 81);
  auto spec = make_spec(g, triangular(0.5, 0.0, 1e-3), [](double t, const Point& x) {
    return (2.0 - x.x * x.x) * (1.0 + 0.5 * std::sin(2.0 * kPi * t));
  });
  auto phi = exponential_test_function(spec.coefficient());
  double lam = -spec.coefficient().average().maxCoeff() - 0.05;
  EXPECT_TRUE(certify_test_pair(spec, lam, phi, TestDirection::lower).certified);
}

TEST(AnalyticBounds, SmallDIntervalContainsLambda) {
  auto g = build_interval(-1.0, 1.0, 81);
  Sampler a = [](double t, const Point& x) {
    return 2.0 - x.x * x.x + 0.5 * std::sin(2.0 * kPi * t);
  };
  auto spec = make_spec(g, triangular(0.5), a);
  auto b = analytic_bounds(spec, 0.05);
  ASSERT_GT(b.admissible_D, 0.0);
  EXPECT_TRUE(b.lower_certified);
  EXPECT_TRUE(b.upper_certified);
  for (double D : {b.admissible_D, 0.25 * b.admissible_D}) {
    auto r = principal_spectrum_point(make_spec(g, triangular(0.5, 0.0, D), a));
    EXPECT_GE(r.lambda1, b.small_lower);
    EXPECT_LE(r.lambda1, b.small_upper);
  }
  EXPECT_GT(b.lambda0, 0.0);
  auto big = make_spec(g, triangular(0.5, 0.0, 10.0), a);
  auto bb = analytic_bounds(big, 0.05);
  EXPECT_GE(principal_spectrum_point(big).lambda1, bb.large_D_lower);
}

TEST(AnalyticBounds, ConstantCoefficientCollapses) {
  auto g = build_interval(-1.0, 1.0, 41);
  auto b = analytic_bounds(make_spec(g, triangular(0.5), [](double, const Point&) { return 0.8; }), 0.01);
  EXPECT_NEAR(b.small_lower, -0.81, 1e-12);
  EXPECT_NEAR(b.small_upper, -0.79, 1e-12);
}

TEST(DerivativeInD, MatchesCentralDifference) {
  auto g = build_interval(-1.0, 1.0, 101);
  auto beta = [](const Point& x) { return 2.0 - x.x * x.x; };
  for (double D : {0.5, 1.0, 3.0}) {
    auto spec = make_spec(g, triangular(0.5, 1.0, D), [&](double t, const Point& x) {
      return std::sin(2.0 * kPi * t) + beta(x);
    });
    double d = eigenvalue_derivative_in_D(spec);
    const double delta = 1e-4;
    SpaceField b(g.size());
    for (int i = 0; i < g.size(); ++i) b[i] = beta(g.node(i));
    auto lam = [&](double DD) {
      return stationary_eigenpair(spec.dispersal(), DD / 0.5, b).lambda;
    };
    double fd = (lam(D + delta) - lam(D - delta)) / (2.0 * delta);
    EXPECT_NEAR(d, fd, 1e-4 * std::abs(fd)) << D;
    EXPECT_GT(d, 0.0);
  }
}

TEST(DerivativeInD, TorusZeroAndSeparabilityGate) {
  auto g = build_interval(0.0, 2.0, 60, Topology::torus);
  auto spec = make_spec(g, triangular(0.4), [](double t, const Point&) { return std::sin(2.0 * kPi * t); });
  EXPECT_NEAR(eigenvalue_derivative_in_D(spec), 0.0, 1e-10);
  auto mixed = make_spec(g, triangular(0.4), [](double t, const Point& x) {
    return std::sin(2.0 * kPi * t) * x.x;
  });
  EXPECT_THROW(eigenvalue_derivative_in_D(mixed), PreconditionError);
}

TEST(ResolventRadius, ConstantCoefficientIdentity) {
  auto g = build_interval(-1.0, 1.0, 61);
  const double a0 = 0.3;
  auto spec = make_spec(g, triangular(0.5), [a0](double, const Point&) { return a0; });
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted_symmetric(spec.dispersal()),
                                                    Eigen::EigenvaluesOnly);
  double mu1 = es.eigenvalues()[g.size() - 1];
  auto alphas = admissible_alpha_grid(spec, 8);
  auto rep = existence_by_resolvent_radius(spec, alphas);
  ASSERT_EQ(rep.points.size(), alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    double expect = spec.rate() * mu1 / (alphas[k] + spec.rate() - a0);
    EXPECT_NEAR(rep.points[k].radius, expect, 1e-8 * expect);
    if (k > 0) {
      EXPECT_LT(rep.points[k].radius, rep.points[k - 1].radius);
    }
  }
  // Radius one at alpha = -lambda1.
  double l1 = principal_spectrum_point(spec).lambda1;
  double r = resolvent_radius(spec, -l1).radius;
  double slope = spec.rate() * mu1 / std::pow(-l1 + spec.rate() - a0, 2);
  EXPECT_LE(std::abs(r - 1.0) / slope, 1e-5);
  EXPECT_TRUE(rep.exists);
  EXPECT_THROW(existence_by_resolvent_radius(spec, {-spec.lambda_star() - 0.1}), PreconditionError);
}

TEST(ResolventRadius, AgreesWithThreshold) {
  auto g = build_interval(-1.0, 1.0, 81);
  auto spec = make_spec(g, triangular(0.5), [](double t, const Point& x) {
    return 2.0 - x.x * x.x + 0.5 * std::sin(2.0 * kPi * t);
  });
  auto rep = existence_by_resolvent_radius(spec, admissible_alpha_grid(spec, 10));
  EXPECT_EQ(rep.exists, principality_by_threshold(principal_spectrum_point(spec)));
}

TEST(Report, CsvRows) {
  std::ostringstream os;
  EigenResult r;
  r.lambda1 = -1.5;
  r.lambda_star = 0.2;
  r.is_principal = true;
  r.residual = 1e-9;
  r.iterations = 12;
  write_spectrum_csv(os, {spectrum_row(0.5, r)}, "D");
  EXPECT_EQ(os.str(), "D,lambda1,lambda_star,is_principal,residual,iterations\n"
                      "0.5,-1.5,0.20000000000000001,true,1.0000000000000001e-09,12\n");
}
