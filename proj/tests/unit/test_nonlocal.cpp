#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nlkpp/nonlocal/consistency.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"
#include "nlkpp/nonlocal/resolvent.hpp"

using namespace nlkpp;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

ScaledKernel triangular(double sigma, double m = 0.0, double D = 1.0, int dim = 1) {
  return ScaledKernel(builtin_kernel(KernelShape::triangular, dim), sigma, m, D);
}

int nearest(const DomainGrid& g, double x) {
  int best = 0;
  for (int i = 1; i < g.size(); ++i)
    if (std::abs(g.node(i).x - x) < std::abs(g.node(best).x - x)) best = i;
  return best;
}

}  // namespace

TEST(Assemble, InteriorAndBoundaryRowSums) {
  auto g = build_interval(-1.0, 1.0, 201);
  auto K = assemble(g, triangular(0.5));
  SpaceField rows = K * SpaceField::Ones(g.size());
  EXPECT_NEAR(rows[nearest(g, 0.0)], 1.0, 1e-6);
  // Reference: adaptive-free Simpson of int_{-1}^{1} J_sigma(1 - y) dy.
  auto J = triangular(0.5);
  double ref = simpson([&](double y) { return J({1.0 - y, 0.0}); }, 0.5, 1.0, 20000);
  EXPECT_NEAR(rows[g.size() - 1], ref, 1e-4);
  EXPECT_NEAR(ref, 0.5, 1e-8);
}

TEST(Assemble, TorusRowsSumToOne) {
  for (auto shape : {KernelShape::triangular, KernelShape::uniform, KernelShape::cosine_bump}) {
    auto g = build_interval(0.0, 2.0, 160, Topology::torus);
    auto K = assemble(g, ScaledKernel(builtin_kernel(shape), 0.37, 0.0, 1.0));
    SpaceField rows = K * SpaceField::Ones(g.size());
    EXPECT_LE((rows.array() - 1.0).abs().maxCoeff(), 1e-10);
  }
  Box b;
  b.lo = {0.0, 0.0};
  b.hi = {1.0, 1.0};
  auto g2 = build_grid(2, b, {24, 24}, Topology::torus);
  auto K2 = assemble(g2, triangular(0.2, 0.0, 1.0, 2));
  SpaceField rows2 = K2 * SpaceField::Ones(g2.size());
  EXPECT_LE((rows2.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(Assemble, ResolutionPolicy) {
  auto g = build_interval(-1.0, 1.0, 21);  // h = 0.1
  EXPECT_THROW(assemble(g, triangular(0.05)), ConfigError);
  auto K = assemble(g, triangular(0.15));
  EXPECT_FALSE(K.warnings().empty());
  auto K2 = assemble(g, triangular(0.5));
  EXPECT_TRUE(K2.warnings().empty());
  EXPECT_EQ(K2.bandwidth()[0], 5);
}

TEST(Assemble, StructuralInvariants) {
  auto g = build_interval(-1.0, 1.0, 101);
  const double sigma = 0.3;
  auto K = assemble(g, triangular(sigma));
  Eigen::MatrixXd M = K.to_dense();
  EXPECT_GE(M.minCoeff(), 0.0);
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j)
      EXPECT_NEAR(M(i, j) * g.weight(i), M(j, i) * g.weight(j), 1e-12);
  SpaceField rows = M.rowwise().sum();
  EXPECT_LE(rows.maxCoeff(), 1.0 + 1e-10);
  for (int i = 0; i < g.size(); ++i) {
    double d = g.distance_to_boundary(i);
    if (d < sigma - 1e-12) {
      EXPECT_LT(rows[i], 1.0) << "node " << i;
      EXPECT_GT(K.mass_defect()[i], 0.0);
    } else {
      EXPECT_NEAR(rows[i], 1.0, 1e-12) << "node " << i;
      EXPECT_EQ(K.mass_defect()[i], 0.0);
    }
  }
}

TEST(Assemble, TwoDimensionalSymmetry) {
  Box b;
  b.lo = {-1.0, -1.0};
  b.hi = {1.0, 1.0};
  auto g = build_grid(2, b, {17, 17});
  auto K = assemble(g, triangular(0.4, 0.0, 1.0, 2));
  Eigen::MatrixXd M = K.to_dense();
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j) EXPECT_NEAR(M(i, j) * g.weight(i), M(j, i) * g.weight(j), 1e-12);
  EXPECT_NEAR(M.row(g.index(8, 8)).sum(), 1.0, 1e-12);
}

TEST(Assemble, TripletExportRoundTrip) {
  auto g = build_interval(0.0, 1.0, 11);
  auto K = assemble(g, triangular(0.25));
  std::stringstream ss;
  K.write_triplets(ss);
  int rows, cols, nnz;
  ss >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 11);
  EXPECT_EQ(nnz, K.matrix().nonZeros());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
  for (int k = 0; k < nnz; ++k) {
    int i, j;
    double v;
    ss >> i >> j >> v;
    M(i, j) = v;
  }
  EXPECT_EQ((M - K.to_dense()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Apply, ConstantsOnTorus) {
  auto g = build_interval(0.0, 1.0, 64, Topology::torus);
  auto K = assemble(g, triangular(0.2));
  auto a = PeriodicCoefficient::constant(1.0, 0.8, g);
  LinearOperatorSpec spec(K, a);
  SpaceField v = SpaceField::Constant(g.size(), 3.0);
  EXPECT_LE((spec.apply(0.3, v).array() - 2.4).abs().maxCoeff(), 1e-12);
  LinearOperatorSpec zero(K, PeriodicCoefficient::constant(1.0, 0.0, g));
  EXPECT_LE(zero.apply(0.7, v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Apply, MatchesDirectSummation) {
  auto g = build_interval(-1.0, 1.0, 81);
  const double sigma = 0.35, m = 0.5, D = 1.3;
  auto J = triangular(sigma, m, D);
  auto K = assemble(g, J);
  PeriodicCoefficient a(1.0, [](double t, const Point& x) { return std::cos(2 * M_PI * t) + x.x; }, g);
  LinearOperatorSpec spec(K, a);
  // Lattice mass by plain summation over all integer offsets that can matter.
  double h = g.spacing(0), z = 0.0;
  for (int k = -1000; k <= 1000; ++k) z += h * J({k * h, 0.0});
  const double rate = D / std::pow(sigma, m);
  const double t = 0.37;
  for (int node : {0, 17, 40, 80}) {
    SpaceField e = SpaceField::Zero(g.size());
    e[node] = 1.0;
    SpaceField out = spec.apply(t, e);
    for (int i = 0; i < g.size(); ++i) {
      double kij = g.weight(node) * J({g.node(i).x - g.node(node).x, 0.0}) / z;
      double expect = rate * (kij - (i == node ? 1.0 : 0.0)) + (i == node ? a(t, node) : 0.0);
      EXPECT_NEAR(out[i], expect, 1e-12);
    }
  }
}

TEST(Apply, LinearityAndSelfAdjointness) {
  auto g = build_interval(-1.0, 1.0, 121);
  auto K = assemble(g, triangular(0.4));
  PeriodicCoefficient a(1.0, [](double t, const Point& x) { return std::sin(2 * M_PI * t) * x.x; }, g);
  LinearOperatorSpec spec(K, a);
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    SpaceField v1(g.size()), v2(g.size());
    for (int i = 0; i < g.size(); ++i) {
      v1[i] = nd(rng);
      v2[i] = nd(rng);
    }
    double al = nd(rng), be = nd(rng);
    SpaceField lhs = spec.apply(0.2, al * v1 + be * v2);
    SpaceField rhs = al * spec.apply(0.2, v1) + be * spec.apply(0.2, v2);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    SpaceField k1 = K * v1, k2 = K * v2;
    double left = (g.weights().array() * k1.array() * v2.array()).sum();
    double right = (g.weights().array() * v1.array() * k2.array()).sum();
    EXPECT_NEAR(left, right, 1e-10);
    SpaceField pos = v1.cwiseAbs();
    EXPECT_GE((K * pos).minCoeff(), 0.0);
  }
  EXPECT_THROW(spec.apply(0.0, SpaceField::Ones(5)), PreconditionError);
}

TEST(Consistency, SineConvergesAtSecondOrder) {
  auto g = build_interval(-1.0, 1.0, 11);
  auto rep = laplacian_consistency(g, builtin_kernel(KernelShape::triangular), {0.2, 0.1, 0.05},
                                   builtin_smooth_field("sin"));
  ASSERT_EQ(rep.orders.size(), 2u);
  EXPECT_GE(rep.min_order, 1.8);
  EXPECT_LE(rep.min_order, 2.2);
  EXPECT_LT(rep.error[2], rep.error[0]);
}

TEST(Consistency, PolynomialExactness) {
  auto g = build_interval(-1.0, 1.0, 11);
  auto tri = builtin_kernel(KernelShape::triangular);
  auto lin = laplacian_consistency(g, tri, {0.2, 0.1}, builtin_smooth_field("linear"));
  for (double e : lin.error) EXPECT_LE(e, 1e-10);
  auto quad = laplacian_consistency(g, tri, {0.2, 0.1}, builtin_smooth_field("quadratic"));
  for (double e : quad.error) EXPECT_LE(e, 1e-6);
  EXPECT_THROW(laplacian_consistency(g, tri, {1.2}, builtin_smooth_field("sin")), PreconditionError);
}

TEST(Resolvent, ConstantInput) {
  auto g = build_interval(-1.0, 1.0, 11);
  auto a = PeriodicCoefficient::constant(1.0, 0.0, g);
  SpaceTimeField one(1.0, 32, g.size());
  one.values().setOnes();
  for (double alpha : {-0.5, 0.0, 2.0}) {
    auto r = local_resolvent(a, 1.0, alpha, one);
    EXPECT_LE((r.values().array() - 1.0 / (alpha + 1.0)).abs().maxCoeff(), 1e-8);
  }
  EXPECT_THROW(local_resolvent(a, 1.0, -1.0, one), PreconditionError);
}

TEST(Resolvent, LowerConstantBound) {
  auto g = build_interval(-1.0, 1.0, 21);
  PeriodicCoefficient a(1.0, [](double t, const Point& x) { return 2 - x.x * x.x + std::sin(2 * M_PI * t); }, g);
  const double rate = 1.0, alpha = 1.5;
  double M = resolvent_lower_constant(a, rate, alpha, 64);
  EXPECT_GT(M, 0.0);
  SpaceTimeField one(1.0, 64, g.size());
  one.values().setOnes();
  auto r = local_resolvent(a, rate, alpha, one);
  for (int i = 0; i < g.size(); ++i)
    for (int k = 0; k < 64; ++k)
      EXPECT_GE(r(k, i), M / (alpha - (-rate + a.average()[i])) - 1e-14);
}

TEST(Resolvent, MatchesLongHorizonQuadrature) {
  auto g = build_interval(-1.0, 1.0, 5);
  const double rate = 1.0, alpha = 0.5, T = 1.0;
  auto a_fn = [](double t, const Point& x) { return 0.5 * x.x + 0.3 * std::sin(2 * M_PI * t); };
  PeriodicCoefficient a(T, a_fn, g);
  const int nt = 32;
  SpaceTimeField v(T, nt, g.size());
  for (int i = 0; i < g.size(); ++i)
    for (int k = 0; k < nt; ++k) v(k, i) = 1.0 + 0.5 * std::cos(2 * M_PI * v.time(k) + g.node(i).x);
  auto r = local_resolvent(a, rate, alpha, v);
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.node(i).x;
    const double c0 = -rate + 0.5 * x - alpha;
    auto prim = [&](double s) { return c0 * s - 0.3 / (2 * M_PI) * std::cos(2 * M_PI * s); };
    auto vlin = [&](double s) {
      double pos = s / T * nt;
      double fl = std::floor(pos);
      int k = static_cast<int>(fl);
      int kk = ((k % nt) + nt) % nt;
      double th = pos - fl;
      return (1 - th) * v(kk, i) + th * v(kk + 1, i);
    };
    for (int k : {0, 7, 19}) {
      double t = v.time(k);
      double total = 0.0;
      for (int p = 0; p < 40 * nt; ++p) {
        double lo = t - (p + 1) * T / nt, hi = t - p * T / nt;
        total += simpson([&](double s) { return std::exp(prim(t) - prim(s)) * vlin(s); }, lo, hi, 16);
      }
      EXPECT_NEAR(r(k, i), total, 1e-8) << "node " << i << " sample " << k;
    }
  }
}

TEST(Resolvent, PositiveInputGivesPositiveOutput) {
  auto g = build_interval(-1.0, 1.0, 15);
  PeriodicCoefficient a(1.0, [](double t, const Point& x) { return 1 - x.x * x.x + std::sin(2 * M_PI * t); }, g);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpaceTimeField v(1.0, 16, g.size());
  for (int i = 0; i < g.size(); ++i)
    for (int k = 0; k < 16; ++k) v(k, i) = u(rng) < 0.5 ? 0.0 : u(rng);
  auto r = local_resolvent(a, 1.0, 0.2, v);
  EXPECT_GE(r.min(), 0.0);
}
