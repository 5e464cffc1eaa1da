// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//
// Exit status is the number of criteria whose outcome differs from the
// expected one. Every criterion is expected to pass except those listed in
// kKnownFailures, which are reported as FAIL with their measurements; if one
// of them starts passing the run also fails, so the list cannot go stale.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nlkpp/nlkpp.hpp"

using namespace nlkpp;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pinned tolerances.
constexpr double kOracleTol = 1e-6;        // 1: Floquet vs dense symmetric
constexpr double kShift = 0.7;             // 2
constexpr double kShiftTol = 1e-9;         // 2
constexpr double kSeparableTol = 1e-6;     // 3
constexpr double kDerivRelTol = 1e-4;      // 4
constexpr double kSmallDGapTol = 1e-2;     // 5
constexpr double kExistTol = 1e-4;         // 6: exists iff lambda1 < -kExistTol
constexpr double kUniqueTol = 1e-7;        // 6: doubled-M restart
constexpr double kAttractTol = 1e-6;       // 6
constexpr double kLimitTol = 5e-2;         // 7, 9
constexpr double kMonoTol = 1e-6;          // 7
constexpr double kCriticalMeshTol = 5e-3;  // 8
constexpr double kScalarTol = 1e-8;        // 9
constexpr double kBand = 0.05;             // 10
constexpr int kInstances = 100;            // 10
constexpr double kOrderMin = 1.8;          // 11
constexpr double kMomentTol = 1e-8;        // 11
constexpr double kOrderSlack = 1e-12;      // 12

// Expected failures; see the README section on the acceptance suite.
const std::set<int> kKnownFailures{9};

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Problem bump(int n, Sampler a = nullptr) {
  Problem p;
  p.resolution = n;
  if (a) p.a = std::move(a);
  return p;
}

// 1 -------------------------------------------------------------------------

Outcome dense_oracle() {
  Problem p = bump(201);
  auto inst = instantiate(p);
  const auto& g = *inst.grid;
  auto r = principal_spectrum_point(inst.spec);
  // Independent assembly: triangular kernel, lattice-mass normalization.
  const int n = g.size();
  const double h = g.spacing(0);
  auto J = [](double z) { return std::max(0.0, 1.0 - std::abs(z)); };
  double Z = 0.0;
  for (int k = -n; k <= n; ++k) Z += h * J(k * h);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double kij = g.weight(j) * J(g.node(i).x - g.node(j).x) / Z;
      M(i, j) = -std::sqrt(g.weight(i) / g.weight(j)) * kij;
    }
  M = 0.5 * (M + M.transpose()).eval();
  for (int i = 0; i < n; ++i) M(i, i) += 1.0 - (2.0 - g.node(i).x * g.node(i).x);
  double dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()[0];
  double err = std::abs(r.lambda1 - dense);
  return {r.converged && err <= kOracleTol,
          "lambda1=" + fmt(r.lambda1) + " dense=" + fmt(dense) + " err=" + fmt(err) + " tol=" + fmt(kOracleTol)};
}

// 2 -------------------------------------------------------------------------

Outcome shift_equivariance() {
  Problem p = bump(201, [](double t, const Point& x) { return 2.0 - x.x * x.x + std::sin(2 * kPi * t); });
  auto inst = instantiate(p);
  auto base = principal_spectrum_point(inst.spec);
  auto sh = principal_spectrum_point(inst.spec.with_coefficient(inst.spec.coefficient().shifted(kShift)));
  double err = std::abs(sh.lambda1 - (base.lambda1 - kShift));
  return {err <= kShiftTol, "c=" + fmt(kShift) + " err=" + fmt(err) + " tol=" + fmt(kShiftTol)};
}

// 3 -------------------------------------------------------------------------

Outcome separable() {
  auto a = [](double t, const Point& x) { return std::sin(2 * kPi * t) + 2.0 - x.x * x.x; };
  Problem p = bump(201, a);
  auto grid = problem_grid(p);
  double worst = 0.0;
  std::vector<double> lam;
  for (int k = -4; k <= 5; ++k) {
    double D = std::ldexp(1.0, k);
    auto inst = instantiate(p, grid, p.sigma, p.m, D);
    SpaceField beta(grid.size());
    for (int i = 0; i < grid.size(); ++i) beta[i] = 2.0 - grid.node(i).x * grid.node(i).x;
    double ls = stationary_eigenpair(inst.spec.dispersal(), inst.spec.rate(), beta).lambda;
    double l1 = principal_spectrum_point(inst.spec).lambda1;
    worst = std::max(worst, std::abs(l1 - (ls + 0.0)));  // alpha_T of sin is 0
    lam.push_back(l1);
  }
  bool increasing = true;
  for (std::size_t i = 1; i < lam.size(); ++i) increasing = increasing && lam[i] > lam[i - 1];
  return {worst <= kSeparableTol && increasing,
          "max|l1-(lS+alpha)|=" + fmt(worst) + " tol=" + fmt(kSeparableTol) +
              " increasing over D=2^-4..2^5: " + (increasing ? "yes" : "no")};
}

// 4 -------------------------------------------------------------------------

Outcome derivative_in_D() {
  Problem p = bump(201, [](double t, const Point& x) { return std::sin(2 * kPi * t) + 2.0 - x.x * x.x; });
  auto grid = problem_grid(p);
  EigenOptions eo;
  eo.tol = 1e-13;
  auto lam = [&](double D) { return principal_spectrum_point(instantiate(p, grid, p.sigma, p.m, D).spec, eo).lambda1; };
  double worst = 0.0, dmin = INFINITY;
  for (double D : {0.5, 1.0, 4.0}) {
    double d = eigenvalue_derivative_in_D(instantiate(p, grid, p.sigma, p.m, D).spec);
    const double delta = 1e-3 * D;
    // Five-point central difference of the Floquet eigenvalue.
    double fd = (-lam(D + 2 * delta) + 8 * lam(D + delta) - 8 * lam(D - delta) + lam(D - 2 * delta)) / (12 * delta);
    worst = std::max(worst, std::abs(d - fd) / std::abs(fd));
    dmin = std::min(dmin, d);
  }
  return {worst <= kDerivRelTol && dmin > 0.0,
          "max rel err=" + fmt(worst) + " tol=" + fmt(kDerivRelTol) + " min derivative=" + fmt(dmin)};
}

// 5 -------------------------------------------------------------------------

Outcome dispersal_rate_limits() {
  auto r = sweep_dispersal_rate(bump(201), {1e-3, 10.0, 100.0});
  double gap = r.records[0].gap_small;
  double m10 = r.records[1].large_D_margin, m100 = r.records[2].large_D_margin;
  return {gap <= kSmallDGapTol && m10 >= 0.0 && m100 >= 0.0,
          "gap(D=1e-3)=" + fmt(gap) + " tol=" + fmt(kSmallDGapTol) + " margin(10)=" + fmt(m10) +
              " margin(100)=" + fmt(m100)};
}

// 6 -------------------------------------------------------------------------

Outcome bifurcation() {
  Problem p = bump(81, [](double t, const Point& x) { return 2.0 - x.x * x.x + 0.5 * std::sin(2 * kPi * t); });
  const double l0 = principal_spectrum_point(instantiate(p).spec).lambda1;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(0.01, 3.0);
  bool ok = true;
  double worst_unique = 0.0, worst_attract = 0.0, worst_rate_margin = -INFINITY;
  std::string bad;
  for (double target : {-0.5, -0.2, -0.05, 0.05, 0.2, 0.5}) {
    Problem q = p;
    auto a0 = p.a;
    const double c = l0 - target;
    // lambda1(a + c) = lambda1(a) - c.
    q.a = [a0, c](double t, const Point& x) { return a0(t, x) + c; };
    auto inst = instantiate(q);
    NonlinearFlow flow(inst.f, inst.spec);
    auto eig = principal_spectrum_point(inst.spec);
    auto sol = periodic_solution_squeeze(flow, eig);
    const bool should = eig.lambda1 < -kExistTol;
    if (sol.exists != should) {
      ok = false;
      bad += " exists mismatch at l1=" + fmt(eig.lambda1);
    }
    if (eig.lambda1 < 0.0 && sol.exists) {
      SqueezeOptions twice;
      twice.M_factor = 4.0;
      auto again = periodic_solution_squeeze(flow, eig, twice);
      double du = (again.u_star.values() - sol.u_star.values()).cwiseAbs().maxCoeff();
      worst_unique = std::max(worst_unique, du);
      const int periods = static_cast<int>(std::ceil(25.0 / -eig.lambda1)) + 20;
      for (int s = 0; s < 10; ++s) {
        SpaceField u0(flow.size());
        for (int i = 0; i < flow.size(); ++i) u0[i] = U(rng);
        auto hist = attraction_history(flow, sol.u_star.slice(0), u0, periods);
        worst_attract = std::max(worst_attract, hist.back());
      }
    }
    if (eig.lambda1 > 0.0) {
      auto dr = decay_rate(flow, SpaceField::Ones(flow.size()), 40);
      // Required: slope <= -lambda1 T / 2.
      worst_rate_margin = std::max(worst_rate_margin, dr.slope + 0.5 * eig.lambda1 * inst.spec.period());
    }
  }
  ok = ok && worst_unique <= kUniqueTol && worst_attract <= kAttractTol && worst_rate_margin <= 0.0;
  return {ok, "6 members, uniqueness=" + fmt(worst_unique) + " tol=" + fmt(kUniqueTol) +
                  " attraction=" + fmt(worst_attract) + " tol=" + fmt(kAttractTol) +
                  " max(slope+l1T/2)=" + fmt(worst_rate_margin) + bad};
}

// 7 -------------------------------------------------------------------------

Outcome range_limits() {
  Problem p = bump(201, [](double t, const Point& x) { return 2.0 - x.x * x.x + 0.5 * std::sin(2 * kPi * t); });
  const double amax = 2.0;
  auto large0 = sweep_dispersal_range(p, 0.0, {50.0}, false).records[0];
  auto large1 = sweep_dispersal_range(p, 1.0, {50.0}, false).records[0];
  double e0 = std::abs(large0.lambda1 - (p.D - amax));
  double e1 = std::abs(large1.lambda1 + amax);
  double es = 0.0;
  int nodes = 0;
  for (double m : {0.0, 1.0}) {
    auto rec = sweep_dispersal_range(p, m, {0.01}, true).records[0];
    es = std::max(es, std::abs(rec.lambda1 + amax));
    nodes = rec.nodes;
  }
  Problem radial = bump(81);  // a = 2 - x^2, radial and decreasing
  auto mono = check_sigma_monotonicity(radial, {0.1, 0.3, 1.0, 3.0, 10.0}, kMonoTol);
  bool ok = e0 <= kLimitTol && e1 <= kLimitTol && es <= kLimitTol && mono.holds;
  return {ok, "m=0,s=50: " + fmt(e0) + "; m=1,s=50: " + fmt(e1) + "; s=0.01 (" + std::to_string(nodes) +
                  " nodes): " + fmt(es) + "; tol=" + fmt(kLimitTol) + "; monotone: " + (mono.holds ? "yes" : "no") +
                  " (worst drop " + fmt(mono.worst_drop) + ")"};
}

// 8 -------------------------------------------------------------------------

Outcome critical_range() {
  Problem p = bump(101, [](double t, const Point& x) { return 0.5 - x.x * x.x + 0.3 * std::sin(2 * kPi * t); });
  auto c = critical_sigma(p, 0.1, 10.0);
  if (!c.found) return {false, "no bracket"};
  const double h = corefined_spacing(p, 0.1);
  auto fine = critical_sigma(p, 0.1, 10.0, 0.5 * h);
  double diff = fine.found ? std::abs(fine.sigma_star - c.sigma_star) : INFINITY;
  bool sign = c.lambda_lo < 0.0 && c.lambda_hi > 0.0;
  return {sign && diff <= kCriticalMeshTol,
          "sigma*=" + fmt(c.sigma_star) + " lambda(lo)=" + fmt(c.lambda_lo) + " lambda(hi)=" + fmt(c.lambda_hi) +
              " |sigma*(h/2)-sigma*(h)|=" + fmt(diff) + " tol=" + fmt(kCriticalMeshTol)};
}

// 9 -------------------------------------------------------------------------

Outcome solution_limits() {
  Problem p = bump(101, [](double t, const Point& x) { return 2.0 - x.x * x.x + 0.5 * std::sin(2 * kPi * t); });
  std::string d;
  bool ok = true;
  for (double m : {0.0, 1.0}) {
    auto r = u_star_limit_experiment(p, m, {0.05, 0.1, 0.2, 0.4}, true);
    const auto& fin = r.records.front();
    bool pass = r.errors_decrease && fin.error <= kLimitTol;
    ok = ok && pass;
    d += "s->0 m=" + fmt(m) + ": err=" + fmt(fin.error) + (r.errors_decrease ? " decreasing" : " not decreasing") +
         " (interior " + fmt(fin.interior_error) + (r.interior_errors_decrease ? " decreasing" : " not decreasing") +
         "); ";
  }
  auto big = u_star_limit_experiment(p, 1.0, {5.0, 10.0, 20.0, 50.0}, false);
  bool pbig = big.errors_decrease && big.records.back().error <= kLimitTol;
  d += "s->inf m=1: err=" + fmt(big.records.back().error) + (big.errors_decrease ? " decreasing" : " not decreasing") + "; ";
  auto dl = dispersal_rate_solution_limit(p, {0.05, 0.1, 0.2, 0.5});
  bool pd = dl.errors_decrease && dl.records.front().error <= kLimitTol;
  d += "D->0: err=" + fmt(dl.records.front().error) + (dl.errors_decrease ? " decreasing" : " not decreasing") + "; ";

  // Periodic logistic v' = (1 + sin 2 pi t) v - v^2 in closed form.
  auto g = build_interval(0.0, 1.0, 3);
  PeriodicCoefficient a(1.0, [](double t, const Point&) { return 1.0 + std::sin(2.0 * kPi * t); }, g);
  auto f = KPPNonlinearity::logistic(a, PeriodicCoefficient::constant(1.0, 1.0, g));
  auto s = scalar_periodic_solution(f, {0.5, 0.0}, 1.0);
  auto A = [](double t) { return t + (1.0 - std::cos(2.0 * kPi * t)) / (2.0 * kPi); };
  auto I = [&](double t) {
    const int n = 20000;
    double hh = t / n, acc = std::exp(A(0.0)) + std::exp(A(t));
    for (int i = 1; i < n; ++i) acc += std::exp(A(i * hh)) * (i % 2 ? 4.0 : 2.0);
    return acc * hh / 3.0;
  };
  const double C = I(1.0) / (std::exp(A(1.0)) - 1.0);
  double serr = s.exists ? 0.0 : INFINITY;
  for (std::size_t k = 0; s.exists && k < s.values.size(); ++k) {
    double t = static_cast<double>(k) / s.values.size();
    serr = std::max(serr, std::abs(s.values[k] - std::exp(A(t)) / (C + (k == 0 ? 0.0 : I(t)))));
  }
  d += "scalar oracle err=" + fmt(serr) + "; tol=" + fmt(kLimitTol) + "/" + fmt(kScalarTol);
  return {ok && pbig && pd && serr <= kScalarTol, d};
}

// 10 ------------------------------------------------------------------------

Outcome equivalence() {
  Problem p = bump(61, [](double t, const Point& x) { return 2.0 - x.x * x.x + 0.5 * std::sin(2 * kPi * t); });
  p.time_samples = 128;
  auto base = instantiate(p).spec;
  EquivalenceOptions opt;
  opt.band = kBand;
  opt.instances = kInstances;
  opt.max_attempts = 3 * kInstances;
  EigenOptions eo;
  eo.time_samples = opt.mp.time_samples;
  eo.integrator.min_steps_per_period = opt.mp.min_steps_per_period;
  const double l0 = principal_spectrum_point(base, eo).lambda1;
  std::vector<double> shifts;
  for (double target : {-0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5}) shifts.push_back(l0 - target);
  auto table = equivalence_experiment(base, shifts, opt);
  bool ok = table.rows.size() == 7 && table.violations == 0;
  int ce = 0, adm = 0;
  for (const auto& r : table.rows) {
    if (r.lambda1 <= -kBand) {
      ok = ok && r.witness_confirmed;
      ce += r.witness_confirmed;
    } else if (r.lambda1 >= kBand) {
      ok = ok && r.admissible == kInstances && r.positive == kInstances;
      adm += r.admissible == kInstances && r.positive == kInstances;
    }
  }
  return {ok, "counterexamples " + std::to_string(ce) + "/3, members with " + std::to_string(kInstances) + "/" +
                  std::to_string(kInstances) + " admissible instances " + std::to_string(adm) + "/3, violations " +
                  std::to_string(table.violations)};
}

// 11 ------------------------------------------------------------------------

Outcome consistency() {
  auto g = build_interval(-1.0, 1.0, 11);
  auto rep = laplacian_consistency(g, builtin_kernel(KernelShape::triangular), {0.2, 0.1, 0.05},
                                   builtin_smooth_field("sin"));
  double dm = std::abs(rep.second_moment - 1.0 / 12.0);
  return {rep.min_order >= kOrderMin && dm <= kMomentTol,
          "min order=" + fmt(rep.min_order) + " (>= " + fmt(kOrderMin) + "), |M2-1/12|=" + fmt(dm) +
              " tol=" + fmt(kMomentTol)};
}

// 12 ------------------------------------------------------------------------

Outcome comparison() {
  Problem p = bump(81, [](double t, const Point& x) { return 2.0 - x.x * x.x + std::sin(2 * kPi * t); });
  p.sigma = 0.5;
  auto inst = instantiate(p);
  NonlinearFlow flow(inst.f, inst.spec);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = -INFINITY;
  for (int pair = 0; pair < 20; ++pair) {
    SpaceField u0(flow.size()), v0(flow.size());
    for (int i = 0; i < flow.size(); ++i) {
      u0[i] = 2.0 * U(rng);
      v0[i] = u0[i] + U(rng);
    }
    auto a = evolve(flow, u0, 3.0), b = evolve(flow, v0, 3.0);
    for (std::size_t k = 0; k < a.states.size(); ++k) worst = std::max(worst, (a.states[k] - b.states[k]).maxCoeff());
  }
  return {worst <= kOrderSlack, "20 pairs, max(u-v)=" + fmt(worst) + " slack=" + fmt(kOrderSlack)};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{
      {1, "dense symmetric oracle", dense_oracle},
      {2, "shift equivariance", shift_equivariance},
      {3, "separable decomposition and monotone in D", separable},
      {4, "derivative in D", derivative_in_D},
      {5, "dispersal-rate limits", dispersal_rate_limits},
      {6, "persistence/extinction dichotomy", bifurcation},
      {7, "dispersal-range limits and sigma-monotonicity", range_limits},
      {8, "critical dispersal range", critical_range},
      {9, "periodic solution limits", solution_limits},
      {10, "maximum principle equivalence", equivalence},
      {11, "Laplacian consistency", consistency},
      {12, "comparison principle", comparison},
  };
  int unexpected = 0;
  for (const auto& it : items) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kKnownFailures.count(it.id) > 0;
    if (o.passed == known) ++unexpected;
    std::printf("%s %2d %s: %s [%.1fs]%s\n", o.passed ? "PASS" : "FAIL", it.id, it.name, o.detail.c_str(), secs,
                known ? (o.passed ? " (listed as known failure, now passing)" : " (known failure)") : "");
    std::fflush(stdout);
  }
  std::printf("%d unexpected outcome(s)\n", unexpected);
  return unexpected;
}
