#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/parallel.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"
#include "nlkpp/spectral/principal.hpp"

namespace nlkpp {

/// u on [0, T] at t_k = k T / samples, k = 0..samples. Not assumed periodic.
struct Candidate {
  double period = 1.0;
  Eigen::MatrixXd values;  // nodes x (samples + 1)

  int samples() const { return static_cast<int>(values.cols()) - 1; }
  int nodes() const { return static_cast<int>(values.rows()); }
  double time(int k) const { return period * k / samples(); }
};

/// Closes a periodic field: column `samples` repeats column 0.
inline Candidate candidate_from_periodic(const SpaceTimeField& f) {
  Candidate c;
  c.period = f.period();
  c.values.resize(f.nodes(), f.time_samples() + 1);
  for (int k = 0; k <= f.time_samples(); ++k) c.values.col(k) = f.slice(k);
  return c;
}

struct MPOptions {
  double slack = 1e-8;
  /// Below this sup norm u counts as identically zero.
  double zero_tol = 1e-12;
  int time_samples = 128;
  int min_steps_per_period = 512;
};

/// Hypothesis and conclusion flags of the maximum principle for one candidate,
/// all computed from the samples.
struct MPInstance {
  bool supersolution = false;  // L[u] <= 0 on (0,T] x interior
  bool boundary = false;       // u >= 0 on (0,T] x boundary
  bool initial = false;        // u(0) >= u(T) on the interior
  bool hypotheses = false;
  bool conclusion = false;  // u > 0 on (0,T] x interior, or u == 0
  bool identically_zero = false;
  /// t = 0 is outside the hypotheses and is only reported.
  bool positive_at_zero = false;
  double worst_L = 0.0;
  double worst_boundary = 0.0;
  double worst_initial = 0.0;
  double min_interior = 0.0;
  double sup_norm = 0.0;
  double slack = 0.0;

  bool violates() const { return hypotheses && !conclusion; }
};

namespace detail {

// Fornberg's recursion: weights for the first derivative at z from nodes x.
inline std::vector<double> first_derivative_weights(double z, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, 1);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

}  // namespace detail

/// du/dt at every sample: 7-point stencils, centred inside and shifted to
/// one side near t = 0 and t = T.
inline Eigen::MatrixXd candidate_time_derivative(const Candidate& u) {
  const int N = u.samples();
  if (N < 6) throw PreconditionError("candidate needs at least 7 time samples");
  Eigen::MatrixXd out(u.nodes(), N + 1);
  std::vector<double> x(7);
  for (int k = 0; k <= N; ++k) {
    int s = std::clamp(k - 3, 0, N - 6);
    for (int j = 0; j < 7; ++j) x[j] = u.time(s + j);
    auto w = detail::first_derivative_weights(u.time(k), x);
    out.col(k) = w[0] * u.values.col(s);
    for (int j = 1; j < 7; ++j) out.col(k) += w[j] * u.values.col(s + j);
  }
  return out;
}

/// L[u] = -u_t + rate (K u - u) + a u at every sample.
inline Eigen::MatrixXd apply_parabolic(const LinearOperatorSpec& spec, const Candidate& u) {
  if (u.nodes() != spec.size()) throw PreconditionError("candidate does not match the grid");
  Eigen::MatrixXd L = -candidate_time_derivative(u);
  SpaceField a, v, Av;
  for (int k = 0; k <= u.samples(); ++k) {
    spec.coefficient().sample(u.time(k), a);
    v = u.values.col(k);
    spec.apply_with(a, v, Av);
    L.col(k) += Av;
  }
  return L;
}

inline MPInstance verify_instance(const LinearOperatorSpec& spec, const Candidate& u, const MPOptions& opt = {}) {
  MPInstance r;
  r.slack = opt.slack;
  if (!u.values.allFinite()) return r;
  const auto& grid = spec.grid();
  const Eigen::MatrixXd L = apply_parabolic(spec, u);
  const int N = u.samples();
  double worst_L = -std::numeric_limits<double>::infinity();
  double worst_b = std::numeric_limits<double>::infinity();
  double worst_i = std::numeric_limits<double>::infinity();
  double min_in = std::numeric_limits<double>::infinity();
  double min_zero = std::numeric_limits<double>::infinity();
  for (int i = 0; i < u.nodes(); ++i) {
    if (grid.is_boundary(i)) {
      for (int k = 1; k <= N; ++k) worst_b = std::min(worst_b, u.values(i, k));
      continue;
    }
    for (int k = 1; k <= N; ++k) {
      worst_L = std::max(worst_L, L(i, k));
      min_in = std::min(min_in, u.values(i, k));
    }
    worst_i = std::min(worst_i, u.values(i, 0) - u.values(i, N));
    min_zero = std::min(min_zero, u.values(i, 0));
  }
  r.worst_L = worst_L;
  r.worst_boundary = std::isfinite(worst_b) ? worst_b : 0.0;
  r.worst_initial = worst_i;
  r.min_interior = min_in;
  r.sup_norm = u.values.cwiseAbs().maxCoeff();
  r.supersolution = worst_L <= opt.slack;
  r.boundary = r.worst_boundary >= -opt.slack;
  r.initial = worst_i >= -opt.slack;
  r.hypotheses = r.supersolution && r.boundary && r.initial;
  r.identically_zero = r.sup_norm <= opt.zero_tol;
  r.conclusion = r.identically_zero || min_in > 0.0;
  r.positive_at_zero = min_zero > 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Sufficiency side: admissible instances when lambda1 >= 0.

/// Random smooth source g >= floor and random positive start, from a seed.
struct RandomSource {
  Sampler g;
  SpaceField u0;
};

inline RandomSource random_source(const LinearOperatorSpec& spec, std::uint64_t seed, double floor = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double T = spec.period();
  const double amp = 0.5 + U(rng), p1 = 2 * M_PI * U(rng), p2 = 2 * M_PI * U(rng), p3 = 2 * M_PI * U(rng);
  const double w = 1.0 + 3.0 * U(rng);
  const int mode = 1 + static_cast<int>(rng() % 3);
  RandomSource s;
  s.g = [=](double t, const Point& x) {
    return floor + 0.25 * amp * (1.0 + std::sin(2 * M_PI * mode * t / T + p1)) *
                       (1.0 + std::cos(w * x.x + p2) * std::cos(w * x.y + p3));
  };
  s.u0.resize(spec.size());
  for (int i = 0; i < spec.size(); ++i) s.u0[i] = 0.5 + U(rng);
  return s;
}

struct AdmissibleResult {
  std::optional<Candidate> u;
  int retries = 0;
  /// sup |L[u] + g| over the samples.
  double g_defect = std::numeric_limits<double>::quiet_NaN();
  std::string diagnostic;
};

/// u on [0, T] solving u_t = rate (K - I) u + a u + g from u0, with u0 raised
/// until u(0) >= u(T). Each retry sets u0 <- max(u0, u(T)) + beta psi where
/// psi = phi1(0) and, with d = (u(T) - u0)_+ and q = exp(-lambda1 T),
/// beta = safety * q / (1 - q) * max_i d_i / psi_i. Since Phi psi = q psi this
/// clears the deficit in one retry up to integration error.
inline AdmissibleResult generate_admissible(const LinearOperatorSpec& spec, const EigenResult& eig, const Sampler& g,
                                            SpaceField u0, int max_retries = 20, const MPOptions& opt = {}) {
  if (!(eig.lambda1 >= -opt.slack)) throw PreconditionError("generate_admissible needs lambda1 >= 0");
  if (eig.phi1.nodes() != spec.size() || !(eig.phi1.min() > 0.0))
    throw PreconditionError("generate_admissible needs a positive principal eigenfunction");
  if (u0.size() != spec.size()) throw PreconditionError("u0 does not match the grid");
  if ((u0.array() < 0.0).any()) throw PreconditionError("u0 must be non-negative");
  const double T = spec.period();
  const int nt = opt.time_samples;
  const double q = std::exp(-eig.lambda1 * T);
  const SpaceField psi = eig.phi1.slice(0);
  const double bound = spec.rate() + spec.coefficient().sup_abs();
  long steps = std::max<long>(opt.min_steps_per_period, static_cast<long>(std::ceil(T * bound / 0.5)));
  steps = (steps + nt - 1) / nt * nt;
  const int S = static_cast<int>(steps);
  const double dt = T / S;
  // Stage values on the half-step lattice.
  CoefficientTable a(spec.coefficient(), 2 * S);
  const auto& nodes = spec.coefficient().node_points();
  std::vector<SpaceField> gt(2 * S + 1, SpaceField(spec.size()));
  for (int j = 0; j <= 2 * S; ++j) {
    double t = 0.5 * dt * j;
    for (int i = 0; i < spec.size(); ++i) {
      gt[j][i] = g(t, nodes[i]);
      if (!(gt[j][i] >= 0.0)) throw PreconditionError("source g must be non-negative and finite");
    }
  }
  auto f = [&](int j, const SpaceField& v, SpaceField& out) {
    spec.apply_with(a.column(j % (2 * S)), v, out);
    out += gt[j];
  };

  AdmissibleResult res;
  Candidate u;
  u.period = T;
  u.values.resize(spec.size(), nt + 1);
  SpaceField v, k1, k2, k3, k4, tmp;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    v = u0;
    u.values.col(0) = v;
    for (int s = 0; s < S; ++s) {
      f(2 * s, v, k1);
      tmp = v + 0.5 * dt * k1;
      f(2 * s + 1, tmp, k2);
      tmp = v + 0.5 * dt * k2;
      f(2 * s + 1, tmp, k3);
      tmp = v + dt * k3;
      f(2 * s + 2, tmp, k4);
      v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if ((s + 1) % (S / nt) == 0) u.values.col((s + 1) / (S / nt)) = v;
    }
    if (!v.allFinite()) {
      res.diagnostic = "integration produced non-finite values";
      return res;
    }
    SpaceField deficit = (v - u0).cwiseMax(0.0);
    if (deficit.maxCoeff() <= 0.0) {
      res.retries = attempt;
      Eigen::MatrixXd L = apply_parabolic(spec, u);
      double d = 0.0;
      for (int k = 0; k <= nt; ++k) d = std::max(d, (L.col(k) + gt[2 * S / nt * k]).cwiseAbs().maxCoeff());
      res.g_defect = d;
      res.u = std::move(u);
      return res;
    }
    if (!(q < 1.0)) break;
    const double c = deficit.cwiseQuotient(psi).maxCoeff();
    u0 = u0.cwiseMax(v) + 1.25 * c * q / (1.0 - q) * psi;
  }
  res.retries = max_retries;
  res.diagnostic = q < 1.0 ? "u(0) >= u(T) not reached after " + std::to_string(max_retries) + " retries"
                           : "lambda1 = 0: the monodromy does not contract, so a positive source cannot close";
  return res;
}

// ---------------------------------------------------------------------------
// Necessity side: u = -eta phi1 when lambda1 < 0.

struct Counterexample {
  bool found = false;
  double lambda1 = 0.0;
  double rho = 0.0;
  std::vector<double> rho_history;
  /// min over the core {dist >= rho} of u, and sup |phi1|.
  double core_min = 0.0;
  double phi_sup = 0.0;
  /// min over interior samples of L[eta phi1] at the accepted rho.
  double margin = 0.0;
  Candidate witness;
  std::string diagnostic;
};

/// eta(d) = min(1, d / rho); 1 everywhere when the grid has no boundary.
inline SpaceField cutoff(const DomainGrid& grid, double rho) {
  SpaceField eta(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    double d = grid.distance_to_boundary(i);
    eta[i] = std::isfinite(d) ? std::min(1.0, d / rho) : 1.0;
  }
  return eta;
}

inline Counterexample counterexample_construct(const LinearOperatorSpec& spec, const EigenResult& eig) {
  if (!(eig.lambda1 < -1e-4)) throw PreconditionError("counterexample needs lambda1 < -1e-4");
  if (eig.phi1.nodes() != spec.size()) throw PreconditionError("eigenfunction does not match the grid");
  const auto& grid = spec.grid();
  Counterexample out;
  out.lambda1 = eig.lambda1;
  const Candidate phi = candidate_from_periodic(eig.phi1);
  out.phi_sup = phi.values.cwiseAbs().maxCoeff();
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    double d = grid.distance_to_boundary(i);
    if (!std::isfinite(d)) continue;
    dmax = std::max(dmax, d);
    if (d > 0.0) dmin = std::min(dmin, d);
  }
  const bool boundaryless = dmax == 0.0 && !std::isfinite(dmin);
  double rho = boundaryless ? 1.0 : 0.5 * dmax;
  Candidate eta_phi = phi;
  for (;;) {
    out.rho_history.push_back(rho);
    SpaceField eta = cutoff(grid, rho);
    for (int k = 0; k <= phi.samples(); ++k) eta_phi.values.col(k) = eta.cwiseProduct(phi.values.col(k));
    Eigen::MatrixXd L = apply_parabolic(spec, eta_phi);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.size(); ++i) {
      if (grid.is_boundary(i)) continue;
      for (int k = 1; k <= phi.samples(); ++k) margin = std::min(margin, L(i, k));
    }
    out.margin = margin;
    if (margin >= 0.0) {
      out.found = true;
      out.rho = rho;
      break;
    }
    // Once rho is below the smallest positive distance eta stops changing.
    if (boundaryless || rho < 0.5 * dmin) {
      std::ostringstream os;
      os << "rho search exhausted at rho=" << rho << ": min L[eta phi1]=" << margin << " < 0 with lambda1="
         << eig.lambda1 << "; |lambda1| is too small for this resolution";
      out.diagnostic = os.str();
      return out;
    }
    rho *= 0.5;
  }
  out.witness = eta_phi;
  out.witness.values *= -1.0;
  double core = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    if (grid.is_boundary(i) || grid.distance_to_boundary(i) < out.rho) continue;
    for (int k = 1; k <= phi.samples(); ++k) core = std::min(core, out.witness.values(i, k));
  }
  out.core_min = core;
  return out;
}

inline Counterexample counterexample_construct(const LinearOperatorSpec& spec, const MPOptions& opt = {}) {
  EigenOptions eo;
  eo.time_samples = opt.time_samples;
  eo.integrator.min_steps_per_period = opt.min_steps_per_period;
  return counterexample_construct(spec, principal_spectrum_point(spec, eo));
}

// ---------------------------------------------------------------------------
// Both directions along a shift family a + c.

struct EquivalenceRow {
  double shift = 0.0;
  double lambda1 = 0.0;
  /// "counterexample", "admissible" or "near-critical, untested".
  std::string regime;
  bool witness_found = false;
  bool witness_confirmed = false;
  double witness_rho = 0.0;
  int admissible = 0;
  int positive = 0;
  int attempts = 0;
  int max_retries_used = 0;
  double worst_g_defect = 0.0;
  int violations = 0;
  std::string diagnostic;
  /// First offending candidate and the accepted witness, kept for
  /// serialization.
  std::optional<Candidate> offending;
  std::optional<Candidate> witness;
};

struct EquivalenceOptions {
  double band = 0.05;
  int instances = 100;
  int max_attempts = 300;
  int max_retries = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  MPOptions mp;
};

struct EquivalenceTable {
  std::vector<EquivalenceRow> rows;
  int violations = 0;
  bool passed = false;
};

inline EquivalenceTable equivalence_experiment(const LinearOperatorSpec& base, const std::vector<double>& shifts,
                                               const EquivalenceOptions& opt = {}) {
  EquivalenceTable table;
  EigenOptions eo;
  eo.time_samples = opt.mp.time_samples;
  eo.integrator.min_steps_per_period = opt.mp.min_steps_per_period;
  for (std::size_t m = 0; m < shifts.size(); ++m) {
    EquivalenceRow row;
    row.shift = shifts[m];
    const LinearOperatorSpec spec = base.with_coefficient(base.coefficient().shifted(shifts[m]));
    const EigenResult eig = principal_spectrum_point(spec, eo);
    row.lambda1 = eig.lambda1;
    if (!eig.converged) {
      row.regime = "unresolved";
      row.diagnostic = eig.diagnostic;
      ++row.violations;
    } else if (eig.lambda1 <= -opt.band) {
      row.regime = "counterexample";
      auto ce = counterexample_construct(spec, eig);
      row.witness_found = ce.found;
      row.witness_rho = ce.rho;
      if (ce.found) {
        auto v = verify_instance(spec, ce.witness, opt.mp);
        row.witness_confirmed = v.hypotheses && !v.conclusion && ce.core_min <= -1e-3 * ce.phi_sup;
        row.witness = ce.witness;
      }
      if (!row.witness_confirmed) {
        ++row.violations;
        row.diagnostic = ce.found ? "witness failed verification" : ce.diagnostic;
        if (ce.found) row.offending = ce.witness;
      }
    } else if (eig.lambda1 >= opt.band) {
      row.regime = "admissible";
      // Attempts run in fixed-size batches so that results do not depend on
      // the thread count.
      const int batch = std::max(opt.instances, 1);
      while (row.admissible < opt.instances && row.attempts < opt.max_attempts) {
        const int count = std::min(batch, opt.max_attempts - row.attempts);
        std::vector<AdmissibleResult> r(count);
        std::vector<MPInstance> c(count);
        const int first = row.attempts;
        parallel_for(count, opt.threads, [&](int j) {
          auto src = random_source(spec, opt.seed * 1000003ULL + 7919ULL * m + static_cast<std::uint64_t>(first + j));
          r[j] = generate_admissible(spec, eig, src.g, src.u0, opt.max_retries, opt.mp);
          if (r[j].u) c[j] = verify_instance(spec, *r[j].u, opt.mp);
        });
        for (int j = 0; j < count && row.admissible < opt.instances; ++j) {
          ++row.attempts;
          if (!r[j].u || !c[j].hypotheses) continue;
          ++row.admissible;
          row.max_retries_used = std::max(row.max_retries_used, r[j].retries);
          row.worst_g_defect = std::max(row.worst_g_defect, r[j].g_defect);
          if (c[j].conclusion) {
            ++row.positive;
          } else {
            ++row.violations;
            if (!row.offending) row.offending = r[j].u;
          }
        }
      }
      if (row.admissible < opt.instances) {
        ++row.violations;
        row.diagnostic = "only " + std::to_string(row.admissible) + " admissible instances in " +
                         std::to_string(row.attempts) + " attempts";
      }
    } else {
      row.regime = "near-critical, untested";
    }
    table.violations += row.violations;
    table.rows.push_back(std::move(row));
  }
  table.passed = table.violations == 0;
  return table;
}

}  // namespace nlkpp
