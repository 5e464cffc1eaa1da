#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlkpp/core/grid.hpp"
#include "nlkpp/core/kernel.hpp"
#include "nlkpp/core/nonlinearity.hpp"

namespace nlkpp {

struct FlatnessReport {
  bool holds = false;
  bool inconclusive = false;
  bool plateau = false;
  bool declared = false;
  double order = std::numeric_limits<double>::quiet_NaN();
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  double window = 0.0;
  int fit_points = 0;
  int argmax = -1;
  std::string evidence;
};

/// Decides whether 1 / (max a_T - a_T) fails to be locally integrable near the
/// maximizer. The local order p of the maximum is estimated by least squares on
/// log(max - a_T) against log|x - x*|; the condition holds iff p >= N. A plateau
/// (at least three nodes at the maximum) always holds. A declared order skips
/// the estimate.
inline FlatnessReport check_flatness_condition(const DomainGrid& grid, const SpaceField& a_T,
                                               std::optional<double> declared_order = {},
                                               int min_points = 8) {
  if (a_T.size() != grid.size()) throw PreconditionError("a_T does not match the grid");
  if (!a_T.allFinite()) throw PreconditionError("a_T has non-finite values");

  FlatnessReport rep;
  Eigen::Index imax = 0;
  const double top = a_T.maxCoeff(&imax);
  rep.argmax = static_cast<int>(imax);
  const double n_dim = grid.dimension();
  const double flat_tol = 1e-12 * (1.0 + std::abs(top));

  int at_max = 0;
  for (Eigen::Index i = 0; i < a_T.size(); ++i)
    if (top - a_T[i] <= flat_tol) ++at_max;
  if (at_max >= 3) {
    rep.plateau = true;
    rep.holds = true;
    rep.evidence = "plateau of " + std::to_string(at_max) + " nodes at the maximum";
    return rep;
  }

  if (declared_order) {
    rep.declared = true;
    rep.order = *declared_order;
    rep.holds = *declared_order >= n_dim;
    rep.evidence = "declared order p=" + std::to_string(*declared_order);
    return rep;
  }

  const Point xs = grid.node(rep.argmax);
  std::vector<std::pair<double, double>> pts;  // (log r, log gap)
  for (Eigen::Index i = 0; i < a_T.size(); ++i) {
    if (i == imax) continue;
    double gap = top - a_T[i];
    if (gap <= flat_tol) continue;
    Point d{grid.node(static_cast<int>(i)).x - xs.x, grid.node(static_cast<int>(i)).y - xs.y};
    pts.emplace_back(std::log(norm(d)), std::log(gap));
  }
  std::sort(pts.begin(), pts.end());
  if (static_cast<int>(pts.size()) < min_points) {
    rep.inconclusive = true;
    rep.evidence = "too few nodes near the maximizer for a fit";
    return rep;
  }

  // Smallest window around x* that still holds min_points samples.
  double log_window = pts[static_cast<std::size_t>(min_points - 1)].first;
  std::size_t count = 0;
  while (count < pts.size() && pts[count].first <= log_window + 1e-12) ++count;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < count; ++k) {
    sx += pts[k].first;
    sy += pts[k].second;
    sxx += pts[k].first * pts[k].first;
    sxy += pts[k].first * pts[k].second;
  }
  const double nk = static_cast<double>(count);
  const double denom = nk * sxx - sx * sx;
  if (!(std::abs(denom) > 1e-14)) {
    rep.inconclusive = true;
    rep.evidence = "degenerate radii in the fit window";
    return rep;
  }
  const double slope = (nk * sxy - sx * sy) / denom;
  const double icpt = (sy - slope * sx) / nk;
  double ss = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    double r = pts[k].second - (icpt + slope * pts[k].first);
    ss += r * r;
  }
  rep.order = slope;
  rep.fit_residual = std::sqrt(ss / nk);
  rep.window = std::exp(log_window);
  rep.fit_points = static_cast<int>(count);
  rep.holds = slope >= n_dim;
  std::ostringstream os;
  os << "log-log fit over " << count << " nodes within r<=" << rep.window << ": slope " << slope
     << ", rms residual " << rep.fit_residual;
  rep.evidence = os.str();
  return rep;
}

struct Witness {
  double t = 0.0;
  Point x;
  double s = 0.0;
};

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  std::string detail;
  std::optional<Witness> witness;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  double sup_bound = 0.0;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const HypothesisCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct HypothesisSampling {
  int time_samples = 16;
  int max_nodes = 64;
  int s_samples = 60;
  double s_min = 1e-6;
};

/// Samples the kernel and reaction term for every sub-hypothesis of the KPP
/// setting and records the first failing sample as a witness.
inline HypothesisReport check_hypotheses(const KernelProfile& kernel, const KPPNonlinearity& f,
                                         const HypothesisSampling& opt = {}) {
  HypothesisReport rep;
  rep.sup_bound = f.sup_bound();
  rep.checks.reserve(16);  // references below must stay valid
  auto add = [&](std::string name) -> HypothesisCheck& {
    rep.checks.push_back({std::move(name), true, "", std::nullopt});
    return rep.checks.back();
  };

  // Kernel.
  {
    const int dim = kernel.dimension();
    const double rad = kernel.radius();
    auto& nonneg = add("J nonnegative");
    auto& sym = add("J symmetric");
    const int samples = dim == 1 ? 801 : 41;
    auto probe = [&](const Point& z) {
      double v = kernel(z);
      if (nonneg.passed && !(v >= 0.0)) {
        nonneg.passed = false;
        nonneg.witness = Witness{0.0, z, 0.0};
        nonneg.detail = "J(z)=" + std::to_string(v);
      }
      double w = kernel({-z.x, -z.y});
      if (sym.passed && std::abs(v - w) > 1e-10 * std::max(1.0, std::abs(v))) {
        sym.passed = false;
        sym.witness = Witness{0.0, z, 0.0};
        sym.detail = "J(z)-J(-z)=" + std::to_string(v - w);
      }
    };
    for (int i = 0; i < samples; ++i) {
      double zx = -rad + 2.0 * rad * i / (samples - 1);
      if (dim == 1) {
        probe({zx, 0.0});
      } else {
        for (int j = 0; j < samples; ++j) probe({zx, -rad + 2.0 * rad * j / (samples - 1)});
      }
    }
    auto& peak = add("J(0) positive");
    peak.passed = kernel({0.0, 0.0}) > 0.0;
    peak.detail = "J(0)=" + std::to_string(kernel({0.0, 0.0}));
    auto& mass = add("J unit mass");
    double m = integrate_over_support([&](const Point& z) { return kernel(z); }, rad, dim);
    mass.passed = std::abs(m - 1.0) <= 1e-10;
    mass.detail = "integral=" + std::to_string(m);
    auto& supp = add("J compact support");
    supp.detail = "support radius " + std::to_string(rad);
  }

  // Reaction term.
  const auto& nodes = f.linearization().node_points();
  const std::size_t stride =
      std::max<std::size_t>(1, nodes.size() / static_cast<std::size_t>(opt.max_nodes));
  const double T = f.period();
  const double s_max = std::isfinite(f.sup_bound()) ? 2.0 * f.sup_bound() : 2.0;
  std::vector<double> sgrid(static_cast<std::size_t>(opt.s_samples));
  for (int j = 0; j < opt.s_samples; ++j)
    sgrid[j] = opt.s_min * std::pow(s_max / opt.s_min, static_cast<double>(j) / (opt.s_samples - 1));

  auto& periodic = add("f periodic in t");
  auto& zero = add("f(t,x,0)=0");
  auto& lin = add("a=f_s(t,x,0)");
  auto& mono = add("f/s decreasing");
  auto& super = add("f(t,x,S)<=0");
  bool strict = true;
  auto fail = [](HypothesisCheck& c, const Witness& w, std::string detail) {
    if (!c.passed) return;
    c.passed = false;
    c.witness = w;
    c.detail = std::move(detail);
  };

  for (int k = 0; k < opt.time_samples; ++k) {
    const double t = T * k / opt.time_samples;
    for (std::size_t i = 0; i < nodes.size(); i += stride) {
      const Point& x = nodes[i];
      for (double s : {0.5 * s_max, s_max}) {
        double d = f(t + T, x, s) - f(t, x, s);
        if (std::abs(d) > 1e-10 * std::max(1.0, std::abs(f(t, x, s))))
          fail(periodic, {t, x, s}, "f(t+T)-f(t)=" + std::to_string(d));
      }
      double f0 = f(t, x, 0.0);
      if (std::abs(f0) > 1e-12) fail(zero, {t, x, 0.0}, "f(t,x,0)=" + std::to_string(f0));

      const double delta = 1e-7;
      double slope = f(t, x, delta) / delta;
      double a = f.linearization().at(t, x);
      if (std::abs(slope - a) > 1e-4 * (1.0 + std::abs(a)))
        fail(lin, {t, x, delta}, "f(delta)/delta=" + std::to_string(slope) + " vs a=" + std::to_string(a));

      double prev = f(t, x, sgrid[0]) / sgrid[0];
      for (std::size_t j = 1; j < sgrid.size(); ++j) {
        double cur = f(t, x, sgrid[j]) / sgrid[j];
        if (cur > prev + 1e-12 * std::max(1.0, std::abs(prev)))
          fail(mono, {t, x, sgrid[j]},
               "f/s rises from " + std::to_string(prev) + " to " + std::to_string(cur));
        if (!(cur < prev)) strict = false;
        prev = cur;
      }

      double S = f.bound(t, x);
      if (!std::isfinite(S)) {
        fail(super, {t, x, S}, "no finite super-solution level");
      } else {
        double fs = f(t, x, S);
        if (fs > 1e-12) fail(super, {t, x, S}, "f(t,x,S)=" + std::to_string(fs));
      }
    }
  }
  if (mono.passed) mono.detail = strict ? "strictly decreasing on the sampled grid" : "non-increasing";
  return rep;
}

}  // namespace nlkpp
