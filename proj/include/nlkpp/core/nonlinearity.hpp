#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"

namespace nlkpp {

/// Reaction term f(t, x, s) of KPP type together with its linearization at
/// s = 0 and a super-solution level S.
class KPPNonlinearity {
 public:
  enum class Family { logistic, linear, custom };
  using Reaction = std::function<double(double t, const Point& x, double s)>;

  KPPNonlinearity() = default;

  /// f = s (a - b s). Requires b >= b_min > 0 on the sample set.
  static KPPNonlinearity logistic(PeriodicCoefficient a, PeriodicCoefficient b) {
    if (!(b.min_value() > 0.0))
      throw ConfigError("logistic coefficient b must be bounded below by a positive constant");
    if (std::abs(a.period() - b.period()) > 1e-12 * a.period())
      throw ConfigError("logistic coefficients a and b must share the period");
    KPPNonlinearity f;
    f.family_ = Family::logistic;
    f.a_ = std::move(a);
    f.b_ = std::move(b);
    Sampler sa = f.a_.sampler();
    Sampler sb = f.b_->sampler();
    f.reaction_ = [sa, sb](double t, const Point& x, double s) { return s * (sa(t, x) - sb(t, x) * s); };
    double top = std::max(f.a_.max_value(), 0.0);
    f.sup_bound_ = top > 0.0 ? top / f.b_->min_value() : 1.0;
    f.bound_ = [level = f.sup_bound_](double, const Point&) { return level; };
    return f;
  }

  /// f = a s. Not KPP in the strict sense (no finite super-solution level when
  /// a > 0 somewhere); used for the linearized dynamics.
  static KPPNonlinearity linear(PeriodicCoefficient a) {
    KPPNonlinearity f;
    f.family_ = Family::linear;
    f.a_ = std::move(a);
    Sampler sa = f.a_.sampler();
    f.reaction_ = [sa](double t, const Point& x, double s) { return sa(t, x) * s; };
    f.sup_bound_ = std::numeric_limits<double>::infinity();
    f.bound_ = [](double, const Point&) { return std::numeric_limits<double>::infinity(); };
    return f;
  }

  /// Arbitrary f with a declared linearization a = f_s(., ., 0) and a constant
  /// super-solution level S. Nothing is verified here; see check_hypotheses.
  static KPPNonlinearity custom(Reaction reaction, PeriodicCoefficient a, double level) {
    if (!reaction) throw ConfigError("custom reaction is empty");
    if (!(level > 0.0) || !std::isfinite(level))
      throw ConfigError("super-solution level S must be positive and finite");
    KPPNonlinearity f;
    f.family_ = Family::custom;
    f.a_ = std::move(a);
    f.reaction_ = std::move(reaction);
    f.sup_bound_ = level;
    f.bound_ = [level](double, const Point&) { return level; };
    return f;
  }

  double operator()(double t, const Point& x, double s) const { return reaction_(t, x, s); }

  /// f(t, x_i, u_i) at every node of the coefficient's grid.
  void evaluate(double t, const SpaceField& u, SpaceField& out) const {
    const auto& nodes = a_.node_points();
    if (static_cast<std::size_t>(u.size()) != nodes.size())
      throw PreconditionError("field size does not match the nonlinearity grid");
    out.resize(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = reaction_(t, nodes[i], u[i]);
  }

  Family family() const { return family_; }
  const PeriodicCoefficient& linearization() const { return a_; }
  /// Logistic crowding coefficient, absent for the other families.
  const std::optional<PeriodicCoefficient>& crowding() const { return b_; }
  const Reaction& reaction() const { return reaction_; }
  double period() const { return a_.period(); }

  double bound(double t, const Point& x) const { return bound_(t, x); }
  double sup_bound() const { return sup_bound_; }

  /// Upper estimate of sup |f_s| over s in [0, level].
  double lipschitz_bound(double level) const {
    switch (family_) {
      case Family::linear:
        return a_.sup_abs();
      case Family::logistic:
        return a_.sup_abs() + 2.0 * level * b_->max_value();
      case Family::custom:
        break;
    }
    // Difference quotients on a coarse (t, x, s) sample, padded.
    const auto& nodes = a_.node_points();
    const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 32);
    double lip = a_.sup_abs();
    const int ns = 64;
    for (int k = 0; k < 16; ++k) {
      double t = period() * k / 16.0;
      for (std::size_t i = 0; i < nodes.size(); i += stride) {
        double prev = reaction_(t, nodes[i], 0.0);
        for (int j = 1; j <= ns; ++j) {
          double s = level * j / ns;
          double cur = reaction_(t, nodes[i], s);
          lip = std::max(lip, std::abs(cur - prev) / (level / ns));
          prev = cur;
        }
      }
    }
    return 1.5 * lip;
  }

  static const char* family_name(Family f) {
    switch (f) {
      case Family::logistic: return "logistic";
      case Family::linear: return "linear";
      case Family::custom: return "custom";
    }
    return "custom";
  }

 private:
  Family family_ = Family::custom;
  PeriodicCoefficient a_;
  std::optional<PeriodicCoefficient> b_;
  Reaction reaction_;
  std::function<double(double, const Point&)> bound_;
  double sup_bound_ = 1.0;
};

}  // namespace nlkpp
