#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/core/grid.hpp"

namespace nlkpp {

using Sampler = std::function<double(double t, const Point& x)>;

/// T-periodic coefficient a(t, x) restricted to the nodes of a grid, with the
/// time average a_T cached at construction.
class PeriodicCoefficient {
 public:
  PeriodicCoefficient() = default;

  PeriodicCoefficient(double period, Sampler sampler, const DomainGrid& grid,
                      int time_samples = 64)
      : period_(period),
        time_samples_(time_samples),
        sampler_(std::move(sampler)),
        nodes_(std::make_shared<const std::vector<Point>>(grid.nodes())) {
    if (!(period > 0.0) || !std::isfinite(period)) throw ConfigError("period T must be positive");
    if (time_samples < 4) throw ConfigError("coefficient needs at least 4 time samples");
    if (!sampler_) throw ConfigError("coefficient sampler is empty");
    validate();
    compute_average();
  }

  /// Coefficient that does not depend on time.
  static PeriodicCoefficient stationary(double period, std::function<double(const Point&)> f,
                                        const DomainGrid& grid, int time_samples = 64) {
    return PeriodicCoefficient(
        period, [f = std::move(f)](double, const Point& x) { return f(x); }, grid, time_samples);
  }

  static PeriodicCoefficient constant(double period, double value, const DomainGrid& grid,
                                      int time_samples = 64) {
    return PeriodicCoefficient(
        period, [value](double, const Point&) { return value; }, grid, time_samples);
  }

  double operator()(double t, int node) const { return sampler_(t, (*nodes_)[node]); }
  double at(double t, const Point& x) const { return sampler_(t, x); }

  void sample(double t, SpaceField& out) const {
    const auto& nodes = *nodes_;
    out.resize(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = sampler_(t, nodes[i]);
  }
  SpaceField sample(double t) const {
    SpaceField out;
    sample(t, out);
    return out;
  }

  /// Values at t_k = k T / samples.
  SpaceTimeField tabulate(int samples) const {
    SpaceTimeField f(period_, samples, nodes());
    SpaceField col;
    for (int k = 0; k < samples; ++k) {
      sample(f.time(k), col);
      f.slice(k) = col;
    }
    return f;
  }

  const SpaceField& average() const { return average_; }
  double period() const { return period_; }
  int time_samples() const { return time_samples_; }
  int nodes() const { return static_cast<int>(nodes_->size()); }
  const std::vector<Point>& node_points() const { return *nodes_; }
  const Sampler& sampler() const { return sampler_; }

  /// Extremes over the fine sampling used for the time average.
  double sup_abs() const { return sup_abs_; }
  double max_value() const { return max_value_; }
  double min_value() const { return min_value_; }

  /// a + c.
  PeriodicCoefficient shifted(double c) const {
    PeriodicCoefficient out = *this;
    out.sampler_ = [s = sampler_, c](double t, const Point& x) { return s(t, x) + c; };
    out.average_.array() += c;
    out.sup_abs_ = std::max(std::abs(max_value_ + c), std::abs(min_value_ + c));
    out.max_value_ += c;
    out.min_value_ += c;
    return out;
  }

  /// a(t + s, x).
  PeriodicCoefficient translated(double s) const {
    PeriodicCoefficient out = *this;
    out.sampler_ = [f = sampler_, s](double t, const Point& x) { return f(t + s, x); };
    out.compute_average();
    return out;
  }

  /// Number of quadrature points per period used for a_T.
  int average_samples() const { return std::max(512, 8 * time_samples_); }

 private:
  void validate() const {
    const auto& nodes = *nodes_;
    const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 64);
    for (int k = 0; k < time_samples_; ++k) {
      double t = period_ * k / time_samples_;
      for (std::size_t i = 0; i < nodes.size(); i += stride) {
        double v0 = sampler_(t, nodes[i]);
        double v1 = sampler_(t + period_, nodes[i]);
        if (!std::isfinite(v0)) throw ConfigError("coefficient is not finite on the sample set");
        if (std::abs(v0 - v1) > 1e-10 * std::max(1.0, std::abs(v0)))
          throw ConfigError("coefficient is not T-periodic (t=" + std::to_string(t) + ")");
      }
    }
  }

  // Periodic trapezoid rule; spectrally accurate for smooth periodic data.
  void compute_average() {
    const auto& nodes = *nodes_;
    const int q = average_samples();
    average_ = SpaceField::Zero(static_cast<Eigen::Index>(nodes.size()));
    max_value_ = -std::numeric_limits<double>::infinity();
    min_value_ = std::numeric_limits<double>::infinity();
    for (int k = 0; k < q; ++k) {
      double t = period_ * k / q;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        double v = sampler_(t, nodes[i]);
        average_[i] += v;
        max_value_ = std::max(max_value_, v);
        min_value_ = std::min(min_value_, v);
      }
    }
    average_ /= q;
    sup_abs_ = std::max(std::abs(max_value_), std::abs(min_value_));
  }

  double period_ = 1.0;
  int time_samples_ = 64;
  Sampler sampler_;
  std::shared_ptr<const std::vector<Point>> nodes_ = std::make_shared<std::vector<Point>>();
  SpaceField average_;
  double sup_abs_ = 0.0;
  double max_value_ = 0.0;
  double min_value_ = 0.0;
};

/// a_T(x) = (1/T) \int_0^T a(t, x) dt on the grid nodes.
inline SpaceField time_average(const PeriodicCoefficient& coeff) { return coeff.average(); }

/// Values of a coefficient on the lattice t_j = j T / lattice, for integrators
/// that revisit the same stage times every period. Off-lattice times fall back
/// to the sampler.
class CoefficientTable {
 public:
  CoefficientTable() = default;
  CoefficientTable(const PeriodicCoefficient& coeff, int lattice)
      : coeff_(coeff), lattice_(lattice), columns_(lattice) {
    for (int j = 0; j < lattice; ++j) coeff.sample(coeff.period() * j / lattice, columns_[j]);
  }

  const SpaceField& at(double t, SpaceField& scratch) const {
    double pos = t / coeff_.period() * lattice_;
    double r = std::round(pos);
    if (std::abs(pos - r) < 1e-7) {
      long j = static_cast<long>(r) % lattice_;
      if (j < 0) j += lattice_;
      return columns_[static_cast<std::size_t>(j)];
    }
    coeff_.sample(t, scratch);
    return scratch;
  }

  int lattice() const { return lattice_; }
  const SpaceField& column(int j) const { return columns_[static_cast<std::size_t>(j)]; }

 private:
  PeriodicCoefficient coeff_;
  int lattice_ = 0;
  std::vector<SpaceField> columns_;
};

}  // namespace nlkpp
