#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/grid.hpp"
#include "nlkpp/core/quadrature.hpp"

namespace nlkpp {

enum class KernelShape { triangular, uniform, cosine_bump, custom };

inline const char* to_string(KernelShape s) {
  switch (s) {
    case KernelShape::triangular: return "triangular";
    case KernelShape::uniform: return "uniform";
    case KernelShape::cosine_bump: return "cosine";
    case KernelShape::custom: return "custom";
  }
  return "custom";
}

/// Unit-scale dispersal kernel J: nonnegative, symmetric, supported in the
/// ball of radius `radius()`, with unit mass.
class KernelProfile {
 public:
  using Raw = std::function<double(const Point&)>;

  KernelProfile() = default;

  double operator()(const Point& z) const {
    double r = dimension_ == 1 ? std::abs(z.x) : norm(z);
    if (r > radius_) return 0.0;
    return normalization_ * raw_(z);
  }

  int dimension() const { return dimension_; }
  double radius() const { return radius_; }
  double normalization() const { return normalization_; }
  KernelShape shape() const { return shape_; }
  const Raw& raw() const { return raw_; }

 private:
  friend KernelProfile normalize_kernel(Raw, double, int, KernelShape);

  Raw raw_;
  double radius_ = 1.0;
  double normalization_ = 1.0;
  int dimension_ = 1;
  KernelShape shape_ = KernelShape::custom;
};

/// Integral of `f` against the unit-scale kernel geometry: over [-radius, radius]
/// in 1D (split at the origin) or over the disk in 2D.
inline double integrate_over_support(const std::function<double(const Point&)>& f,
                                     double radius, int dimension) {
  if (dimension == 1) {
    auto g = [&](double z) { return f({z, 0.0}); };
    return quadrature::gauss_kronrod(g, -radius, 0.0) + quadrature::gauss_kronrod(g, 0.0, radius);
  }
  return quadrature::disk([&](double x, double y) { return f({x, y}); }, radius);
}

/// Computes the normalization constant making the profile a probability
/// density, after sampling it for sign, peak and symmetry.
inline KernelProfile normalize_kernel(KernelProfile::Raw raw, double radius, int dimension,
                                      KernelShape shape = KernelShape::custom) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ConfigError("kernel support radius must be positive");
  if (dimension != 1 && dimension != 2) throw ConfigError("kernel dimension must be 1 or 2");
  if (!(raw({0.0, 0.0}) > 0.0)) throw ConfigError("kernel profile must be positive at the origin");

  const int samples = dimension == 1 ? 2001 : 81;
  auto check = [&](const Point& z) {
    double v = raw(z);
    if (!std::isfinite(v)) throw ConfigError("kernel profile is not finite on its support");
    if (v < 0.0)
      throw ConfigError("kernel profile is negative at z=(" + std::to_string(z.x) + "," +
                        std::to_string(z.y) + ")");
    double w = raw({-z.x, -z.y});
    if (std::abs(v - w) > 1e-10 * std::max(1.0, std::abs(v)))
      throw ConfigError("kernel profile is not symmetric at z=(" + std::to_string(z.x) + "," +
                        std::to_string(z.y) + ")");
  };
  if (dimension == 1) {
    for (int k = 0; k < samples; ++k) check({-radius + 2.0 * radius * k / (samples - 1), 0.0});
  } else {
    for (int i = 0; i < samples; ++i)
      for (int j = 0; j < samples; ++j) {
        Point z{-radius + 2.0 * radius * i / (samples - 1), -radius + 2.0 * radius * j / (samples - 1)};
        if (norm(z) <= radius) check(z);
      }
  }

  double mass = integrate_over_support(raw, radius, dimension);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("kernel profile has zero integral");

  KernelProfile k;
  k.raw_ = std::move(raw);
  k.radius_ = radius;
  k.dimension_ = dimension;
  k.shape_ = shape;
  k.normalization_ = 1.0 / mass;
  return k;
}

/// Built-in unit-radius profiles: (1-|z|)_+, the indicator of the unit ball and
/// 1 + cos(pi |z|), each normalized to unit mass.
inline KernelProfile builtin_kernel(KernelShape shape, int dimension = 1) {
  auto radial = [dimension](const Point& z) { return dimension == 1 ? std::abs(z.x) : norm(z); };
  switch (shape) {
    case KernelShape::triangular:
      return normalize_kernel([radial](const Point& z) { return std::max(0.0, 1.0 - radial(z)); },
                              1.0, dimension, shape);
    case KernelShape::uniform:
      return normalize_kernel([radial](const Point& z) { return radial(z) <= 1.0 ? 1.0 : 0.0; },
                              1.0, dimension, shape);
    case KernelShape::cosine_bump:
      return normalize_kernel(
          [radial](const Point& z) {
            double r = radial(z);
            return r <= 1.0 ? 1.0 + std::cos(M_PI * r) : 0.0;
          },
          1.0, dimension, shape);
    case KernelShape::custom: break;
  }
  throw ConfigError("custom kernels need an explicit profile");
}

/// \int J(z) z_N^2 / 2 dz, where z_N is the last coordinate.
inline double second_moment(const KernelProfile& kernel) {
  int n = kernel.dimension();
  return integrate_over_support(
      [&](const Point& z) {
        double zn = n == 1 ? z.x : z.y;
        return kernel(z) * zn * zn / 2.0;
      },
      kernel.radius(), n);
}

/// J_sigma(z) = sigma^{-N} J(z / sigma), together with the dispersal rate D
/// and cost exponent m; the nonlocal term is scaled by D / sigma^m.
class ScaledKernel {
 public:
  ScaledKernel() = default;
  ScaledKernel(KernelProfile profile, double sigma, double m, double D)
      : profile_(std::move(profile)), sigma_(sigma), m_(m), D_(D) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
    if (!(m >= 0.0 && m < 2.0)) throw ConfigError("cost exponent m must lie in [0, 2)");
    if (!(D > 0.0) || !std::isfinite(D)) throw ConfigError("dispersal rate D must be positive");
  }

  double operator()(const Point& z) const {
    double scale = profile_.dimension() == 1 ? sigma_ : sigma_ * sigma_;
    return profile_({z.x / sigma_, z.y / sigma_}) / scale;
  }

  const KernelProfile& profile() const { return profile_; }
  double sigma() const { return sigma_; }
  double m() const { return m_; }
  double D() const { return D_; }
  double support_radius() const { return sigma_ * profile_.radius(); }
  /// Effective jump rate D / sigma^m multiplying the nonlocal term.
  double rate() const { return D_ / std::pow(sigma_, m_); }

 private:
  KernelProfile profile_;
  double sigma_ = 1.0;
  double m_ = 0.0;
  double D_ = 1.0;
};

}  // namespace nlkpp
