#pragma once

#include <array>
#include <cmath>
#include <functional>

namespace nlkpp::quadrature {

// Adaptive Gauss-Kronrod (7/15) on [a, b]. Used for reference integrals of
// kernel profiles and scalar quantities, not for field operations.
inline double gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                            double tol = 1e-14, int max_depth = 40) {
  static constexpr std::array<double, 8> xk{0.991455371120812639206854697526329,
                                           0.949107912342758524526189684047851,
                                           0.864864423359769072789712788640926,
                                           0.741531185599394439863864773280788,
                                           0.586087235467691130294144845693013,
                                           0.405845151377397166906606412076961,
                                           0.207784955007898467600689403773245,
                                           0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk{0.022935322010529224963732008058970,
                                           0.063092092629978553290700663189204,
                                           0.104790010322250183839876322541518,
                                           0.140653259715525918745189590510238,
                                           0.169004726639267902826583426598550,
                                           0.190350578064785409913256402421014,
                                           0.204432940075298892414161999234649,
                                           0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg{0.129484966168869693270611432679082,
                                           0.279705391489276667901467771423780,
                                           0.381830050505118944950369775488975,
                                           0.417959183673469387755102040816327};

  std::function<double(double, double, double, int)> rec = [&](double lo, double hi,
                                                                double eps, int depth) {
    double c = 0.5 * (lo + hi);
    double r = 0.5 * (hi - lo);
    double fc = f(c);
    double kron = wk[7] * fc;
    double gauss = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
      double f1 = f(c - r * xk[j]);
      double f2 = f(c + r * xk[j]);
      kron += wk[j] * (f1 + f2);
      if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
    }
    kron *= r;
    gauss *= r;
    if (depth >= max_depth || std::abs(kron - gauss) <= eps) return kron;
    return rec(lo, c, 0.5 * eps, depth + 1) + rec(c, hi, 0.5 * eps, depth + 1);
  };
  return rec(a, b, tol, 0);
}

/// Integral over the disk of radius `radius` centred at the origin, in polar
/// coordinates: periodic trapezoid in angle, adaptive Gauss-Kronrod in radius.
inline double disk(const std::function<double(double, double)>& f, double radius,
                   int angles = 256, double tol = 1e-13) {
  double total = 0.0;
  const double dtheta = 2.0 * M_PI / angles;
  for (int k = 0; k < angles; ++k) {
    double th = (k + 0.5) * dtheta;
    double c = std::cos(th), s = std::sin(th);
    total += gauss_kronrod([&](double r) { return f(r * c, r * s) * r; }, 0.0, radius,
                           tol / angles);
  }
  return total * dtheta;
}

}  // namespace nlkpp::quadrature
