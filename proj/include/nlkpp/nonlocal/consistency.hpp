#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/grid.hpp"
#include "nlkpp/core/kernel.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"

namespace nlkpp {

struct SmoothField {
  std::string name;
  std::function<double(const Point&)> value;
  std::function<double(const Point&)> laplacian;
};

/// "sin": sin(pi x / 2), "linear": x + y/2, "quadratic": x^2 / 2.
inline SmoothField builtin_smooth_field(const std::string& name) {
  if (name == "sin")
    return {name, [](const Point& p) { return std::sin(M_PI * p.x / 2.0); },
            [](const Point& p) { return -(M_PI * M_PI / 4.0) * std::sin(M_PI * p.x / 2.0); }};
  if (name == "linear")
    return {name, [](const Point& p) { return p.x + 0.5 * p.y; }, [](const Point&) { return 0.0; }};
  if (name == "quadratic")
    return {name, [](const Point& p) { return 0.5 * p.x * p.x; }, [](const Point&) { return 1.0; }};
  throw ConfigError("unknown smooth test field '" + name + "' (sin, linear, quadratic)");
}

struct ConsistencyOptions {
  /// sigma * gamma / h for every grid in the study.
  double nodes_per_support = 512.0;
  /// Probe nodes per axis inside the common interior region.
  int probes = 41;
};

struct ConsistencyReport {
  std::vector<double> sigma;
  std::vector<double> spacing;
  std::vector<double> error;
  /// log(E_k / E_{k+1}) / log(sigma_k / sigma_{k+1}) for consecutive entries.
  std::vector<double> orders;
  double min_order = 0.0;
  double second_moment = 0.0;
  double region_lo = 0.0;
  double region_hi = 0.0;
};

/// Max error of (K u - u) / sigma^2 - M2 * Laplacian(u) over probe nodes in the
/// region farther than max(sigma) * gamma from the boundary, where M2 is the
/// kernel second moment. Each sigma uses its own uniform grid on the domain of
/// `domain` with spacing sigma * gamma / nodes_per_support.
inline ConsistencyReport laplacian_consistency(const DomainGrid& domain, const KernelProfile& kernel,
                                               std::vector<double> sigmas, const SmoothField& field,
                                               const ConsistencyOptions& opt = {}) {
  if (sigmas.empty()) throw ConfigError("sigma list is empty");
  const int dim = domain.dimension();
  if (kernel.dimension() != dim) throw ConfigError("kernel and grid dimensions differ");
  std::sort(sigmas.begin(), sigmas.end(), std::greater<>());
  const double gamma = kernel.radius();
  const double reach_max = sigmas.front() * gamma;
  const Box& box = domain.bounds();

  ConsistencyReport rep;
  rep.second_moment = second_moment(kernel);
  std::array<double, 2> rlo{box.lo[0] + reach_max, box.lo[1] + reach_max};
  std::array<double, 2> rhi{box.hi[0] - reach_max, box.hi[1] - reach_max};
  if (!(rhi[0] > rlo[0]) || (dim == 2 && !(rhi[1] > rlo[1])))
    throw PreconditionError("no interior nodes at the largest sigma");
  rep.region_lo = rlo[0];
  rep.region_hi = rhi[0];

  for (double sigma : sigmas) {
    ScaledKernel K(kernel, sigma, 0.0, 1.0);
    std::array<int, 2> res{1, 1};
    for (int a = 0; a < dim; ++a)
      res[a] = static_cast<int>(std::round(domain.extent(a) * opt.nodes_per_support / (sigma * gamma))) + 1;
    DomainGrid g = build_grid(dim, box, res, Topology::hostile);
    std::array<double, 2> sp{g.spacing(0), dim == 2 ? g.spacing(1) : 0.0};
    const double z = lattice_mass(K, dim, sp);
    std::array<int, 2> band{static_cast<int>(std::floor(sigma * gamma / sp[0] + 1e-9)),
                            dim == 2 ? static_cast<int>(std::floor(sigma * gamma / sp[1] + 1e-9)) : 0};

    // Probe nodes: nearest grid node to an equispaced set in the region.
    auto probe_index = [&](int axis, int k) {
      double x = opt.probes == 1 ? 0.5 * (rlo[axis] + rhi[axis])
                                 : rlo[axis] + (rhi[axis] - rlo[axis]) * k / (opt.probes - 1);
      int ix = static_cast<int>(std::round((x - box.lo[axis]) / sp[axis]));
      double xi = box.lo[axis] + ix * sp[axis];
      if (xi < rlo[axis] - 1e-12) ++ix;
      if (xi > rhi[axis] + 1e-12) --ix;
      return ix;
    };

    double err = 0.0;
    const int py = dim == 2 ? opt.probes : 1;
    for (int ky = 0; ky < py; ++ky) {
      int iy = dim == 2 ? probe_index(1, ky) : 0;
      for (int kx = 0; kx < opt.probes; ++kx) {
        int ix = probe_index(0, kx);
        const Point xi = g.node(g.index(ix, iy));
        const double ui = field.value(xi);
        double sum = 0.0;
        for (int dy = -band[1]; dy <= band[1]; ++dy)
          for (int dx = -band[0]; dx <= band[0]; ++dx) {
            const int j = g.index(ix + dx, iy + dy);
            double jv = K({dx * sp[0], dy * sp[1]});
            if (jv == 0.0) continue;
            sum += g.weight(j) * jv * (field.value(g.node(j)) - ui);
          }
        double nonlocal = sum / z / (sigma * sigma);
        err = std::max(err, std::abs(nonlocal - rep.second_moment * field.laplacian(xi)));
      }
    }
    rep.sigma.push_back(sigma);
    rep.spacing.push_back(g.h());
    rep.error.push_back(err);
  }

  rep.min_order = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < rep.error.size(); ++k) {
    double o = std::log(rep.error[k] / rep.error[k + 1]) / std::log(rep.sigma[k] / rep.sigma[k + 1]);
    rep.orders.push_back(o);
    rep.min_order = std::min(rep.min_order, o);
  }
  if (rep.orders.empty()) rep.min_order = std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace nlkpp
