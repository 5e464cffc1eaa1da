#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/core/grid.hpp"
#include "nlkpp/core/kernel.hpp"

namespace nlkpp {

struct AssemblyOptions {
  /// Divide by the lattice mass sum_k h^N J_sigma(k h) so that rows whose
  /// support lies inside the domain sum to one exactly.
  bool lattice_normalization = true;
  /// Above this fill fraction a dense copy is kept for faster products.
  double dense_fill = 0.25;
};

/// Discrete convolution K[i][j] = w_j J_sigma(x_i - x_j) / Z on a uniform grid.
class DispersalMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  DispersalMatrix() = default;

  const DomainGrid& grid() const { return *grid_; }
  std::shared_ptr<const DomainGrid> grid_ptr() const { return grid_; }
  const ScaledKernel& kernel() const { return kernel_; }
  const Sparse& matrix() const { return K_; }
  int size() const { return static_cast<int>(K_.rows()); }
  /// 1 - row sum; zero for rows whose support stays inside the domain.
  const SpaceField& mass_defect() const { return defect_; }
  /// Lattice mass the entries were divided by (1 when normalization is off).
  double lattice_mass() const { return lattice_mass_; }
  std::array<int, 2> bandwidth() const { return band_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool has_dense() const { return dense_.size() > 0; }

  double sigma() const { return kernel_.sigma(); }
  double m() const { return kernel_.m(); }
  double D() const { return kernel_.D(); }
  double rate() const { return kernel_.rate(); }

  /// out = K v.
  void multiply(const SpaceField& v, SpaceField& out) const {
    if (v.size() != K_.cols()) throw PreconditionError("field size does not match the grid");
    if (has_dense())
      out.noalias() = dense_ * v;
    else
      out.noalias() = K_ * v;
  }
  SpaceField operator*(const SpaceField& v) const {
    SpaceField out;
    multiply(v, out);
    return out;
  }

  /// Dense copy kept for well-filled matrices; empty otherwise.
  const Eigen::MatrixXd& dense_matrix() const { return dense_; }
  Eigen::MatrixXd to_dense() const { return has_dense() ? dense_ : Eigen::MatrixXd(K_); }

  /// Coordinate-triplet text: a header line "rows cols nnz", then "i j value".
  void write_triplets(std::ostream& os) const {
    os << K_.rows() << ' ' << K_.cols() << ' ' << K_.nonZeros() << '\n';
    os << std::setprecision(17);
    for (int i = 0; i < K_.outerSize(); ++i)
      for (Sparse::InnerIterator it(K_, i); it; ++it)
        os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  }

 private:
  friend DispersalMatrix assemble(const DomainGrid&, const ScaledKernel&, const AssemblyOptions&);

  std::shared_ptr<const DomainGrid> grid_;
  ScaledKernel kernel_;
  Sparse K_;
  Eigen::MatrixXd dense_;
  SpaceField defect_;
  double lattice_mass_ = 1.0;
  std::array<int, 2> band_{0, 0};
  std::vector<std::string> warnings_;
};

/// sum over k in Z^N of h^N J_sigma(k h).
inline double lattice_mass(const ScaledKernel& kernel, int dimension, std::array<double, 2> h) {
  const double r = kernel.support_radius();
  const int bx = static_cast<int>(std::floor(r / h[0] + 1e-9));
  const int by = dimension == 2 ? static_cast<int>(std::floor(r / h[1] + 1e-9)) : 0;
  const double cell = dimension == 2 ? h[0] * h[1] : h[0];
  double z = 0.0;
  for (int ky = -by; ky <= by; ++ky)
    for (int kx = -bx; kx <= bx; ++kx) z += cell * kernel({kx * h[0], ky * h[1]});
  return z;
}

/// Builds the banded convolution matrix. Entries depend only on the index
/// offset, so the kernel is evaluated once per offset.
inline DispersalMatrix assemble(const DomainGrid& grid, const ScaledKernel& kernel,
                                const AssemblyOptions& opt = {}) {
  if (kernel.profile().dimension() != grid.dimension())
    throw ConfigError("kernel and grid dimensions differ");
  const int dim = grid.dimension();
  const double reach = kernel.support_radius();
  const double h = grid.h();
  if (reach < h)
    throw ConfigError("kernel under-resolved: support radius " + std::to_string(reach) +
                      " is below the grid spacing " + std::to_string(h));

  DispersalMatrix out;
  out.grid_ = std::make_shared<const DomainGrid>(grid);
  out.kernel_ = kernel;
  if (reach < 2.0 * h)
    out.warnings_.push_back("kernel support radius " + std::to_string(reach) +
                            " is below twice the grid spacing " + std::to_string(h));

  const bool torus = grid.topology() == Topology::torus;
  const std::array<int, 2> n{grid.resolution(0), dim == 2 ? grid.resolution(1) : 1};
  const std::array<double, 2> sp{grid.spacing(0), dim == 2 ? grid.spacing(1) : 0.0};
  std::array<int, 2> band{static_cast<int>(std::floor(reach / sp[0] + 1e-9)), 0};
  if (dim == 2) band[1] = static_cast<int>(std::floor(reach / sp[1] + 1e-9));
  out.band_ = band;

  // Offsets that can couple two nodes. On the torus an offset and its wrapped
  // image are the same pair, so offsets are reduced to the nearest image.
  auto wrap_offset = [&](int d, int axis) {
    if (!torus) return d;
    int m = n[axis];
    d %= m;
    if (d < 0) d += m;
    if (2 * d > m) d -= m;
    return d;
  };
  std::array<int, 2> span{torus ? std::min(band[0], n[0] / 2) : std::min(band[0], n[0] - 1),
                          dim == 2 ? (torus ? std::min(band[1], n[1] / 2) : std::min(band[1], n[1] - 1)) : 0};

  const int wx = 2 * span[0] + 1;
  const int wy = 2 * span[1] + 1;
  std::vector<double> stencil(static_cast<std::size_t>(wx) * wy, 0.0);
  for (int dy = -span[1]; dy <= span[1]; ++dy)
    for (int dx = -span[0]; dx <= span[0]; ++dx)
      stencil[(dy + span[1]) * wx + (dx + span[0])] = kernel({dx * sp[0], dy * sp[1]});

  double z = 1.0;
  if (torus) {
    // Every row sees the same multiset of offsets; normalize by that sum.
    double row = 0.0;
    const double cell = grid.weight(0);
    std::vector<char> seen(static_cast<std::size_t>(n[0]) * n[1], 0);
    for (int dy = -span[1]; dy <= span[1]; ++dy)
      for (int dx = -span[0]; dx <= span[0]; ++dx) {
        int ix = ((dx % n[0]) + n[0]) % n[0];
        int iy = dim == 2 ? ((dy % n[1]) + n[1]) % n[1] : 0;
        char& s = seen[static_cast<std::size_t>(iy) * n[0] + ix];
        if (s) continue;
        s = 1;
        row += cell * stencil[(dy + span[1]) * wx + (dx + span[0])];
      }
    z = row;
  } else if (opt.lattice_normalization) {
    z = lattice_mass(kernel, dim, sp);
  }
  if (!(z > 0.0)) throw SolverError("kernel has no mass on the grid lattice");
  out.lattice_mass_ = z;

  const int N = grid.size();
  const bool may_repeat = torus && (wx > n[0] || wy > n[1]);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * std::min(N, wx * wy));
  for (int iy = 0; iy < n[1]; ++iy) {
    for (int ix = 0; ix < n[0]; ++ix) {
      const int i = grid.index(ix, iy);
      std::vector<char> touched;
      if (may_repeat) touched.assign(static_cast<std::size_t>(N), 0);
      for (int dy = -span[1]; dy <= span[1]; ++dy) {
        int jy = iy + dy;
        if (torus) jy = ((jy % n[1]) + n[1]) % n[1];
        else if (jy < 0 || jy >= n[1]) continue;
        for (int dx = -span[0]; dx <= span[0]; ++dx) {
          int jx = ix + dx;
          if (torus) jx = ((jx % n[0]) + n[0]) % n[0];
          else if (jx < 0 || jx >= n[0]) continue;
          double jv = stencil[(wrap_offset(dy, 1) + span[1]) * wx + (wrap_offset(dx, 0) + span[0])];
          if (jv == 0.0) continue;
          const int j = grid.index(jx, jy);
          if (may_repeat) {
            if (touched[j]) continue;
            touched[j] = 1;
          }
          trip.emplace_back(i, j, grid.weight(j) * jv / z);
        }
      }
    }
  }
  out.K_.resize(N, N);
  out.K_.setFromTriplets(trip.begin(), trip.end());
  out.K_.makeCompressed();

  SpaceField ones = SpaceField::Ones(N);
  SpaceField rows = out.K_ * ones;
  out.defect_ = (ones - rows).cwiseMax(0.0);
  for (int i = 0; i < N; ++i)
    if (std::abs(1.0 - rows[i]) < 1e-13) out.defect_[i] = 0.0;

  const double fill = static_cast<double>(out.K_.nonZeros()) / (static_cast<double>(N) * N);
  if (fill >= opt.dense_fill) out.dense_ = Eigen::MatrixXd(out.K_);
  return out;
}

/// The linear operator v -> rate (K v - v) + a(t, .) v with rate = D / sigma^m.
class LinearOperatorSpec {
 public:
  LinearOperatorSpec() = default;
  LinearOperatorSpec(std::shared_ptr<const DispersalMatrix> K, PeriodicCoefficient a)
      : K_(std::move(K)), a_(std::move(a)) {
    if (!K_) throw ConfigError("operator needs a dispersal matrix");
    if (a_.nodes() != K_->size()) throw ConfigError("coefficient and dispersal grids differ");
  }
  LinearOperatorSpec(DispersalMatrix K, PeriodicCoefficient a)
      : LinearOperatorSpec(std::make_shared<const DispersalMatrix>(std::move(K)), std::move(a)) {}

  const DispersalMatrix& dispersal() const { return *K_; }
  std::shared_ptr<const DispersalMatrix> dispersal_ptr() const { return K_; }
  const PeriodicCoefficient& coefficient() const { return a_; }
  const DomainGrid& grid() const { return K_->grid(); }
  double rate() const { return K_->rate(); }
  double period() const { return a_.period(); }
  int size() const { return K_->size(); }

  /// rate - max_x a_T(x).
  double lambda_star() const { return rate() - a_.average().maxCoeff(); }

  /// Same dispersal, coefficient replaced.
  LinearOperatorSpec with_coefficient(PeriodicCoefficient a) const {
    return LinearOperatorSpec(K_, std::move(a));
  }

  /// out = rate (K v - v) + a_t v for precomputed coefficient values a_t.
  void apply_with(const SpaceField& a_t, const SpaceField& v, SpaceField& out) const {
    K_->multiply(v, out);
    out = rate() * (out - v) + a_t.cwiseProduct(v);
  }

  void apply(double t, const SpaceField& v, SpaceField& out) const {
    if (v.size() != size()) throw PreconditionError("field size does not match the grid");
    SpaceField a_t;
    a_.sample(t, a_t);
    apply_with(a_t, v, out);
  }
  SpaceField apply(double t, const SpaceField& v) const {
    SpaceField out;
    apply(t, v, out);
    return out;
  }

 private:
  std::shared_ptr<const DispersalMatrix> K_;
  PeriodicCoefficient a_;
};

}  // namespace nlkpp
