#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rotlat/geometry.hpp"

namespace rotlat {

using cplx = std::complex<double>;

enum class ModelKind { Hubbard, Continuum };

std::string_view to_string(ModelKind kind);
/// Accepts "hubbard", "continuum" and "discretized-continuum".
ModelKind parse_model_kind(std::string_view name);

/// Energies and frequencies in units of the hopping t (lattice) or in
/// hbar = m = 1 units (continuum). `t` is ignored by the continuum model,
/// whose hopping is fixed at 1 / (2 h^2).
struct ModelParams {
  ModelKind kind = ModelKind::Hubbard;
  double t = 1.0;
  double omega = 0.1;     // trap frequency
  double bigomega = 0.0;  // rotation frequency

  void validate() const;
};

/// Complex Hermitian operator in compressed sparse row form. Both triangles
/// are stored explicitly.
class SparseHermitianMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    cplx value;
  };

  SparseHermitianMatrix() = default;
  /// Duplicate (row, col) entries are summed.
  SparseHermitianMatrix(std::size_t dimension, std::vector<Triplet> triplets);

  std::size_t dimension() const { return dim_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::size_t row_nonzeros(std::size_t row) const { return row_ptr_[row + 1] - row_ptr_[row]; }

  /// Stored value at (row, col), zero when absent.
  cplx entry(std::size_t row, std::size_t col) const;

  /// y = H x.
  void apply(const cplx* x, cplx* y) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  /// Y = H X, column by column.
  void apply(const Eigen::MatrixXcd& x, Eigen::MatrixXcd& y) const;

  using RowBlock = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  /// y = scale (H x - shift x) + z_scale z on row-major blocks, in one pass.
  /// `z` may be null when z_scale is zero.
  void apply_affine(const RowBlock& x, RowBlock& y, double shift, double scale, const RowBlock* z,
                    double z_scale) const;

  /// Maximum absolute column sum.
  double norm1() const;
  double max_abs_entry() const;
  /// Gershgorin enclosure [lower, upper] of the spectrum.
  std::pair<double, double> gershgorin_bounds() const;
  /// max |H(p,q) - conj(H(q,p))| over stored entries, diagonal included.
  double hermiticity_defect() const;
  bool is_real() const;

  Eigen::MatrixXcd to_dense() const;
  std::vector<Triplet> triplets() const;

  /// Coordinate-format dump: header "row,col,re,im" then one line per entry.
  void write_triplets_csv(std::ostream& os) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<cplx> values_;
};

/// Harmonic trap V(r) = omega^2 r^2 / 2.
double trap_potential(double omega, double radius_squared);

/// Hopping amplitude H(p, q) for nearest neighbors p, q under `params`.
///
/// Hubbard: -t + i t d^2 Omega K_{p,q}. This is the first-order Peierls phase
/// of the rotating frame, so that a lattice with t = 1 / (2 d^2) reproduces the
/// central-difference continuum operator exactly.
/// Continuum: -1 / (2 h^2) + i Omega K_{p,q} / 2.
cplx hopping(const LatticeGeometry& geom, const ModelParams& params, std::size_t p, std::size_t q);

/// Single-band Hubbard matrix: hopping on every bond, V(r_p) on the diagonal.
SparseHermitianMatrix build_hubbard(const LatticeGeometry& geom, const ModelParams& params);

/// Central-difference discretization of -lap/2 + omega^2 rho^2/2 - Omega L_z
/// with mesh h = geom.spacing().
SparseHermitianMatrix build_discretized_continuum(const LatticeGeometry& geom, const ModelParams& params);

/// Dispatches on params.kind.
SparseHermitianMatrix build_hamiltonian(const LatticeGeometry& geom, const ModelParams& params);

/// Offset added to lattice energies to align the band bottom with the
/// continuum zero: 4t for Hubbard, 0 for the continuum.
double band_bottom_shift(const ModelParams& params);

/// Continuum spectrum omega + (omega - Omega) j + (omega + Omega) k, valid for
/// Omega <= omega. Throws std::domain_error for Omega > omega.
double analytic_spectrum(double omega, double bigomega, int j, int k);

struct AnalyticLevel {
  int j = 0;
  int k = 0;
  double energy = 0.0;
};

/// The `count` lowest (j, k) levels, ascending in energy, ties by j then k.
std::vector<AnalyticLevel> analytic_lowest(double omega, double bigomega, std::size_t count);

/// Band mass 1 / (2 t d^2 cos(k d)). Throws std::domain_error near the band
/// inflection where |cos(k d)| < 1e-12.
double effective_mass(double t, double d, double k);

}  // namespace rotlat
