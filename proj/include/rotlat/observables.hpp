#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "rotlat/eigensolver.hpp"
#include "rotlat/geometry.hpp"
#include "rotlat/hamiltonian.hpp"

namespace rotlat {

/// Per-site real values (probability per site for densities).
struct ScalarField {
  LatticeGeometry geometry;
  std::vector<double> values;

  ScalarField(LatticeGeometry geom, std::vector<double> v);

  double at(Site s) const { return values[geometry.index(s)]; }
  double total() const;
  double max() const;
};

/// Signed current on each bond of geometry.bonds(), oriented from bond.from
/// to bond.to.
struct BondField {
  LatticeGeometry geometry;
  std::vector<Bond> bonds;
  std::vector<double> values;

  BondField(LatticeGeometry geom, std::vector<double> v);

  /// Current from p to q; antisymmetric in (p, q). Throws for non-neighbors.
  double current(std::size_t p, std::size_t q) const;
  double max_abs() const;
};

/// |psi_p|^2. The state must match the geometry's dimension.
ScalarField density(const LatticeGeometry& geom, const Eigen::VectorXcd& state);

/// Mean of the member densities. Depends only on the multiplet's projector,
/// so any unitary mixing inside the multiplet leaves it unchanged.
ScalarField multiplet_average_density(const LatticeGeometry& geom, const EigenSolution& solution,
                                      const Multiplet& multiplet);

/// J(p -> q) = -2 Im(H_pq conj(psi_p) psi_q), the rate at which probability
/// leaves p through the bond. With H_pq = -t + i t d^2 Omega K_pq this is
/// 2t Im(conj(psi_p) psi_q) - 2 t d^2 Omega K_pq Re(conj(psi_p) psi_q).
BondField bond_currents(const LatticeGeometry& geom, const ModelParams& params, const Eigen::VectorXcd& state);

BondField multiplet_average_currents(const LatticeGeometry& geom, const ModelParams& params,
                                     const EigenSolution& solution, const Multiplet& multiplet);

/// Net current leaving each site, sum over q of J(p -> q).
std::vector<double> net_outflow(const BondField& field);
/// max_p |net_outflow(p)|.
double continuity_defect(const BondField& field);

/// Per-site current vector: x component from the mean of the adjacent +x
/// bonds, y component likewise.
std::vector<std::array<double, 2>> site_current_vectors(const BondField& field);

/// Density of the n lowest orbitals. A multiplet cut by the Fermi level is
/// filled fractionally: with s of its g members below the cut every member
/// carries weight s / g. Throws std::invalid_argument when fewer than n states
/// are available or the Fermi-level multiplet is not fully resolved.
ScalarField fermion_density(const LatticeGeometry& geom, const EigenSolution& solution, std::size_t n_fermions);

struct Profile {
  std::vector<double> coordinate;  // physical position along the profile
  std::vector<double> values;
};

/// Axis along which a profile runs.
enum class Axis { X, Y };

/// Profile along `axis` on the line where the other coordinate equals
/// `offset` (physical units). When the line falls midway between two rows the
/// two rows are averaged, so y = 0 on an even grid is well defined. Throws
/// std::out_of_range when the line lies outside the grid.
Profile cross_section(const ScalarField& field, Axis axis, double offset);

/// Values on the sites with x = y, against signed radius sqrt(2) x.
/// Requires an axis that lies on the diagonal of the grid.
Profile diagonal_profile(const ScalarField& field);

/// Sum of values on sites closer than `margin` sites to an edge (edge sites
/// have distance 0, so margin 1 means the outer ring). Requires
/// 1 <= margin and 2 * margin < min(nx, ny).
double boundary_mass(const ScalarField& field, int margin);

/// max_p |f(R p) - f(p)| / max_p |f(p)| for the quarter turn R about the axis.
/// Requires a fourfold-symmetric geometry.
double rotation_asymmetry(const ScalarField& field);

}  // namespace rotlat
