#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rotlat/eigensolver.hpp"
#include "rotlat/geometry.hpp"
#include "rotlat/hamiltonian.hpp"
#include "rotlat/observables.hpp"

namespace rotlat {

struct Thresholds {
  double energy = 1e-4;    // max |Delta E_g| across levels
  double density = 1e-3;   // max L1 distance of renormalized ground densities
  double boundary = 1e-6;  // max boundary mass per level
  int margin = 3;          // boundary width in sites

  void validate() const;
};

enum class Verdict { Contained, Escaping };
std::string_view to_string(Verdict v);

/// Grid of one scan level. The rotation axis sits at the grid midpoint.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double spacing = 0.0;

  LatticeGeometry geometry() const { return LatticeGeometry(nx, ny, spacing); }
};

enum class ScanAxis { Mesh, LatticeSize };
std::string_view to_string(ScanAxis axis);
ScanAxis parse_scan_axis(std::string_view name);

/// Mesh levels at fixed physical extent: n = round(extent / h) + 1 sites per side.
std::vector<GridSpec> mesh_levels(double extent_x, double extent_y, std::span<const double> spacings);

/// Ground-state summary of one solve.
struct GroundRun {
  GridSpec grid;
  double bigomega = 0.0;
  double ground_energy = 0.0;   // lowest eigenvalue, unshifted
  double shifted_energy = 0.0;  // ground_energy + band_bottom_shift
  double boundary_mass = 0.0;   // of the ground-multiplet average density
  std::size_t ground_degeneracy = 0;
  SolverDiagnostics solver;
};

/// Solves one level and returns the summary with the ground-multiplet density.
/// The state count is doubled until the ground multiplet is resolved. A
/// ConvergenceError is absorbed: the partial pairs are used and
/// run.solver.converged is false.
std::pair<GroundRun, ScalarField> solve_ground(const GridSpec& grid, const ModelParams& params,
                                               const SolverOptions& solver, int margin);

/// L1 distance between two densities restricted to their common physical
/// window. The field with the coarser spacing provides the sample points; the
/// other is bilinearly interpolated as density per unit area. Both samples are
/// renormalized to unit sum first.
double density_distance(const ScalarField& a, const ScalarField& b);

struct ContainmentReport {
  std::vector<GroundRun> runs;
  double energy_sensitivity = 0.0;
  double density_sensitivity = 0.0;
  double supercritical_margin = 0.0;  // sqrt(Omega^2 - omega^2) above omega, else 0
  Verdict verdict = Verdict::Escaping;
  bool converged = true;  // false when any level missed its residual target
};

double supercritical_margin(double omega, double bigomega);

/// Solves each level and compares ground energies and densities pairwise.
/// Requires at least two levels.
ContainmentReport refinement_scan(const ModelParams& params, std::span<const GridSpec> levels,
                                  const SolverOptions& solver, const Thresholds& thresholds);

struct SweepRow {
  GroundRun run;
  Verdict verdict = Verdict::Escaping;  // from the boundary mass alone
};

/// Ground energy and boundary-mass verdict at each Omega, fixed grid.
/// Omega values must be ascending.
std::vector<SweepRow> omega_sweep(const GridSpec& grid, const ModelParams& params,
                                  std::span<const double> bigomegas, const SolverOptions& solver,
                                  const Thresholds& thresholds);

/// True when no contained row follows an escaping one.
bool verdicts_monotone(std::span<const SweepRow> rows);

struct ThresholdResult {
  double lower = 0.0;  // largest Omega found contained
  double upper = 0.0;  // smallest Omega found escaping
  std::vector<SweepRow> evaluations;

  double estimate() const { return 0.5 * (lower + upper); }
};

/// Bisection of the boundary-mass verdict on a fixed grid until
/// upper - lower <= tol. Throws std::domain_error when the bracket ends do not
/// give contained and escaping respectively.
ThresholdResult escape_threshold(const GridSpec& grid, const ModelParams& params, double lo, double hi, double tol,
                                 const SolverOptions& solver, const Thresholds& thresholds);

}  // namespace rotlat
