#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rotlat/hamiltonian.hpp"

namespace rotlat {

/// Contiguous run of eigenvalue indices [first, first + count).
struct Multiplet {
  std::size_t first = 0;
  std::size_t count = 0;

  std::size_t last() const { return first + count - 1; }
  bool contains(std::size_t i) const { return i >= first && i < first + count; }
  friend bool operator==(const Multiplet&, const Multiplet&) = default;
};

enum class SolverMethod {
  /// Chebyshev-filtered block subspace iteration with locking, seeded by one
  /// block Lanczos cycle.
  ChebyshevFiltered,
  /// Thick-restarted block Lanczos with full reorthogonalization.
  BlockLanczos,
};

std::string_view to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view name);

struct SolverOptions {
  SolverMethod method = SolverMethod::ChebyshevFiltered;
  std::size_t n_states = 12;
  /// Residual bound relative to ||H||_1.
  double tol = 1e-10;
  std::uint64_t seed = 20070412;
  std::size_t block_size = 4;
  /// Krylov basis size (Lanczos restart length, Chebyshev warm-up length);
  /// 0 picks a default from n_states.
  std::size_t max_basis = 0;
  /// Budget of Lanczos restarts or filter sweeps; 0 means 50 * n_states.
  std::size_t max_restarts = 0;
  /// Upper limit on the Chebyshev polynomial degree per sweep.
  std::size_t max_filter_degree = 300;
  /// Adjacent eigenvalues closer than this (absolute, energy units) share a multiplet.
  double cluster_tol = 1e-6;

  void validate() const;
};

struct SolverDiagnostics {
  std::string method;  // "chebyshev", "block-lanczos" or "dense"
  std::size_t restarts = 0;  // Lanczos restarts or filter sweeps
  std::size_t block_steps = 0;
  std::size_t matvecs = 0;
  double max_residual = 0.0;
  double residual_bound = 0.0;
  bool converged = false;
};

struct EigenSolution {
  std::vector<double> eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors;     // one normalized column per eigenvalue
  std::vector<double> residuals;     // ||H v - lambda v||
  std::vector<Multiplet> multiplets;
  SolverDiagnostics diagnostics;

  std::size_t size() const { return eigenvalues.size(); }
  Eigen::VectorXcd state(std::size_t i) const { return eigenvectors.col(static_cast<Eigen::Index>(i)); }
  /// Multiplet holding index i.
  const Multiplet& multiplet_of(std::size_t i) const;
  /// True when the multiplet of i ends before the last computed state, so it
  /// cannot be cut off by the requested count. A complete spectrum is always
  /// resolved.
  bool multiplet_resolved(std::size_t i) const;
};

/// Thrown when the residual target is not met within the restart budget. The
/// best available Ritz pairs are kept for reporting.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, EigenSolution partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const EigenSolution& partial() const { return partial_; }

 private:
  EigenSolution partial_;
};

/// Lowest n_states eigenpairs (see SolverMethod). Deterministic for a fixed
/// seed. Matrices too small for the Krylov basis are diagonalized densely.
EigenSolution solve_lowest(const SparseHermitianMatrix& matrix, const SolverOptions& options);

/// Full spectrum by dense Hermitian diagonalization, for dimensions up to `cap`.
EigenSolution dense_oracle(const SparseHermitianMatrix& matrix, std::size_t cap = 2000,
                           double cluster_tol = 1e-6);

/// Greedy clustering of an ascending sequence: a value joins the current
/// cluster when its gap to the previous value is <= tol.
std::vector<Multiplet> cluster_multiplets(std::span<const double> eigenvalues, double tol);

}  // namespace rotlat
