#include "rotlat/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace rotlat {

std::string_view to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::ChebyshevFiltered:
      return "chebyshev";
    case SolverMethod::BlockLanczos:
      return "block-lanczos";
  }
  return "unknown";
}

SolverMethod parse_solver_method(std::string_view name) {
  if (name == "chebyshev") return SolverMethod::ChebyshevFiltered;
  if (name == "block-lanczos" || name == "lanczos") return SolverMethod::BlockLanczos;
  throw std::invalid_argument("unknown solver method '" + std::string(name) + "'");
}

void SolverOptions::validate() const {
  if (n_states < 1) throw std::invalid_argument("n_states must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("solver tol must be positive");
  if (block_size < 1) throw std::invalid_argument("block_size must be >= 1");
  if (!(cluster_tol > 0.0)) throw std::invalid_argument("cluster_tol must be positive");
  if (max_filter_degree < 2) throw std::invalid_argument("max_filter_degree must be >= 2");
}

const Multiplet& EigenSolution::multiplet_of(std::size_t i) const {
  for (const auto& m : multiplets) {
    if (m.contains(i)) return m;
  }
  throw std::out_of_range("eigenvalue index " + std::to_string(i) + " not in any multiplet");
}

bool EigenSolution::multiplet_resolved(std::size_t i) const {
  const bool complete = static_cast<Eigen::Index>(size()) == eigenvectors.rows();
  return complete || multiplet_of(i).last() + 1 < size();
}

std::vector<Multiplet> cluster_multiplets(std::span<const double> eigenvalues, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("cluster tolerance must be positive");
  std::vector<Multiplet> out;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (i > 0 && eigenvalues[i] - eigenvalues[i - 1] <= tol) {
      ++out.back().count;
    } else {
      out.push_back({i, 1});
    }
  }
  return out;
}

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXd;

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  void fill(Eigen::Ref<Eigen::VectorXcd> v) {
    for (Index i = 0; i < v.size(); ++i) v[i] = cplx(normal_(engine_), normal_(engine_));
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Orthonormalizes the columns of `w` against basis.leftCols(used) and against
// each other by two passes of Gram-Schmidt. Columns that collapse are
// replaced by fresh random directions.
void orthonormalize_block(const MatrixXcd& basis, Index used, MatrixXcd& w, GaussianSource& rng) {
  const auto project_out = [&](Eigen::Ref<Eigen::VectorXcd> v, Index upto_col) {
    for (int pass = 0; pass < 2; ++pass) {
      if (used > 0) {
        const Eigen::VectorXcd c = basis.leftCols(used).adjoint() * v;
        v.noalias() -= basis.leftCols(used) * c;
      }
      for (Index j = 0; j < upto_col; ++j) v -= w.col(j).dot(v) * w.col(j);
    }
  };
  for (Index c = 0; c < w.cols(); ++c) {
    const double before = w.col(c).norm();
    project_out(w.col(c), c);
    double after = w.col(c).norm();
    int attempts = 0;
    while (!(after > 1e-10 * before) || after == 0.0) {
      if (++attempts > 8) throw std::runtime_error("unable to extend the search subspace");
      rng.fill(w.col(c));
      const double fresh = w.col(c).norm();
      project_out(w.col(c), c);
      after = w.col(c).norm();
      if (after > 1e-8 * fresh) break;
    }
    w.col(c) /= after;
  }
}

// Block Krylov basis with full reorthogonalization. The projected matrix
// V^H H V is accumulated column block by column block, so it stays exact
// after thick restarts without tracking its arrowhead structure.
class BlockKrylov {
 public:
  BlockKrylov(const SparseHermitianMatrix& matrix, Index block, Index capacity, GaussianSource& rng)
      : matrix_(matrix),
        b_(block),
        cap_(capacity),
        basis_(static_cast<Index>(matrix.dimension()), capacity + block),
        projected_(MatrixXcd::Zero(capacity + block, capacity + block)),
        rng_(rng) {}

  void start(MatrixXcd first_block) {
    orthonormalize_block(basis_, 0, first_block, rng_);
    basis_.leftCols(b_) = first_block;
    cur_ = 0;
  }

  // Grows the basis to capacity. Afterwards image_ holds the unnormalized
  // block coupling the basis to its complement.
  void expand(SolverDiagnostics& diag) {
    while (true) {
      matrix_.apply(basis_.middleCols(cur_, b_), image_);
      diag.matvecs += static_cast<std::size_t>(b_);
      ++diag.block_steps;
      const Index used = cur_ + b_;
      MatrixXcd coeff = basis_.leftCols(used).adjoint() * image_;
      image_.noalias() -= basis_.leftCols(used) * coeff;
      const MatrixXcd again = basis_.leftCols(used).adjoint() * image_;
      image_.noalias() -= basis_.leftCols(used) * again;
      coeff += again;

      projected_.block(0, cur_, used, b_) = coeff;
      projected_.block(cur_, 0, b_, cur_) = coeff.topRows(cur_).adjoint();
      const MatrixXcd diag_block = coeff.bottomRows(b_);
      projected_.block(cur_, cur_, b_, b_) = 0.5 * (diag_block + diag_block.adjoint());

      if (used + b_ > cap_) break;
      MatrixXcd next = image_;
      orthonormalize_block(basis_, used, next, rng_);
      basis_.middleCols(used, b_) = next;
      cur_ = used;
    }
  }

  Index size() const { return cur_ + b_; }

  // Rayleigh-Ritz on the current basis, with cheap residual norms
  // ||H y - theta y|| = ||R s_tail|| for the first `count` Ritz pairs.
  void ritz(Index count, VectorXd& values, MatrixXcd& coeffs, std::vector<double>& estimates) const {
    const Index k = size();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(projected_.topLeftCorner(k, k));
    values = es.eigenvalues();
    coeffs = es.eigenvectors();
    const MatrixXcd gram = image_.adjoint() * image_;
    estimates.assign(static_cast<std::size_t>(count), 0.0);
    for (Index i = 0; i < count; ++i) {
      const Eigen::VectorXcd tail = coeffs.block(k - b_, i, b_, 1);
      estimates[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, (tail.adjoint() * gram * tail)(0, 0).real()));
    }
  }

  MatrixXcd ritz_vectors(const MatrixXcd& coeffs, Index count) const {
    MatrixXcd v = basis_.leftCols(size()) * coeffs.leftCols(count);
    for (Index c = 0; c < count; ++c) v.col(c).normalize();
    return v;
  }

  // Keeps the first `keep` Ritz vectors followed by the normalized residual block.
  void thick_restart(const VectorXd& values, const MatrixXcd& coeffs, Index keep) {
    MatrixXcd kept = basis_.leftCols(size()) * coeffs.leftCols(keep);
    basis_.leftCols(keep) = kept;
    projected_.setZero();
    projected_.topLeftCorner(keep, keep) = values.head(keep).cast<cplx>().asDiagonal();
    MatrixXcd next = image_;
    orthonormalize_block(basis_, keep, next, rng_);
    basis_.middleCols(keep, b_) = next;
    cur_ = keep;
  }

 private:
  const SparseHermitianMatrix& matrix_;
  Index b_;
  Index cap_;
  MatrixXcd basis_;
  MatrixXcd projected_;
  MatrixXcd image_;
  Index cur_ = 0;
  GaussianSource& rng_;
};

EigenSolution finish(std::vector<double> values, MatrixXcd vectors, const SparseHermitianMatrix& matrix,
                     double cluster_tol, SolverDiagnostics diag) {
  EigenSolution sol;
  sol.eigenvalues = std::move(values);
  sol.eigenvectors = std::move(vectors);
  MatrixXcd hv;
  matrix.apply(sol.eigenvectors, hv);
  diag.matvecs += static_cast<std::size_t>(sol.eigenvectors.cols());
  sol.residuals.resize(sol.eigenvalues.size());
  diag.max_residual = 0.0;
  for (std::size_t i = 0; i < sol.eigenvalues.size(); ++i) {
    const auto c = static_cast<Index>(i);
    sol.residuals[i] = (hv.col(c) - sol.eigenvalues[i] * sol.eigenvectors.col(c)).norm();
    diag.max_residual = std::max(diag.max_residual, sol.residuals[i]);
  }
  sol.multiplets = cluster_multiplets(sol.eigenvalues, cluster_tol);
  diag.converged = diag.max_residual <= diag.residual_bound;
  sol.diagnostics = std::move(diag);
  return sol;
}

EigenSolution dense_lowest(const SparseHermitianMatrix& matrix, std::size_t count, double cluster_tol,
                           double bound) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(matrix.to_dense());
  if (es.info() != Eigen::Success) throw std::runtime_error("dense Hermitian diagonalization failed");
  const auto m = static_cast<Index>(std::min<std::size_t>(count, matrix.dimension()));
  std::vector<double> values(es.eigenvalues().data(), es.eigenvalues().data() + m);
  SolverDiagnostics diag;
  diag.method = "dense";
  diag.residual_bound = bound;
  EigenSolution sol = finish(std::move(values), es.eigenvectors().leftCols(m), matrix, cluster_tol, diag);
  sol.diagnostics.converged = true;
  return sol;
}

[[noreturn]] void report_failure(EigenSolution partial, std::size_t sweeps) {
  std::ostringstream msg;
  msg << "eigensolver did not converge after " << sweeps << " iterations: max residual "
      << partial.diagnostics.max_residual << " > bound " << partial.diagnostics.residual_bound;
  throw ConvergenceError(msg.str(), std::move(partial));
}

MatrixXcd random_block(Index rows, Index cols, GaussianSource& rng) {
  MatrixXcd block(rows, cols);
  for (Index c = 0; c < cols; ++c) rng.fill(block.col(c));
  return block;
}

EigenSolution solve_block_lanczos(const SparseHermitianMatrix& matrix, const SolverOptions& options,
                                  std::size_t max_basis, double bound) {
  const std::size_t nev = options.n_states;
  const auto b = static_cast<Index>(options.block_size);
  const auto keep_target = static_cast<Index>(nev + (max_basis - nev) / 2);
  const std::size_t max_restarts = options.max_restarts ? options.max_restarts : 50 * nev;

  GaussianSource rng(options.seed);
  BlockKrylov krylov(matrix, b, static_cast<Index>(max_basis), rng);
  krylov.start(random_block(static_cast<Index>(matrix.dimension()), b, rng));

  SolverDiagnostics diag;
  diag.method = "block-lanczos";
  diag.residual_bound = bound;

  VectorXd values;
  MatrixXcd coeffs;
  std::vector<double> estimates;
  const auto m = static_cast<Index>(nev);
  for (std::size_t restart = 0;; ++restart) {
    krylov.expand(diag);
    krylov.ritz(m, values, coeffs, estimates);
    const bool small = std::all_of(estimates.begin(), estimates.end(), [&](double r) { return r <= 0.5 * bound; });
    if (small || restart >= max_restarts) {
      diag.restarts = restart;
      EigenSolution sol = finish(std::vector<double>(values.data(), values.data() + m),
                                 krylov.ritz_vectors(coeffs, m), matrix, options.cluster_tol, diag);
      if (sol.diagnostics.converged) return sol;
      if (restart >= max_restarts) report_failure(std::move(sol), restart);
      // Explicit residuals disagree with the estimates; keep iterating.
    }
    krylov.thick_restart(values, coeffs, std::min(keep_target, krylov.size() - b));
  }
}

// Scaled Chebyshev filter: damps the spectrum on [cut, upper] and amplifies
// it below, normalized so that the component at `lowest` keeps unit size.
MatrixXcd chebyshev_filter(const SparseHermitianMatrix& matrix, const MatrixXcd& x, std::size_t degree,
                           double cut, double upper, double lowest, SolverDiagnostics& diag) {
  using RowBlock = SparseHermitianMatrix::RowBlock;
  const double e = 0.5 * (upper - cut);
  const double c = 0.5 * (upper + cut);
  double sigma = e / (lowest - c);
  const double sigma1 = sigma;
  const double gamma = 2.0 / sigma1;

  RowBlock prev = x;
  RowBlock cur;
  matrix.apply_affine(prev, cur, c, sigma1 / e, nullptr, 0.0);
  RowBlock next;
  for (std::size_t i = 2; i <= degree; ++i) {
    const double sigma_next = 1.0 / (gamma - sigma);
    matrix.apply_affine(cur, next, c, 2.0 * sigma_next / e, &prev, -sigma * sigma_next);
    prev.swap(cur);
    cur.swap(next);
    sigma = sigma_next;
  }
  diag.matvecs += degree * static_cast<std::size_t>(x.cols());
  return cur;
}

EigenSolution solve_chebyshev(const SparseHermitianMatrix& matrix, const SolverOptions& options,
                              std::size_t warmup_basis, double bound) {
  const std::size_t nev = options.n_states;
  const auto n = static_cast<Index>(matrix.dimension());
  const auto block = static_cast<Index>(nev + std::max<std::size_t>(8, nev / 2));
  const std::size_t max_sweeps = options.max_restarts ? options.max_restarts : 50 * nev;

  SolverDiagnostics diag;
  diag.method = "chebyshev";
  diag.residual_bound = bound;

  // One Lanczos cycle supplies the starting subspace and the filter bounds.
  GaussianSource rng(options.seed);
  const auto b = static_cast<Index>(options.block_size);
  const auto warm_cap = std::max<Index>(static_cast<Index>(warmup_basis), block + b);
  BlockKrylov krylov(matrix, b, warm_cap, rng);
  krylov.start(random_block(n, b, rng));
  krylov.expand(diag);
  VectorXd ritz_values;
  MatrixXcd coeffs;
  std::vector<double> unused;
  krylov.ritz(0, ritz_values, coeffs, unused);
  MatrixXcd active = krylov.ritz_vectors(coeffs, block);

  const double upper = matrix.gershgorin_bounds().second;
  double lowest = ritz_values[0];
  double cut = ritz_values[block - 1];

  MatrixXcd locked(n, 0);
  std::vector<double> locked_values;
  MatrixXcd image;
  // Estimate of the slowest wanted eigenvalue, which sets the filter degree.
  double slowest = ritz_values[static_cast<Index>(nev) - 1];

  for (std::size_t sweep = 1;; ++sweep) {
    const Index want = static_cast<Index>(nev) - locked.cols();
    const double half_width = 0.5 * (upper - cut);
    const double center = 0.5 * (upper + cut);
    const double mapped = (center - slowest) / half_width;
    std::size_t degree = options.max_filter_degree;
    if (mapped > 1.0) {
      // Gain of roughly 1e3 for the slowest wanted vector against the cut.
      const double needed = std::ceil(std::acosh(1e3) / std::acosh(mapped));
      degree = std::clamp<std::size_t>(static_cast<std::size_t>(needed), 4, options.max_filter_degree);
    }

    MatrixXcd filtered = chebyshev_filter(matrix, active, degree, cut, upper, lowest, diag);
    orthonormalize_block(locked, locked.cols(), filtered, rng);
    matrix.apply(filtered, image);
    diag.matvecs += static_cast<std::size_t>(filtered.cols());
    const MatrixXcd gram = filtered.adjoint() * image;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (gram + gram.adjoint()));
    const VectorXd theta = es.eigenvalues();
    active = filtered * es.eigenvectors();
    image = image * es.eigenvectors();

    Index newly = 0;
    while (newly < want && newly < active.cols()) {
      const double r = (image.col(newly) - theta[newly] * active.col(newly)).norm();
      if (r > bound) break;
      ++newly;
    }
    if (newly > 0) {
      MatrixXcd grown(n, locked.cols() + newly);
      grown << locked, active.leftCols(newly);
      locked.swap(grown);
      for (Index i = 0; i < newly; ++i) locked_values.push_back(theta[i]);
    }

    lowest = std::min(lowest, theta[0]);
    cut = theta[theta.size() - 1];
    slowest = theta[std::min<Index>(want - 1, theta.size() - 1)];
    diag.restarts = sweep;

    const bool done = locked.cols() >= static_cast<Index>(nev);
    if (done || sweep >= max_sweeps) {
      MatrixXcd vectors(n, static_cast<Index>(nev));
      std::vector<double> values;
      const Index from_locked = std::min<Index>(locked.cols(), static_cast<Index>(nev));
      vectors.leftCols(from_locked) = locked.leftCols(from_locked);
      values.assign(locked_values.begin(), locked_values.begin() + from_locked);
      for (Index i = 0; from_locked + i < static_cast<Index>(nev); ++i) {
        vectors.col(from_locked + i) = active.col(newly + i);
        values.push_back(theta[newly + i]);
      }
      std::vector<std::size_t> order(values.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      MatrixXcd sorted_vectors(n, static_cast<Index>(nev));
      std::vector<double> sorted_values(values.size());
      for (std::size_t i = 0; i < order.size(); ++i) {
        sorted_vectors.col(static_cast<Index>(i)) = vectors.col(static_cast<Index>(order[i]));
        sorted_values[i] = values[order[i]];
      }
      EigenSolution sol = finish(std::move(sorted_values), std::move(sorted_vectors), matrix, options.cluster_tol, diag);
      if (sol.diagnostics.converged) return sol;
      report_failure(std::move(sol), sweep);
    }
    active = active.rightCols(active.cols() - newly).eval();
  }
}

}  // namespace

EigenSolution dense_oracle(const SparseHermitianMatrix& matrix, std::size_t cap, double cluster_tol) {
  if (matrix.dimension() > cap) {
    throw std::invalid_argument("dense oracle limited to dimension " + std::to_string(cap) + ", got " +
                                std::to_string(matrix.dimension()));
  }
  return dense_lowest(matrix, matrix.dimension(), cluster_tol, 0.0);
}

EigenSolution solve_lowest(const SparseHermitianMatrix& matrix, const SolverOptions& options) {
  options.validate();
  const std::size_t n = matrix.dimension();
  if (n == 0) throw std::invalid_argument("empty matrix");
  const std::size_t nev = options.n_states;
  if (nev > n) throw std::invalid_argument("n_states exceeds the matrix dimension");

  const double bound = options.tol * std::max(matrix.norm1(), 1e-300);
  std::size_t max_basis = options.max_basis;
  if (max_basis == 0) max_basis = std::max<std::size_t>(2 * nev + 8 * options.block_size, nev + 80);
  max_basis = std::max(max_basis, nev + 2 * options.block_size);
  // A basis this large would span most of the space; diagonalize directly.
  if (2 * (max_basis + options.block_size) >= n) return dense_lowest(matrix, nev, options.cluster_tol, bound);

  if (options.method == SolverMethod::BlockLanczos) return solve_block_lanczos(matrix, options, max_basis, bound);
  return solve_chebyshev(matrix, options, max_basis, bound);
}

}  // namespace rotlat
