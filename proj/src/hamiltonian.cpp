#include "rotlat/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace rotlat {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Hubbard:
      return "hubbard";
    case ModelKind::Continuum:
      return "continuum";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "hubbard") return ModelKind::Hubbard;
  if (name == "continuum" || name == "discretized-continuum") return ModelKind::Continuum;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

void ModelParams::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be positive");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw std::invalid_argument("omega must be non-negative");
  if (!(bigomega >= 0.0) || !std::isfinite(bigomega)) {
    throw std::invalid_argument("bigomega must be non-negative");
  }
}

SparseHermitianMatrix::SparseHermitianMatrix(std::size_t dimension, std::vector<Triplet> triplets)
    : dim_(dimension) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> counts(dim_, 0);
  cols_.reserve(triplets.size());
  values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& tr = triplets[i];
    if (tr.row >= dim_ || tr.col >= dim_) throw std::out_of_range("triplet outside matrix dimension");
    if (i > 0 && triplets[i - 1].row == tr.row && triplets[i - 1].col == tr.col) {
      values_.back() += tr.value;
      continue;
    }
    cols_.push_back(tr.col);
    values_.push_back(tr.value);
    ++counts[tr.row];
  }
  row_ptr_.assign(dim_ + 1, 0);
  for (std::size_t r = 0; r < dim_; ++r) row_ptr_[r + 1] = row_ptr_[r] + counts[r];
}

cplx SparseHermitianMatrix::entry(std::size_t row, std::size_t col) const {
  if (row >= dim_ || col >= dim_) throw std::out_of_range("matrix index out of range");
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return {0.0, 0.0};
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

void SparseHermitianMatrix::apply(const cplx* x, cplx* y) const {
  // Spelled-out complex arithmetic: std::complex multiplication carries
  // Annex G inf/nan handling that blocks vectorization.
  for (std::size_t r = 0; r < dim_; ++r) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const cplx a = values_[k];
      const cplx b = x[cols_[k]];
      re += a.real() * b.real() - a.imag() * b.imag();
      im += a.real() * b.imag() + a.imag() * b.real();
    }
    y[r] = {re, im};
  }
}

Eigen::VectorXcd SparseHermitianMatrix::apply(const Eigen::VectorXcd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw std::invalid_argument("vector length mismatch");
  Eigen::VectorXcd y(x.size());
  apply(x.data(), y.data());
  return y;
}

void SparseHermitianMatrix::apply(const Eigen::MatrixXcd& x, Eigen::MatrixXcd& y) const {
  if (static_cast<std::size_t>(x.rows()) != dim_) throw std::invalid_argument("block row count mismatch");
  y.resize(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) apply(x.col(c).data(), y.col(c).data());
}

void SparseHermitianMatrix::apply_affine(const RowBlock& x, RowBlock& y, double shift, double scale,
                                         const RowBlock* z, double z_scale) const {
  if (static_cast<std::size_t>(x.rows()) != dim_) throw std::invalid_argument("block row count mismatch");
  const bool use_z = z_scale != 0.0;
  if (use_z && (z == nullptr || z->rows() != x.rows() || z->cols() != x.cols())) {
    throw std::invalid_argument("affine term shape mismatch");
  }
  y.resize(x.rows(), x.cols());
  // Row-major blocks viewed as interleaved (re, im) doubles; each row of the
  // block is contiguous, so the inner loops vectorize.
  const auto width = static_cast<std::size_t>(x.cols());
  const auto stride = 2 * width;
  const double* xd = reinterpret_cast<const double*>(x.data());
  const double* zd = use_z ? reinterpret_cast<const double*>(z->data()) : nullptr;
  double* yd = reinterpret_cast<double*>(y.data());
  const double diag_scale = scale * shift;
  for (std::size_t r = 0; r < dim_; ++r) {
    double* out = yd + r * stride;
    const double* own = xd + r * stride;
    if (use_z) {
      const double* zr = zd + r * stride;
      for (std::size_t j = 0; j < stride; ++j) out[j] = z_scale * zr[j] - diag_scale * own[j];
    } else {
      for (std::size_t j = 0; j < stride; ++j) out[j] = -diag_scale * own[j];
    }
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double are = scale * values_[k].real();
      const double aim = scale * values_[k].imag();
      const double* in = xd + cols_[k] * stride;
      for (std::size_t j = 0; j < width; ++j) {
        const double bre = in[2 * j];
        const double bim = in[2 * j + 1];
        out[2 * j] += are * bre - aim * bim;
        out[2 * j + 1] += are * bim + aim * bre;
      }
    }
  }
}

double SparseHermitianMatrix::norm1() const {
  std::vector<double> colsum(dim_, 0.0);
  for (std::size_t k = 0; k < values_.size(); ++k) colsum[cols_[k]] += std::abs(values_[k]);
  return colsum.empty() ? 0.0 : *std::max_element(colsum.begin(), colsum.end());
}

double SparseHermitianMatrix::max_abs_entry() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::pair<double, double> SparseHermitianMatrix::gershgorin_bounds() const {
  double lower = std::numeric_limits<double>::infinity();
  double upper = -lower;
  for (std::size_t r = 0; r < dim_; ++r) {
    double center = 0.0;
    double radius = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (cols_[k] == r) {
        center = values_[k].real();
      } else {
        radius += std::abs(values_[k]);
      }
    }
    lower = std::min(lower, center - radius);
    upper = std::max(upper, center + radius);
  }
  return {lower, upper};
}

double SparseHermitianMatrix::hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - std::conj(entry(cols_[k], r))));
    }
  }
  return worst;
}

bool SparseHermitianMatrix::is_real() const {
  return std::all_of(values_.begin(), values_.end(), [](const cplx& v) { return v.imag() == 0.0; });
}

Eigen::MatrixXcd SparseHermitianMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_[k])) = values_[k];
    }
  }
  return dense;
}

std::vector<SparseHermitianMatrix::Triplet> SparseHermitianMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(values_.size());
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, cols_[k], values_[k]});
  }
  return out;
}

void SparseHermitianMatrix::write_triplets_csv(std::ostream& os) const {
  os << "row,col,re,im\n" << std::setprecision(17);
  for (const auto& tr : triplets()) {
    os << tr.row << ',' << tr.col << ',' << tr.value.real() << ',' << tr.value.imag() << '\n';
  }
}

double trap_potential(double omega, double radius_squared) { return 0.5 * omega * omega * radius_squared; }

namespace {

cplx continuum_hopping(const LatticeGeometry& geom, const ModelParams& params, std::size_t p, std::size_t q) {
  // -lap/2 on the 5-point stencil, and -Omega L_z = i Omega (x d_y - y d_x)
  // by central differences. The multiplying coordinate is constant along the
  // differenced direction.
  const double h = geom.spacing();
  const Site a = geom.site(p);
  const Site b = geom.site(q);
  const Point r = geom.coordinates(a);
  const double kinetic = -0.5 / (h * h);
  const double scale = params.bigomega / (2.0 * h);
  if (b.iy == a.iy) {
    const int step = b.ix - a.ix;
    return {kinetic, -step * scale * r.y};
  }
  const int step = b.iy - a.iy;
  return {kinetic, step * scale * r.x};
}

template <class HoppingFn>
SparseHermitianMatrix assemble(const LatticeGeometry& geom, double diagonal_shift, double omega,
                               HoppingFn&& hop) {
  const std::size_t n = geom.size();
  std::vector<SparseHermitianMatrix::Triplet> triplets;
  triplets.reserve(5 * n);
  for (std::size_t p = 0; p < n; ++p) {
    const Point r = geom.coordinates(p);
    triplets.push_back({p, p, {diagonal_shift + trap_potential(omega, r.x * r.x + r.y * r.y), 0.0}});
  }
  for (const Bond& b : geom.bonds()) {
    const cplx forward = hop(b.from, b.to);
    triplets.push_back({b.from, b.to, forward});
    triplets.push_back({b.to, b.from, std::conj(forward)});
  }
  return SparseHermitianMatrix(n, std::move(triplets));
}

}  // namespace

cplx hopping(const LatticeGeometry& geom, const ModelParams& params, std::size_t p, std::size_t q) {
  if (!geom.are_neighbors(p, q)) throw std::invalid_argument("hopping requested for non-neighbor sites");
  if (params.kind == ModelKind::Continuum) return continuum_hopping(geom, params, p, q);
  const double d = geom.spacing();
  return {-params.t, params.t * d * d * params.bigomega * geom.rotation_factor(p, q)};
}

SparseHermitianMatrix build_hubbard(const LatticeGeometry& geom, const ModelParams& params) {
  params.validate();
  if (params.kind != ModelKind::Hubbard) throw std::invalid_argument("build_hubbard needs kind = hubbard");
  return assemble(geom, 0.0, params.omega,
                  [&](std::size_t p, std::size_t q) { return hopping(geom, params, p, q); });
}

SparseHermitianMatrix build_discretized_continuum(const LatticeGeometry& geom, const ModelParams& params) {
  params.validate();
  if (params.kind != ModelKind::Continuum) {
    throw std::invalid_argument("build_discretized_continuum needs kind = continuum");
  }
  const double h = geom.spacing();
  return assemble(geom, 2.0 / (h * h), params.omega,
                  [&](std::size_t p, std::size_t q) { return continuum_hopping(geom, params, p, q); });
}

SparseHermitianMatrix build_hamiltonian(const LatticeGeometry& geom, const ModelParams& params) {
  return params.kind == ModelKind::Hubbard ? build_hubbard(geom, params)
                                           : build_discretized_continuum(geom, params);
}

double band_bottom_shift(const ModelParams& params) {
  return params.kind == ModelKind::Hubbard ? 4.0 * params.t : 0.0;
}

double analytic_spectrum(double omega, double bigomega, int j, int k) {
  if (j < 0 || k < 0) throw std::invalid_argument("quantum numbers j, k must be non-negative");
  if (omega < 0.0 || bigomega < 0.0) throw std::invalid_argument("frequencies must be non-negative");
  if (bigomega > omega) {
    throw std::domain_error("no bound spectrum for rotation faster than the trap (Omega > omega)");
  }
  return omega + (omega - bigomega) * j + (omega + bigomega) * k;
}

std::vector<AnalyticLevel> analytic_lowest(double omega, double bigomega, std::size_t count) {
  if (count == 0) return {};
  analytic_spectrum(omega, bigomega, 0, 0);  // validates the domain
  // Every level with j, k < count is a candidate; the lowest `count` lie
  // among them because each quantum number contributes a non-negative step.
  const int n = static_cast<int>(count);
  std::vector<AnalyticLevel> levels;
  levels.reserve(count * count);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) levels.push_back({j, k, analytic_spectrum(omega, bigomega, j, k)});
  }
  std::stable_sort(levels.begin(), levels.end(), [](const AnalyticLevel& a, const AnalyticLevel& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.j != b.j ? a.j < b.j : a.k < b.k;
  });
  levels.resize(count);
  return levels;
}

double effective_mass(double t, double d, double k) {
  if (!(t > 0.0) || !(d > 0.0)) throw std::invalid_argument("t and d must be positive");
  const double c = std::cos(k * d);
  if (std::abs(c) < 1e-12) throw std::domain_error("effective mass diverges at the band inflection");
  return 1.0 / (2.0 * t * d * d * c);
}

}  // namespace rotlat
