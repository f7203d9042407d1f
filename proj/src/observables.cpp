#include "rotlat/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rotlat {

namespace {

// Position of bond (p, p + direction) in geometry.bonds(): all +x bonds row by
// row, then all +y bonds.
std::size_t bond_slot(const LatticeGeometry& geom, Site from, BondDirection dir) {
  const auto nx = static_cast<std::size_t>(geom.nx());
  const auto ny = static_cast<std::size_t>(geom.ny());
  const auto ix = static_cast<std::size_t>(from.ix);
  const auto iy = static_cast<std::size_t>(from.iy);
  if (dir == BondDirection::PlusX) return iy * (nx - 1) + ix;
  return (nx - 1) * ny + iy * nx + ix;
}

void check_state(const LatticeGeometry& geom, const Eigen::VectorXcd& state) {
  if (static_cast<std::size_t>(state.size()) != geom.size()) {
    throw std::invalid_argument("state length " + std::to_string(state.size()) + " does not match " +
                                std::to_string(geom.size()) + " sites");
  }
}

void check_multiplet(const EigenSolution& solution, const Multiplet& multiplet) {
  if (multiplet.count == 0) throw std::invalid_argument("empty multiplet");
  if (multiplet.first + multiplet.count > solution.size()) {
    throw std::out_of_range("multiplet exceeds the computed states");
  }
}

}  // namespace

ScalarField::ScalarField(LatticeGeometry geom, std::vector<double> v)
    : geometry(std::move(geom)), values(std::move(v)) {
  if (values.size() != geometry.size()) throw std::invalid_argument("scalar field size does not match geometry");
}

double ScalarField::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

BondField::BondField(LatticeGeometry geom, std::vector<double> v)
    : geometry(std::move(geom)), bonds(geometry.bonds()), values(std::move(v)) {
  if (values.size() != bonds.size()) throw std::invalid_argument("bond field size does not match geometry");
}

double BondField::current(std::size_t p, std::size_t q) const {
  if (!geometry.are_neighbors(p, q)) {
    throw std::invalid_argument("no bond between sites " + std::to_string(p) + " and " + std::to_string(q));
  }
  const std::size_t lo = std::min(p, q);
  const std::size_t hi = std::max(p, q);
  const Site s = geometry.site(lo);
  const BondDirection dir = (hi == lo + 1) ? BondDirection::PlusX : BondDirection::PlusY;
  const double forward = values[bond_slot(geometry, s, dir)];
  return p == lo ? forward : -forward;
}

double BondField::max_abs() const {
  double out = 0.0;
  for (double v : values) out = std::max(out, std::abs(v));
  return out;
}

ScalarField density(const LatticeGeometry& geom, const Eigen::VectorXcd& state) {
  check_state(geom, state);
  std::vector<double> v(geom.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = std::norm(state[static_cast<Eigen::Index>(p)]);
  return ScalarField(geom, std::move(v));
}

ScalarField multiplet_average_density(const LatticeGeometry& geom, const EigenSolution& solution,
                                      const Multiplet& multiplet) {
  check_multiplet(solution, multiplet);
  std::vector<double> v(geom.size(), 0.0);
  for (std::size_t i = multiplet.first; i <= multiplet.last(); ++i) {
    const auto col = solution.eigenvectors.col(static_cast<Eigen::Index>(i));
    if (static_cast<std::size_t>(col.size()) != geom.size()) throw std::invalid_argument("state length mismatch");
    for (std::size_t p = 0; p < v.size(); ++p) v[p] += std::norm(col[static_cast<Eigen::Index>(p)]);
  }
  const double inv = 1.0 / static_cast<double>(multiplet.count);
  for (double& x : v) x *= inv;
  return ScalarField(geom, std::move(v));
}

BondField bond_currents(const LatticeGeometry& geom, const ModelParams& params, const Eigen::VectorXcd& state) {
  check_state(geom, state);
  const auto bonds = geom.bonds();
  std::vector<double> v(bonds.size());
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    const auto [p, q, dir] = bonds[b];
    const cplx z = std::conj(state[static_cast<Eigen::Index>(p)]) * state[static_cast<Eigen::Index>(q)];
    v[b] = -2.0 * std::imag(hopping(geom, params, p, q) * z);
  }
  return BondField(geom, std::move(v));
}

BondField multiplet_average_currents(const LatticeGeometry& geom, const ModelParams& params,
                                     const EigenSolution& solution, const Multiplet& multiplet) {
  check_multiplet(solution, multiplet);
  std::vector<double> v(geom.bond_count(), 0.0);
  for (std::size_t i = multiplet.first; i <= multiplet.last(); ++i) {
    const BondField member = bond_currents(geom, params, solution.state(i));
    for (std::size_t b = 0; b < v.size(); ++b) v[b] += member.values[b];
  }
  const double inv = 1.0 / static_cast<double>(multiplet.count);
  for (double& x : v) x *= inv;
  return BondField(geom, std::move(v));
}

std::vector<double> net_outflow(const BondField& field) {
  std::vector<double> out(field.geometry.size(), 0.0);
  for (std::size_t b = 0; b < field.bonds.size(); ++b) {
    out[field.bonds[b].from] += field.values[b];
    out[field.bonds[b].to] -= field.values[b];
  }
  return out;
}

double continuity_defect(const BondField& field) {
  double worst = 0.0;
  for (double x : net_outflow(field)) worst = std::max(worst, std::abs(x));
  return worst;
}

std::vector<std::array<double, 2>> site_current_vectors(const BondField& field) {
  const auto& g = field.geometry;
  std::vector<std::array<double, 2>> out(g.size(), {0.0, 0.0});
  std::vector<std::array<int, 2>> counts(g.size(), {0, 0});
  for (std::size_t b = 0; b < field.bonds.size(); ++b) {
    const int axis = field.bonds[b].direction == BondDirection::PlusX ? 0 : 1;
    for (std::size_t p : {field.bonds[b].from, field.bonds[b].to}) {
      out[p][axis] += field.values[b];
      ++counts[p][axis];
    }
  }
  for (std::size_t p = 0; p < out.size(); ++p) {
    for (int a = 0; a < 2; ++a) {
      if (counts[p][a] > 0) out[p][a] /= counts[p][a];
    }
  }
  return out;
}

ScalarField fermion_density(const LatticeGeometry& geom, const EigenSolution& solution, std::size_t n_fermions) {
  if (n_fermions == 0) throw std::invalid_argument("n_fermions must be positive");
  if (n_fermions > solution.size()) {
    throw std::invalid_argument("n_fermions = " + std::to_string(n_fermions) + " exceeds the " +
                                std::to_string(solution.size()) + " computed states");
  }
  if (!solution.multiplet_resolved(n_fermions - 1)) {
    throw std::invalid_argument("the multiplet at the Fermi level is not fully resolved; compute more states");
  }
  std::vector<double> v(geom.size(), 0.0);
  for (const auto& m : solution.multiplets) {
    if (m.first >= n_fermions) break;
    const std::size_t filled = std::min(m.count, n_fermions - m.first);
    const ScalarField avg = multiplet_average_density(geom, solution, m);
    const double weight = static_cast<double>(filled);
    for (std::size_t p = 0; p < v.size(); ++p) v[p] += weight * avg.values[p];
  }
  return ScalarField(geom, std::move(v));
}

Profile cross_section(const ScalarField& field, Axis axis, double offset) {
  const auto& g = field.geometry;
  const double d = g.spacing();
  const int lines = axis == Axis::X ? g.ny() : g.nx();
  const int length = axis == Axis::X ? g.nx() : g.ny();
  const double origin = axis == Axis::X ? g.center().y : g.center().x;
  const double f = (offset + origin) / d;
  constexpr double snap = 1e-6;
  if (!std::isfinite(f) || f < -snap || f > lines - 1 + snap) {
    throw std::out_of_range("cross-section offset " + std::to_string(offset) + " lies outside the grid");
  }
  const double fl = std::floor(f + snap);
  const double frac = f - fl;
  std::vector<int> rows;
  if (std::abs(frac) <= snap) {
    rows = {static_cast<int>(fl)};
  } else if (std::abs(frac - 0.5) <= snap) {
    rows = {static_cast<int>(fl), static_cast<int>(fl) + 1};
  } else {
    rows = {static_cast<int>(std::lround(f))};
  }
  for (int& r : rows) r = std::clamp(r, 0, lines - 1);

  Profile out;
  out.coordinate.resize(length);
  out.values.assign(length, 0.0);
  for (int i = 0; i < length; ++i) {
    for (int r : rows) {
      const Site s = axis == Axis::X ? Site{i, r} : Site{r, i};
      out.values[i] += field.at(s) / static_cast<double>(rows.size());
    }
    const Point c = g.coordinates(axis == Axis::X ? Site{i, rows.front()} : Site{rows.front(), i});
    out.coordinate[i] = axis == Axis::X ? c.x : c.y;
  }
  return out;
}

Profile diagonal_profile(const ScalarField& field) {
  const auto& g = field.geometry;
  const double shift = (g.center().y - g.center().x) / g.spacing();
  const double rounded = std::round(shift);
  if (std::abs(shift - rounded) > 1e-9) {
    throw std::invalid_argument("the line x = y does not pass through grid sites");
  }
  const int diy = static_cast<int>(rounded);
  Profile out;
  for (int ix = 0; ix < g.nx(); ++ix) {
    const Site s{ix, ix + diy};
    if (!g.contains(s)) continue;
    out.coordinate.push_back(std::sqrt(2.0) * g.coordinates(s).x);
    out.values.push_back(field.at(s));
  }
  return out;
}

double boundary_mass(const ScalarField& field, int margin) {
  const auto& g = field.geometry;
  if (margin < 1 || 2 * margin >= std::min(g.nx(), g.ny())) {
    throw std::invalid_argument("boundary margin " + std::to_string(margin) + " invalid for a " +
                                std::to_string(g.nx()) + "x" + std::to_string(g.ny()) + " grid");
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.edge_distance(p) < margin) sum += field.values[p];
  }
  return sum;
}

double rotation_asymmetry(const ScalarField& field) {
  const auto& g = field.geometry;
  if (!g.has_fourfold_symmetry()) throw std::invalid_argument("geometry is not invariant under a quarter turn");
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    worst = std::max(worst, std::abs(field.values[*g.quarter_turn(p)] - field.values[p]));
    scale = std::max(scale, std::abs(field.values[p]));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

}  // namespace rotlat
