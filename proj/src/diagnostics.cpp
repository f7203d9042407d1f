#include "rotlat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rotlat {

void Thresholds::validate() const {
  if (!(energy > 0.0)) throw std::invalid_argument("energy threshold must be positive");
  if (!(density > 0.0)) throw std::invalid_argument("density threshold must be positive");
  if (!(boundary > 0.0)) throw std::invalid_argument("boundary threshold must be positive");
  if (margin < 1) throw std::invalid_argument("boundary margin must be >= 1");
}

std::string_view to_string(Verdict v) { return v == Verdict::Contained ? "contained" : "escaping"; }

std::string_view to_string(ScanAxis axis) { return axis == ScanAxis::Mesh ? "mesh" : "lattice-size"; }

ScanAxis parse_scan_axis(std::string_view name) {
  if (name == "mesh") return ScanAxis::Mesh;
  if (name == "lattice-size" || name == "lattice_size" || name == "size") return ScanAxis::LatticeSize;
  throw std::invalid_argument("unknown scan axis '" + std::string(name) + "' (expected mesh or lattice-size)");
}

std::vector<GridSpec> mesh_levels(double extent_x, double extent_y, std::span<const double> spacings) {
  if (!(extent_x > 0.0) || !(extent_y > 0.0)) throw std::invalid_argument("extent must be positive");
  std::vector<GridSpec> out;
  for (double h : spacings) {
    if (!(h > 0.0)) throw std::invalid_argument("mesh spacing must be positive");
    out.push_back({static_cast<int>(std::lround(extent_x / h)) + 1, static_cast<int>(std::lround(extent_y / h)) + 1, h});
  }
  return out;
}

std::pair<GroundRun, ScalarField> solve_ground(const GridSpec& grid, const ModelParams& params,
                                               const SolverOptions& solver, int margin) {
  const LatticeGeometry geom = grid.geometry();
  const SparseHermitianMatrix h = build_hamiltonian(geom, params);
  SolverOptions opts = solver;
  EigenSolution sol;
  for (;;) {
    try {
      sol = solve_lowest(h, opts);
    } catch (const ConvergenceError& e) {
      sol = e.partial();
    }
    if (sol.multiplet_resolved(0)) break;
    // The ground multiplet reaches the last computed state: ask for more.
    opts.n_states = std::min(2 * opts.n_states, geom.size());
  }
  const Multiplet& ground = sol.multiplet_of(0);
  ScalarField rho = multiplet_average_density(geom, sol, ground);

  GroundRun run;
  run.grid = grid;
  run.bigomega = params.bigomega;
  run.ground_energy = sol.eigenvalues.front();
  run.shifted_energy = run.ground_energy + band_bottom_shift(params);
  run.boundary_mass = boundary_mass(rho, margin);
  run.ground_degeneracy = ground.count;
  run.solver = sol.diagnostics;
  return {run, std::move(rho)};
}

namespace {

struct Window {
  double x0, x1, y0, y1;
};

Window extent(const LatticeGeometry& g) {
  const Point lo = g.coordinates(Site{0, 0});
  const Point hi = g.coordinates(Site{g.nx() - 1, g.ny() - 1});
  return {lo.x, hi.x, lo.y, hi.y};
}

// Bilinear interpolation of per-site values at physical point (x, y), which
// must lie inside the grid.
double interpolate(const ScalarField& f, double x, double y) {
  const auto& g = f.geometry;
  const double d = g.spacing();
  const double fx = std::clamp((x + g.center().x) / d, 0.0, static_cast<double>(g.nx() - 1));
  const double fy = std::clamp((y + g.center().y) / d, 0.0, static_cast<double>(g.ny() - 1));
  const int ix = std::min(static_cast<int>(fx), g.nx() - 2);
  const int iy = std::min(static_cast<int>(fy), g.ny() - 2);
  const double ax = fx - ix;
  const double ay = fy - iy;
  return (1 - ax) * (1 - ay) * f.at({ix, iy}) + ax * (1 - ay) * f.at({ix + 1, iy}) +
         (1 - ax) * ay * f.at({ix, iy + 1}) + ax * ay * f.at({ix + 1, iy + 1});
}

}  // namespace

double density_distance(const ScalarField& a, const ScalarField& b) {
  const bool a_is_ref = a.geometry.spacing() >= b.geometry.spacing();
  const ScalarField& ref = a_is_ref ? a : b;
  const ScalarField& other = a_is_ref ? b : a;
  const Window wr = extent(ref.geometry);
  const Window wo = extent(other.geometry);
  const double slack = 1e-9 * ref.geometry.spacing();
  const Window w{std::max(wr.x0, wo.x0) - slack, std::min(wr.x1, wo.x1) + slack, std::max(wr.y0, wo.y0) - slack,
                 std::min(wr.y1, wo.y1) + slack};
  if (w.x0 >= w.x1 || w.y0 >= w.y1) throw std::invalid_argument("density fields share no physical window");

  const double area_ref = ref.geometry.spacing() * ref.geometry.spacing();
  const double area_other = other.geometry.spacing() * other.geometry.spacing();
  std::vector<double> sa;
  std::vector<double> sb;
  for (std::size_t p = 0; p < ref.geometry.size(); ++p) {
    const Point r = ref.geometry.coordinates(p);
    if (r.x < w.x0 || r.x > w.x1 || r.y < w.y0 || r.y > w.y1) continue;
    sa.push_back(ref.values[p] / area_ref);
    sb.push_back(interpolate(other, r.x, r.y) / area_other);
  }
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    na += sa[i];
    nb += sb[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("density vanishes on the common window");
  double l1 = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) l1 += std::abs(sa[i] / na - sb[i] / nb);
  return l1;
}

double supercritical_margin(double omega, double bigomega) {
  return bigomega > omega ? std::sqrt(bigomega * bigomega - omega * omega) : 0.0;
}

ContainmentReport refinement_scan(const ModelParams& params, std::span<const GridSpec> levels,
                                  const SolverOptions& solver, const Thresholds& thresholds) {
  params.validate();
  solver.validate();
  thresholds.validate();
  if (levels.size() < 2) throw std::invalid_argument("a refinement scan needs at least two levels");

  ContainmentReport report;
  std::vector<ScalarField> densities;
  for (const auto& level : levels) {
    auto [run, rho] = solve_ground(level, params, solver, thresholds.margin);
    report.converged = report.converged && run.solver.converged;
    report.runs.push_back(run);
    densities.push_back(std::move(rho));
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = i + 1; j < levels.size(); ++j) {
      report.energy_sensitivity = std::max(
          report.energy_sensitivity, std::abs(report.runs[i].ground_energy - report.runs[j].ground_energy));
      report.density_sensitivity =
          std::max(report.density_sensitivity, density_distance(densities[i], densities[j]));
    }
  }
  report.supercritical_margin = supercritical_margin(params.omega, params.bigomega);
  const bool walls_clear = std::all_of(report.runs.begin(), report.runs.end(), [&](const GroundRun& r) {
    return r.boundary_mass <= thresholds.boundary;
  });
  const bool stable =
      report.energy_sensitivity <= thresholds.energy && report.density_sensitivity <= thresholds.density;
  report.verdict = (stable && walls_clear) ? Verdict::Contained : Verdict::Escaping;
  return report;
}

namespace {

SweepRow sweep_point(const GridSpec& grid, const ModelParams& base, double bigomega, const SolverOptions& solver,
                     const Thresholds& thresholds) {
  ModelParams p = base;
  p.bigomega = bigomega;
  p.validate();
  SweepRow row;
  row.run = solve_ground(grid, p, solver, thresholds.margin).first;
  row.verdict = row.run.boundary_mass <= thresholds.boundary ? Verdict::Contained : Verdict::Escaping;
  return row;
}

}  // namespace

std::vector<SweepRow> omega_sweep(const GridSpec& grid, const ModelParams& params,
                                  std::span<const double> bigomegas, const SolverOptions& solver,
                                  const Thresholds& thresholds) {
  solver.validate();
  thresholds.validate();
  if (!std::is_sorted(bigomegas.begin(), bigomegas.end())) {
    throw std::invalid_argument("sweep rotation frequencies must be ascending");
  }
  std::vector<SweepRow> rows;
  for (double om : bigomegas) rows.push_back(sweep_point(grid, params, om, solver, thresholds));
  return rows;
}

bool verdicts_monotone(std::span<const SweepRow> rows) {
  bool escaped = false;
  for (const auto& r : rows) {
    if (r.verdict == Verdict::Escaping) escaped = true;
    else if (escaped) return false;
  }
  return true;
}

ThresholdResult escape_threshold(const GridSpec& grid, const ModelParams& params, double lo, double hi, double tol,
                                 const SolverOptions& solver, const Thresholds& thresholds) {
  solver.validate();
  thresholds.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
  if (!(lo >= 0.0) || !(hi > lo)) throw std::invalid_argument("bracket must satisfy 0 <= lo < hi");

  ThresholdResult result;
  auto probe = [&](double om) {
    result.evaluations.push_back(sweep_point(grid, params, om, solver, thresholds));
    return result.evaluations.back().verdict;
  };
  if (probe(lo) != Verdict::Contained) {
    throw std::domain_error("bracket does not straddle the threshold: Omega = " + std::to_string(lo) +
                            " is already escaping");
  }
  if (probe(hi) != Verdict::Escaping) {
    throw std::domain_error("bracket does not straddle the threshold: Omega = " + std::to_string(hi) +
                            " is still contained");
  }
  result.lower = lo;
  result.upper = hi;
  while (result.upper - result.lower > tol) {
    const double mid = 0.5 * (result.lower + result.upper);
    (probe(mid) == Verdict::Contained ? result.lower : result.upper) = mid;
  }
  return result;
}

}  // namespace rotlat
