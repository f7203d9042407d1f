#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rotlat/diagnostics.hpp"

using namespace rotlat;

namespace {

const double kD = 1.0 / std::sqrt(2.0);

SolverOptions ground_solver() {
  SolverOptions o;
  o.n_states = 4;
  return o;
}

ScalarField gaussian(const LatticeGeometry& g, double sigma) {
  std::vector<double> v(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point r = g.coordinates(p);
    v[p] = std::exp(-(r.x * r.x + r.y * r.y) / (2 * sigma * sigma));
  }
  return ScalarField(g, v);
}

}  // namespace

TEST_CASE("thresholds and names") {
  Thresholds t;
  CHECK_NOTHROW(t.validate());
  t.margin = 0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = {};
  t.energy = -1;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  CHECK(to_string(Verdict::Contained) == "contained");
  CHECK(to_string(Verdict::Escaping) == "escaping");
  CHECK(parse_scan_axis("mesh") == ScanAxis::Mesh);
  CHECK(parse_scan_axis("lattice-size") == ScanAxis::LatticeSize);
  CHECK_THROWS_AS(parse_scan_axis("radius"), std::invalid_argument);
}

TEST_CASE("mesh levels keep the physical extent") {
  const std::vector<double> h = {0.5, 0.25, 0.125};
  const auto lv = mesh_levels(40.0, 20.0, h);
  REQUIRE(lv.size() == 3);
  CHECK(lv[0].nx == 81);
  CHECK(lv[0].ny == 41);
  CHECK(lv[2].nx == 321);
  for (const auto& l : lv) CHECK((l.nx - 1) * l.spacing == doctest::Approx(40.0));
  const std::vector<double> bad = {0.0};
  CHECK_THROWS_AS(mesh_levels(40.0, 40.0, bad), std::invalid_argument);
}

TEST_CASE("supercritical margin") {
  CHECK(supercritical_margin(0.1, 0.09) == 0.0);
  CHECK(supercritical_margin(0.1, 0.1) == 0.0);
  CHECK(supercritical_margin(0.1, 0.11) == doctest::Approx(std::sqrt(0.11 * 0.11 - 0.01)));
}

TEST_CASE("density distance") {
  const LatticeGeometry g(31, 31, 0.5);
  const auto a = gaussian(g, 2.0);
  CHECK(density_distance(a, a) == doctest::Approx(0.0).scale(1e-15));

  // The same smooth profile sampled twice as finely is close; a wider one is not.
  const LatticeGeometry fine(61, 61, 0.25);
  const double d_same = density_distance(a, gaussian(fine, 2.0));
  const double d_wide = density_distance(a, gaussian(fine, 3.0));
  CHECK(d_same < 1e-2);
  CHECK(d_wide > 0.2);
  // Symmetric in its arguments: the coarser grid is always the reference.
  CHECK(density_distance(gaussian(fine, 3.0), a) == doctest::Approx(d_wide));

  // Lattice-size comparison: a 41x41 grid contains the 31x31 window.
  const LatticeGeometry big(41, 41, 0.5);
  CHECK(density_distance(a, gaussian(big, 2.0)) == doctest::Approx(0.0).scale(1e-12));
  // Disjoint supports give the maximal distance 2.
  std::vector<double> left(g.size(), 0.0), right(g.size(), 0.0);
  left[g.index({0, 15})] = 1;
  right[g.index({30, 15})] = 1;
  CHECK(density_distance(ScalarField(g, left), ScalarField(g, right)) == doctest::Approx(2.0));
}

TEST_CASE("solve_ground grows the state count until the ground multiplet is resolved") {
  // Free square lattice: ground singleton; with a single requested state it still resolves.
  SolverOptions o;
  o.n_states = 1;
  const auto [run, rho] = solve_ground({20, 20, 1.0}, {ModelKind::Hubbard, 1.0, 0.1, 0.0}, o, 3);
  CHECK(run.ground_degeneracy == 1);
  CHECK(run.solver.converged);
  CHECK(rho.total() == doctest::Approx(1.0));
  CHECK(run.shifted_energy == doctest::Approx(run.ground_energy + 4.0));
}

TEST_CASE("Hubbard at d = h and t = 1/(2h^2) reproduces the discretized continuum") {
  const GridSpec grid{40, 40, kD};
  for (double om : {0.0, 0.09, 0.11}) {
    const auto [hub, rho_h] = solve_ground(grid, {ModelKind::Hubbard, 1.0, 0.1, om}, ground_solver(), 3);
    const auto [con, rho_c] = solve_ground(grid, {ModelKind::Continuum, 1.0, 0.1, om}, ground_solver(), 3);
    CHECK(std::abs(hub.shifted_energy - con.shifted_energy) <= 1e-6);
    CHECK(density_distance(rho_h, rho_c) <= 1e-6);
  }
}

TEST_CASE("lattice-size scan of the rotating lattice is contained") {
  const std::vector<GridSpec> levels = {{100, 100, kD}, {150, 150, kD}};
  const auto rep = refinement_scan({ModelKind::Hubbard, 1.0, 0.1, 0.11}, levels, ground_solver(), Thresholds{});
  CHECK(rep.converged);
  CHECK(rep.verdict == Verdict::Contained);
  CHECK(rep.energy_sensitivity <= 1e-4);
  CHECK(rep.density_sensitivity <= 1e-3);
  CHECK(rep.supercritical_margin == doctest::Approx(std::sqrt(0.11 * 0.11 - 0.01)));
  for (const auto& r : rep.runs) CHECK(r.boundary_mass <= 1e-6);
}

TEST_CASE("mesh scan of the supercritical continuum escapes") {
  const std::vector<double> h = {kD, 0.5, 0.25};
  const auto levels = mesh_levels(40.0, 40.0, h);
  const auto rep = refinement_scan({ModelKind::Continuum, 1.0, 0.1, 0.11}, levels, ground_solver(), Thresholds{});
  CHECK(rep.verdict == Verdict::Escaping);
  REQUIRE(rep.runs.size() == 3);
  CHECK(rep.runs[1].ground_energy < rep.runs[0].ground_energy);
  CHECK(rep.runs[2].ground_energy < rep.runs[1].ground_energy);
  CHECK(rep.runs[2].boundary_mass > 1e-6);
}

TEST_CASE("mesh scan of the subcritical continuum is contained once resolved") {
  const std::vector<double> h = {0.25, 0.125};
  const auto levels = mesh_levels(40.0, 40.0, h);
  const auto rep = refinement_scan({ModelKind::Continuum, 1.0, 0.1, 0.09}, levels, ground_solver(), Thresholds{});
  CHECK(rep.verdict == Verdict::Contained);
  CHECK(rep.supercritical_margin == 0.0);
  CHECK(rep.energy_sensitivity <= 1e-4);
  CHECK(rep.density_sensitivity <= 1e-3);
}

TEST_CASE("coarse meshes miss the density tolerance even below the critical rotation") {
  // Discretization error at h = 0.5 alone exceeds the thresholds; this records
  // why the contained scan above starts at h = 0.25.
  const std::vector<double> h = {0.5, 0.25};
  const auto levels = mesh_levels(40.0, 40.0, h);
  const auto rep = refinement_scan({ModelKind::Continuum, 1.0, 0.1, 0.09}, levels, ground_solver(), Thresholds{});
  CHECK(rep.energy_sensitivity > 1e-4);
  CHECK(rep.verdict == Verdict::Escaping);
  for (const auto& r : rep.runs) CHECK(r.boundary_mass <= 1e-12);
}

TEST_CASE("refinement scan needs two levels") {
  const std::vector<GridSpec> one = {{20, 20, kD}};
  CHECK_THROWS_AS(refinement_scan({}, one, ground_solver(), Thresholds{}), std::invalid_argument);
}

TEST_CASE("Omega sweep without rotation matches dense diagonalization") {
  const GridSpec grid{12, 12, kD};
  const ModelParams p{ModelKind::Hubbard, 1.0, 0.3, 0.0};
  const std::vector<double> oms = {0.0, 0.05, 0.1};
  const auto rows = omega_sweep(grid, p, oms, ground_solver(), Thresholds{});
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ref = oracle::dense_eigenvalues(oracle::hubbard_dense(oracle::Grid(12, 12, kD), 1.0, 0.3, oms[i]));
    CHECK(rows[i].run.ground_energy == doctest::Approx(ref[0]).epsilon(1e-10));
    CHECK(rows[i].run.bigomega == oms[i]);
  }
  const std::vector<double> descending = {0.1, 0.05};
  CHECK_THROWS_AS(omega_sweep(grid, p, descending, ground_solver(), Thresholds{}), std::invalid_argument);
}

TEST_CASE("boundary-mass verdicts are monotone across an Omega sweep") {
  const GridSpec grid{60, 60, kD};
  const std::vector<double> oms = {0.05, 0.09, 0.1, 0.11, 0.13, 0.2, 0.3};
  const auto rows = omega_sweep(grid, {ModelKind::Hubbard, 1.0, 0.1, 0.0}, oms, ground_solver(), Thresholds{});
  CHECK(verdicts_monotone(rows));
  CHECK(rows.front().verdict == Verdict::Contained);
  CHECK(rows.back().verdict == Verdict::Escaping);

  std::vector<SweepRow> broken(2);
  broken[0].verdict = Verdict::Escaping;
  broken[1].verdict = Verdict::Contained;
  CHECK_FALSE(verdicts_monotone(broken));
}

TEST_CASE("escape threshold grows with the lattice") {
  const ModelParams p{ModelKind::Hubbard, 1.0, 0.1, 0.0};
  const auto small = escape_threshold({60, 60, kD}, p, 0.1, 0.5, 0.005, ground_solver(), Thresholds{});
  CHECK(small.upper - small.lower <= 0.005);
  CHECK(small.lower >= 0.1);
  CHECK(small.estimate() < 0.15);
  const auto big = escape_threshold({150, 150, kD}, p, 0.1, 0.5, 0.005, ground_solver(), Thresholds{});
  CHECK(big.estimate() > 0.11);
  CHECK(big.estimate() >= small.estimate());
  for (const auto& e : big.evaluations) {
    CHECK(e.verdict == (e.run.bigomega <= big.lower ? Verdict::Contained : Verdict::Escaping));
  }
}

TEST_CASE("escape threshold of the continuum sits just above the trap frequency") {
  const auto levels = mesh_levels(40.0, 40.0, std::vector<double>{0.25});
  const auto r = escape_threshold(levels[0], {ModelKind::Continuum, 1.0, 0.1, 0.0}, 0.05, 0.2, 0.002,
                                  ground_solver(), Thresholds{});
  CHECK(r.estimate() >= 0.1);
  CHECK(r.estimate() <= 0.1 + 0.002);
}

TEST_CASE("escape threshold rejects brackets that do not straddle") {
  const ModelParams p{ModelKind::Hubbard, 1.0, 0.1, 0.0};
  const GridSpec grid{40, 40, kD};
  CHECK_THROWS_AS(escape_threshold(grid, p, 0.3, 0.5, 0.01, ground_solver(), Thresholds{}), std::domain_error);
  CHECK_THROWS_AS(escape_threshold(grid, p, 0.01, 0.02, 0.01, ground_solver(), Thresholds{}), std::domain_error);
  CHECK_THROWS_AS(escape_threshold(grid, p, 0.2, 0.1, 0.01, ground_solver(), Thresholds{}), std::invalid_argument);
}

TEST_CASE("repeated scans give identical numbers") {
  const std::vector<GridSpec> levels = {{30, 30, kD}, {40, 40, kD}};
  const ModelParams p{ModelKind::Hubbard, 1.0, 0.1, 0.11};
  const auto a = refinement_scan(p, levels, ground_solver(), Thresholds{});
  const auto b = refinement_scan(p, levels, ground_solver(), Thresholds{});
  CHECK(a.energy_sensitivity == b.energy_sensitivity);
  CHECK(a.density_sensitivity == b.density_sensitivity);
  CHECK(a.runs[1].ground_energy == b.runs[1].ground_energy);
}
