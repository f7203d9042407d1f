#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rotlat/output.hpp"

using namespace rotlat;

namespace {

CsvTable round_trip(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}

}  // namespace

TEST_CASE("output stem encodes the run") {
  CHECK(output_stem("density", ModelKind::Hubbard, 150, 150, 0.1, 0.11) == "density_hubbard_nx150_ny150_om0.1000_Om0.1100");
  CHECK(output_stem("spectrum", ModelKind::Continuum, 81, 41, 0.1, 0.0) ==
        "spectrum_continuum_nx81_ny41_om0.1000_Om0.0000");
}

TEST_CASE("scalar field CSV round trip keeps full precision") {
  const LatticeGeometry g(3, 2, 0.7);
  std::vector<double> v = {1.0 / 3.0, std::sqrt(2.0), 1e-300, 0.0, -2.5, 123456.789};
  std::ostringstream os;
  write_scalar_field_csv(os, ScalarField(g, v));
  const auto t = round_trip(os.str());
  CHECK(t.header == std::vector<std::string>{"ix", "iy", "x", "y", "value"});
  REQUIRE(t.rows.size() == 6);
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(t.number(r, "value") == v[r]);
    const Site s{static_cast<int>(t.number(r, "ix")), static_cast<int>(t.number(r, "iy"))};
    CHECK(g.index(s) == r);
    CHECK(t.number(r, "x") == g.coordinates(s).x);
  }
}

TEST_CASE("bond and site current CSVs") {
  const LatticeGeometry g(3, 3, 1.0);
  std::vector<double> v(g.bond_count());
  for (std::size_t b = 0; b < v.size(); ++b) v[b] = 0.1 * static_cast<double>(b);
  const BondField f(g, v);

  std::ostringstream bonds;
  write_bond_field_csv(bonds, f);
  const auto tb = round_trip(bonds.str());
  CHECK(tb.header == std::vector<std::string>{"ix", "iy", "direction", "x_mid", "y_mid", "value"});
  REQUIRE(tb.rows.size() == g.bond_count());
  CHECK(tb.rows[0][tb.column("direction")] == "+x");
  CHECK(tb.number(0, "x_mid") == -0.5);
  std::size_t plus_y = 0;
  for (const auto& row : tb.rows) plus_y += row[2] == "+y";
  CHECK(plus_y == 6);

  std::ostringstream sites;
  write_site_currents_csv(sites, f);
  const auto ts = round_trip(sites.str());
  CHECK(ts.header == std::vector<std::string>{"ix", "iy", "x", "y", "jx", "jy", "net_outflow"});
  CHECK(ts.rows.size() == g.size());
  const auto out = net_outflow(f);
  for (std::size_t r = 0; r < ts.rows.size(); ++r) CHECK(ts.number(r, "net_outflow") == out[r]);
}

TEST_CASE("profile CSV") {
  std::ostringstream os;
  write_profile_csv(os, Profile{{-1.0, 0.0, 1.0}, {0.2, 0.5, 0.2}});
  const auto t = round_trip(os.str());
  CHECK(t.header == std::vector<std::string>{"coordinate", "value"});
  CHECK(t.number(1, "value") == 0.5);
}

TEST_CASE("spectrum CSV with and without analytic columns") {
  EigenSolution s;
  s.eigenvalues = {-3.9, -3.8, -3.8};
  s.residuals = {1e-12, 2e-12, 3e-12};
  s.eigenvectors = Eigen::MatrixXcd::Identity(4, 3);
  s.multiplets = cluster_multiplets(s.eigenvalues, 1e-6);

  std::ostringstream plain;
  write_spectrum_csv(plain, s, 4.0, {});
  const auto t = round_trip(plain.str());
  CHECK(t.header == std::vector<std::string>{"index", "energy", "shifted_energy", "residual", "multiplet"});
  CHECK(t.number(0, "shifted_energy") == doctest::Approx(0.1));
  CHECK(t.number(2, "multiplet") == 1);

  const auto levels = analytic_lowest(0.1, 0.09, 3);
  std::ostringstream with;
  write_spectrum_csv(with, s, 0.0, levels);
  const auto ta = round_trip(with.str());
  CHECK(ta.header.size() == 8);
  CHECK(ta.number(0, "analytic_energy") == doctest::Approx(0.1));
  CHECK(ta.number(0, "j") == 0);
}

TEST_CASE("runs and sweep CSVs") {
  GroundRun r;
  r.grid = {10, 12, 0.5};
  r.bigomega = 0.11;
  r.ground_energy = -3.9;
  r.shifted_energy = 0.1;
  r.boundary_mass = 1e-20;
  r.ground_degeneracy = 1;
  r.solver.converged = true;
  r.solver.matvecs = 42;
  std::ostringstream os;
  write_runs_csv(os, std::span<const GroundRun>(&r, 1));
  const auto t = round_trip(os.str());
  CHECK(t.header.front() == "nx");
  CHECK(t.number(0, "ny") == 12);
  CHECK(t.number(0, "boundary_mass") == 1e-20);
  CHECK(t.number(0, "matvecs") == 42);

  const SweepRow row{r, Verdict::Contained};
  std::ostringstream sw;
  write_sweep_csv(sw, std::span<const SweepRow>(&row, 1));
  const auto ts = round_trip(sw.str());
  CHECK(ts.header.back() == "verdict");
  CHECK(ts.rows[0].back() == "contained");
}

TEST_CASE("JSON summaries") {
  ContainmentReport rep;
  rep.runs.resize(2);
  rep.energy_sensitivity = 3e-15;
  rep.verdict = Verdict::Contained;
  const auto j = to_json(rep);
  CHECK(j.at("verdict") == "contained");
  CHECK(j.at("runs").size() == 2);
  CHECK(j.at("energy_sensitivity").get<double>() == 3e-15);
  // Survives a text round trip.
  CHECK(nlohmann::json::parse(j.dump()) == j);

  const auto p = to_json(ModelParams{ModelKind::Continuum, 1.0, 0.1, 0.09});
  CHECK(p.at("model") == "continuum");
  CHECK(p.at("bigomega").get<double>() == 0.09);

  ThresholdResult tr;
  tr.lower = 0.1;
  tr.upper = 0.11;
  CHECK(to_json(tr).at("estimate").get<double>() == doctest::Approx(0.105));
}

TEST_CASE("CSV reader rejects malformed input") {
  CHECK_THROWS_AS(round_trip(""), std::invalid_argument);
  try {
    round_trip("a,b\n1,2\n3\n");
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const auto t = round_trip("a,b\n1,x\n");
  CHECK_THROWS_AS(t.column("c"), std::out_of_range);
  CHECK_THROWS_AS(t.number(0, "b"), std::invalid_argument);
}

TEST_CASE("write_file creates parent directories") {
  const auto dir = std::filesystem::temp_directory_path() / "rotlat_output_test";
  std::filesystem::remove_all(dir);
  write_file(dir / "a" / "b.txt", "hello\n");
  std::ifstream is(dir / "a" / "b.txt");
  std::string line;
  std::getline(is, line);
  CHECK(line == "hello");
  std::filesystem::remove_all(dir);
}
