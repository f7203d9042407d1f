#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "oracles.hpp"
#include "rotlat/eigensolver.hpp"
#include "rotlat/hamiltonian.hpp"

using namespace rotlat;

namespace {

const double kD = 1.0 / std::sqrt(2.0);

ModelParams hubbard(double w, double om, double t = 1.0) { return {ModelKind::Hubbard, t, w, om}; }
ModelParams continuum(double w, double om) { return {ModelKind::Continuum, 1.0, w, om}; }

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("model names parse and round trip") {
  CHECK(parse_model_kind("hubbard") == ModelKind::Hubbard);
  CHECK(parse_model_kind("continuum") == ModelKind::Continuum);
  CHECK(parse_model_kind("discretized-continuum") == ModelKind::Continuum);
  CHECK(parse_model_kind(to_string(ModelKind::Continuum)) == ModelKind::Continuum);
  CHECK_THROWS_AS(parse_model_kind("bogus"), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(hubbard(0.1, 0.11).validate());
  CHECK_THROWS_AS(hubbard(0.1, -0.01).validate(), std::invalid_argument);
  CHECK_THROWS_AS(hubbard(-0.1, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(hubbard(0.1, 0.0, 0.0).validate(), std::invalid_argument);
}

TEST_CASE("Hubbard builder matches the independent dense construction") {
  for (double om : {0.0, 0.05, 0.11, 0.3}) {
    const LatticeGeometry g(7, 6, kD);
    const auto h = build_hubbard(g, hubbard(0.1, om, 1.3));
    const auto ref = oracle::hubbard_dense(oracle::Grid(7, 6, kD), 1.3, 0.1, om);
    CHECK(max_diff(h.to_dense(), ref) < 1e-14);
  }
}

TEST_CASE("continuum builder matches the independent dense construction") {
  for (double h : {0.25, 0.5, 0.9}) {
    const LatticeGeometry g(6, 8, h);
    const auto m = build_discretized_continuum(g, continuum(0.1, 0.09));
    const auto ref = oracle::continuum_dense(oracle::Grid(6, 8, h), 0.1, 0.09);
    CHECK(max_diff(m.to_dense(), ref) < 1e-12 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("2x2 free lattice has eigenvalues -2, 0, 0, 2") {
  const LatticeGeometry g(2, 2, 1.0);
  const auto sol = dense_oracle(build_hubbard(g, hubbard(0.0, 0.0)));
  REQUIRE(sol.size() == 4);
  CHECK(sol.eigenvalues[0] == doctest::Approx(-2.0));
  CHECK(std::abs(sol.eigenvalues[1]) < 1e-14);
  CHECK(std::abs(sol.eigenvalues[2]) < 1e-14);
  CHECK(sol.eigenvalues[3] == doctest::Approx(2.0));
}

TEST_CASE("free lattice spectrum matches the separable cosine formula") {
  const LatticeGeometry g(6, 5, 0.4);
  const auto sol = dense_oracle(build_hubbard(g, hubbard(0.0, 0.0, 0.7)));
  const auto ref = oracle::free_lattice_spectrum(6, 5, 0.7);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(sol.eigenvalues[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("Hermiticity, real diagonal and sparsity on random configurations") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = size(rng), ny = size(rng);
    const LatticeGeometry g(nx, ny, 0.2 + unit(rng), Point{unit(rng) * nx * 0.3, unit(rng) * ny * 0.3});
    const ModelParams p{trial % 2 ? ModelKind::Hubbard : ModelKind::Continuum, 0.5 + unit(rng), 0.2 * unit(rng),
                        0.3 * unit(rng)};
    const auto h = build_hamiltonian(g, p);
    CHECK(h.hermiticity_defect() <= 1e-14 * h.max_abs_entry());
    for (std::size_t r = 0; r < h.dimension(); ++r) {
      CHECK(h.entry(r, r).imag() == 0.0);
      CHECK(h.row_nonzeros(r) <= 5);
      const Site s = g.site(r);
      const bool interior = s.ix > 0 && s.iy > 0 && s.ix < nx - 1 && s.iy < ny - 1;
      if (interior) CHECK(h.row_nonzeros(r) == 5);
    }
  }
}

TEST_CASE("Hermiticity at the working point Omega = 0.11") {
  const LatticeGeometry g(30, 30, kD);
  const auto h = build_hubbard(g, hubbard(0.1, 0.11));
  CHECK(h.hermiticity_defect() <= 1e-14 * h.max_abs_entry());
  CHECK_FALSE(h.is_real());
}

TEST_CASE("without rotation both models are real symmetric") {
  const LatticeGeometry g(10, 10, 0.5);
  CHECK(build_discretized_continuum(g, continuum(0.1, 0.0)).is_real());
  CHECK(build_hubbard(g, hubbard(0.1, 0.0)).is_real());
  const auto dense = build_discretized_continuum(g, continuum(0.1, 0.0)).to_dense();
  CHECK(max_diff(dense, dense.transpose()) == 0.0);
}

TEST_CASE("lattice at t = 1, d = 1/sqrt2 equals the continuum at h = d minus 4t") {
  for (double om : {0.0, 0.09, 0.11, 0.5}) {
    const LatticeGeometry g(12, 9, kD);
    const auto a = build_hubbard(g, hubbard(0.1, om)).to_dense();
    const auto b = build_discretized_continuum(g, continuum(0.1, om)).to_dense();
    const Eigen::MatrixXcd diff = b - a - 4.0 * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    CHECK(diff.cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("equivalence holds for any h with t = 1 / (2 h^2)") {
  for (double h : {0.3, 0.5, 1.1}) {
    const double t = 1.0 / (2 * h * h);
    const LatticeGeometry g(8, 8, h);
    const auto a = build_hubbard(g, hubbard(0.1, 0.11, t)).to_dense();
    const auto b = build_discretized_continuum(g, continuum(0.1, 0.11)).to_dense();
    const Eigen::MatrixXcd diff = b - a - 4 * t * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    CHECK(diff.cwiseAbs().maxCoeff() <= 1e-13 * t);
  }
}

TEST_CASE("non-rotating lattice spectrum lies in [-4t, 4t + max V]") {
  const LatticeGeometry g(14, 14, kD);
  const ModelParams p = hubbard(0.1, 0.0);
  const auto sol = dense_oracle(build_hubbard(g, p));
  double vmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) vmax = std::max(vmax, trap_potential(0.1, std::pow(g.radius(i), 2)));
  CHECK(sol.eigenvalues.front() >= -4.0);
  CHECK(sol.eigenvalues.back() <= 4.0 + vmax);
}

TEST_CASE("Hamiltonian commutes with the quarter-turn permutation") {
  for (auto kind : {ModelKind::Hubbard, ModelKind::Continuum}) {
    for (int n : {6, 7}) {
      const LatticeGeometry g(n, n, 0.6);
      const auto h = build_hamiltonian(g, {kind, 1.0, 0.1, 0.13}).to_dense();
      Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
      for (std::size_t p = 0; p < g.size(); ++p) r(static_cast<Eigen::Index>(*g.quarter_turn(p)), static_cast<Eigen::Index>(p)) = 1.0;
      const double norm1 = h.cwiseAbs().colwise().sum().maxCoeff();
      CHECK((h * r - r * h).cwiseAbs().maxCoeff() <= 1e-12 * norm1);
    }
  }
}

TEST_CASE("hopping equals the stored off-diagonal entry") {
  const LatticeGeometry g(5, 4, kD);
  for (auto kind : {ModelKind::Hubbard, ModelKind::Continuum}) {
    const ModelParams p{kind, 1.0, 0.1, 0.2};
    const auto h = build_hamiltonian(g, p);
    for (const auto& b : g.bonds()) {
      CHECK(std::abs(hopping(g, p, b.from, b.to) - h.entry(b.from, b.to)) < 1e-15);
      CHECK(std::abs(hopping(g, p, b.to, b.from) - h.entry(b.to, b.from)) < 1e-15);
    }
  }
  CHECK_THROWS_AS(hopping(g, hubbard(0.1, 0.1), 0, 2), std::invalid_argument);
}

TEST_CASE("matrix-vector products agree with the dense matrix") {
  const LatticeGeometry g(9, 7, 0.5);
  const auto h = build_hamiltonian(g, hubbard(0.1, 0.2));
  const auto dense = h.to_dense();
  const Eigen::MatrixXcd x = Eigen::MatrixXcd::Random(static_cast<Eigen::Index>(g.size()), 5);
  Eigen::MatrixXcd y;
  h.apply(x, y);
  CHECK((y - dense * x).cwiseAbs().maxCoeff() < 1e-13);

  SparseHermitianMatrix::RowBlock xr = x, z = Eigen::MatrixXcd::Random(x.rows(), x.cols()), out;
  h.apply_affine(xr, out, 0.3, 1.7, &z, -0.4);
  const Eigen::MatrixXcd expect = 1.7 * (dense * x - 0.3 * x) - 0.4 * Eigen::MatrixXcd(z);
  CHECK((Eigen::MatrixXcd(out) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gershgorin bounds enclose the spectrum; norm1 is the max column sum") {
  const LatticeGeometry g(8, 8, 0.5);
  const auto h = build_hamiltonian(g, continuum(0.1, 0.11));
  const auto sol = dense_oracle(h);
  const auto [lo, hi] = h.gershgorin_bounds();
  CHECK(lo <= sol.eigenvalues.front());
  CHECK(hi >= sol.eigenvalues.back());
  CHECK(h.norm1() == doctest::Approx(h.to_dense().cwiseAbs().colwise().sum().maxCoeff()));
}

TEST_CASE("triplet dump") {
  const LatticeGeometry g(2, 2, 1.0);
  const auto h = build_hubbard(g, hubbard(0.1, 0.2));
  std::ostringstream os;
  h.write_triplets_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "row,col,re,im");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == static_cast<int>(h.nonzeros()));
  CHECK(h.nonzeros() == 4 + 8);
}

TEST_CASE("analytic spectrum") {
  CHECK(analytic_spectrum(0.1, 0.09, 0, 0) == doctest::Approx(0.1));
  CHECK(analytic_spectrum(0.1, 0.09, 1, 0) == doctest::Approx(0.11));
  CHECK(analytic_spectrum(0.1, 0.09, 0, 1) == doctest::Approx(0.29));
  for (int j = 0; j < 50; j += 7) CHECK(analytic_spectrum(0.1, 0.1, j, 0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(analytic_spectrum(0.1, 0.11, 0, 0), std::domain_error);
  CHECK_THROWS_AS(analytic_spectrum(0.1, 0.05, -1, 0), std::invalid_argument);
}

TEST_CASE("lowest analytic levels are sorted and complete") {
  const auto levels = analytic_lowest(0.1, 0.09, 25);
  REQUIRE(levels.size() == 25);
  for (std::size_t i = 1; i < levels.size(); ++i) CHECK(levels[i].energy >= levels[i - 1].energy);
  // Brute-force enumeration of every level below the 25th.
  int below = 0;
  for (int j = 0; j < 100; ++j) {
    for (int k = 0; k < 100; ++k) below += oracle::level(0.1, 0.09, j, k) < levels.back().energy - 1e-12;
  }
  CHECK(below <= 24);
  CHECK(levels[0].j == 0);
  CHECK(levels[5].j == 5);
  CHECK(levels[5].energy == doctest::Approx(0.15));
}

TEST_CASE("effective mass") {
  CHECK(effective_mass(1.0, kD, 0.0) == doctest::Approx(1.0));
  CHECK(effective_mass(1.0, kD, std::numbers::pi / kD) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(effective_mass(1.0, kD, std::numbers::pi / (2 * kD)), std::domain_error);
  CHECK_THROWS_AS(effective_mass(0.0, kD, 0.0), std::invalid_argument);
}

TEST_CASE("trap potential uses the trap frequency") {
  CHECK(trap_potential(0.1, 4.0) == doctest::Approx(0.02));
  const LatticeGeometry g(3, 3, 1.0);
  const auto h = build_hubbard(g, hubbard(0.1, 0.5));
  // Corner site at r^2 = 2: V = 0.01, independent of Omega.
  CHECK(h.entry(0, 0).real() == doctest::Approx(0.01));
  CHECK(band_bottom_shift(hubbard(0.1, 0.0, 1.5)) == 6.0);
  CHECK(band_bottom_shift(continuum(0.1, 0.0)) == 0.0);
}
