#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "rotlat/diagnostics.hpp"
#include "rotlat/eigensolver.hpp"
#include "rotlat/hamiltonian.hpp"

namespace rotlat::cli {

/// Everything a run needs, after flags and config file are merged.
struct RunConfig {
  std::string command;
  ModelParams params;
  int nx = 0;  // 0: derive from extent or the model default
  int ny = 0;
  double spacing = 0.7071067811865476;
  double extent = 0.0;  // physical side length; 0 when unset
  SolverOptions solver;
  bool n_states_set = false;
  std::size_t n_fermions = 0;
  Thresholds thresholds;
  std::filesystem::path out = "out";

  // density / currents
  std::size_t state = 0;
  bool members = false;
  bool average = false;

  // contain / sweep
  std::string mode = "scan";
  ScanAxis axis = ScanAxis::Mesh;
  std::vector<std::string> levels;
  std::vector<double> bigomegas;
  double bracket_lo = 0.1;
  double bracket_hi = 0.5;
  double bisect_tol = 1e-3;

  /// Fills derived fields (grid size, state count) and validates everything.
  /// Throws std::invalid_argument naming the offending field.
  void resolve();
  GridSpec grid() const { return {nx, ny, spacing}; }
  std::vector<GridSpec> scan_levels() const;
  nlohmann::json to_json() const;
};

/// Reads a key=value or JSON config file into "--key=value" arguments.
std::vector<std::string> config_arguments(const std::filesystem::path& path);

/// Entry point; returns the process exit code. 0 means every solve converged.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rotlat::cli
