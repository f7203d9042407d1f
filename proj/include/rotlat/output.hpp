#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rotlat/diagnostics.hpp"
#include "rotlat/eigensolver.hpp"
#include "rotlat/hamiltonian.hpp"
#include "rotlat/observables.hpp"

namespace rotlat {

/// `<command>_<model>_nx<nx>_ny<ny>_om<omega>_Om<bigomega>` with frequencies
/// in fixed point, four decimals.
std::string output_stem(std::string_view command, ModelKind model, int nx, int ny, double omega, double bigomega);

// CSV writers. All use '.' decimals, ',' separators, a header row, and 17
// significant digits so values survive a round trip.

/// ix,iy,x,y,value
void write_scalar_field_csv(std::ostream& os, const ScalarField& field);
/// ix,iy,direction,x_mid,y_mid,value with direction "+x" or "+y"; (ix, iy)
/// is the bond's lower-left site.
void write_bond_field_csv(std::ostream& os, const BondField& field);
/// ix,iy,x,y,jx,jy,net_outflow
void write_site_currents_csv(std::ostream& os, const BondField& field);
/// coordinate,value
void write_profile_csv(std::ostream& os, const Profile& profile);
/// index,energy,shifted_energy,residual,multiplet; with `analytic` non-empty
/// also j,k,analytic_energy paired by energy order.
void write_spectrum_csv(std::ostream& os, const EigenSolution& solution, double shift,
                        std::span<const AnalyticLevel> analytic);
/// One row per run: nx,ny,spacing,bigomega,ground_energy,shifted_energy,
/// boundary_mass,ground_degeneracy,converged,max_residual,matvecs, then
/// verdict when the rows come from a sweep.
void write_runs_csv(std::ostream& os, std::span<const GroundRun> runs);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

nlohmann::json to_json(const SolverDiagnostics& d);
nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const SolverOptions& o);
nlohmann::json to_json(const Thresholds& t);
nlohmann::json to_json(const GroundRun& r);
nlohmann::json to_json(const ContainmentReport& r);
nlohmann::json to_json(const ThresholdResult& r);

/// Parsed CSV: header names and string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

/// Strict reader for the files written above: every row must have as many
/// cells as the header. Errors name the offending line.
CsvTable read_csv(std::istream& is);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace rotlat
