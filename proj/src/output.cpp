#include "rotlat/output.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rotlat {

namespace {

// Restores the stream's formatting on scope exit.
class PreciseStream {
 public:
  explicit PreciseStream(std::ostream& os) : os_(os), flags_(os.flags()), precision_(os.precision()) {
    os_.imbue(std::locale::classic());
    os_ << std::setprecision(17);
    os_.unsetf(std::ios::floatfield);
  }
  ~PreciseStream() {
    os_.flags(flags_);
    os_.precision(precision_);
  }
  PreciseStream(const PreciseStream&) = delete;
  PreciseStream& operator=(const PreciseStream&) = delete;

 private:
  std::ostream& os_;
  std::ios::fmtflags flags_;
  std::streamsize precision_;
};

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string output_stem(std::string_view command, ModelKind model, int nx, int ny, double omega, double bigomega) {
  std::ostringstream os;
  os << command << '_' << to_string(model) << "_nx" << nx << "_ny" << ny << "_om" << fixed4(omega) << "_Om"
     << fixed4(bigomega);
  return os.str();
}

void write_scalar_field_csv(std::ostream& os, const ScalarField& field) {
  PreciseStream guard(os);
  os << "ix,iy,x,y,value\n";
  const auto& g = field.geometry;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Site s = g.site(p);
    const Point r = g.coordinates(s);
    os << s.ix << ',' << s.iy << ',' << r.x << ',' << r.y << ',' << field.values[p] << '\n';
  }
}

void write_bond_field_csv(std::ostream& os, const BondField& field) {
  PreciseStream guard(os);
  os << "ix,iy,direction,x_mid,y_mid,value\n";
  const auto& g = field.geometry;
  for (std::size_t b = 0; b < field.bonds.size(); ++b) {
    const Bond& bond = field.bonds[b];
    const Site s = g.site(bond.from);
    const Point a = g.coordinates(bond.from);
    const Point c = g.coordinates(bond.to);
    os << s.ix << ',' << s.iy << ',' << (bond.direction == BondDirection::PlusX ? "+x" : "+y") << ','
       << 0.5 * (a.x + c.x) << ',' << 0.5 * (a.y + c.y) << ',' << field.values[b] << '\n';
  }
}

void write_site_currents_csv(std::ostream& os, const BondField& field) {
  PreciseStream guard(os);
  const auto vectors = site_current_vectors(field);
  const auto outflow = net_outflow(field);
  const auto& g = field.geometry;
  os << "ix,iy,x,y,jx,jy,net_outflow\n";
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Site s = g.site(p);
    const Point r = g.coordinates(s);
    os << s.ix << ',' << s.iy << ',' << r.x << ',' << r.y << ',' << vectors[p][0] << ',' << vectors[p][1] << ','
       << outflow[p] << '\n';
  }
}

void write_profile_csv(std::ostream& os, const Profile& profile) {
  PreciseStream guard(os);
  os << "coordinate,value\n";
  for (std::size_t i = 0; i < profile.values.size(); ++i) {
    os << profile.coordinate[i] << ',' << profile.values[i] << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const EigenSolution& solution, double shift,
                        std::span<const AnalyticLevel> analytic) {
  PreciseStream guard(os);
  const bool labels = !analytic.empty();
  os << "index,energy,shifted_energy,residual,multiplet";
  if (labels) os << ",j,k,analytic_energy";
  os << '\n';
  for (std::size_t i = 0; i < solution.size(); ++i) {
    std::size_t cluster = 0;
    while (!solution.multiplets[cluster].contains(i)) ++cluster;
    os << i << ',' << solution.eigenvalues[i] << ',' << solution.eigenvalues[i] + shift << ','
       << solution.residuals[i] << ',' << cluster;
    if (labels) {
      if (i < analytic.size()) {
        os << ',' << analytic[i].j << ',' << analytic[i].k << ',' << analytic[i].energy;
      } else {
        os << ",,,";
      }
    }
    os << '\n';
  }
}

namespace {

void write_run_cells(std::ostream& os, const GroundRun& r) {
  os << r.grid.nx << ',' << r.grid.ny << ',' << r.grid.spacing << ',' << r.bigomega << ',' << r.ground_energy << ','
     << r.shifted_energy << ',' << r.boundary_mass << ',' << r.ground_degeneracy << ','
     << (r.solver.converged ? "true" : "false") << ',' << r.solver.max_residual << ',' << r.solver.matvecs;
}

constexpr const char* kRunHeader =
    "nx,ny,spacing,bigomega,ground_energy,shifted_energy,boundary_mass,ground_degeneracy,converged,max_residual,"
    "matvecs";

}  // namespace

void write_runs_csv(std::ostream& os, std::span<const GroundRun> runs) {
  PreciseStream guard(os);
  os << kRunHeader << '\n';
  for (const auto& r : runs) {
    write_run_cells(os, r);
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  PreciseStream guard(os);
  os << kRunHeader << ",verdict\n";
  for (const auto& row : rows) {
    write_run_cells(os, row.run);
    os << ',' << to_string(row.verdict) << '\n';
  }
}

nlohmann::json to_json(const SolverDiagnostics& d) {
  return {{"method", d.method},
          {"restarts", d.restarts},
          {"block_steps", d.block_steps},
          {"matvecs", d.matvecs},
          {"max_residual", d.max_residual},
          {"residual_bound", d.residual_bound},
          {"converged", d.converged}};
}

nlohmann::json to_json(const ModelParams& p) {
  return {{"model", std::string(to_string(p.kind))}, {"t", p.t}, {"omega", p.omega}, {"bigomega", p.bigomega}};
}

nlohmann::json to_json(const SolverOptions& o) {
  return {{"method", std::string(to_string(o.method))},
          {"n_states", o.n_states},
          {"tol", o.tol},
          {"seed", o.seed},
          {"block_size", o.block_size},
          {"max_basis", o.max_basis},
          {"max_restarts", o.max_restarts},
          {"max_filter_degree", o.max_filter_degree},
          {"cluster_tol", o.cluster_tol}};
}

nlohmann::json to_json(const Thresholds& t) {
  return {{"energy", t.energy}, {"density", t.density}, {"boundary", t.boundary}, {"margin", t.margin}};
}

nlohmann::json to_json(const GroundRun& r) {
  return {{"nx", r.grid.nx},
          {"ny", r.grid.ny},
          {"spacing", r.grid.spacing},
          {"bigomega", r.bigomega},
          {"ground_energy", r.ground_energy},
          {"shifted_energy", r.shifted_energy},
          {"boundary_mass", r.boundary_mass},
          {"ground_degeneracy", r.ground_degeneracy},
          {"solver", to_json(r.solver)}};
}

nlohmann::json to_json(const ContainmentReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) runs.push_back(to_json(run));
  return {{"runs", runs},
          {"energy_sensitivity", r.energy_sensitivity},
          {"density_sensitivity", r.density_sensitivity},
          {"supercritical_margin", r.supercritical_margin},
          {"verdict", std::string(to_string(r.verdict))},
          {"converged", r.converged}};
}

nlohmann::json to_json(const ThresholdResult& r) {
  nlohmann::json evals = nlohmann::json::array();
  for (const auto& row : r.evaluations) {
    auto j = to_json(row.run);
    j["verdict"] = std::string(to_string(row.verdict));
    evals.push_back(j);
  }
  return {{"lower", r.lower}, {"upper", r.upper}, {"estimate", r.estimate()}, {"evaluations", evals}};
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no column named '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::string& cell = rows.at(row).at(column(name));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size() || cell.empty()) {
    throw std::invalid_argument("row " + std::to_string(row + 1) + ", column '" + std::string(name) +
                                "': not a number: '" + cell + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line) || line.empty()) throw std::invalid_argument("CSV input is empty (no header row)");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace rotlat
