#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "rotlat/observables.hpp"
#include "rotlat/output.hpp"

namespace rotlat::cli {

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitUnconverged = 3;
constexpr int kExitFailure = 1;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(s);
  while (std::getline(is, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t"));
    cell.erase(cell.find_last_not_of(" \t") + 1);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument(field + ": '" + s + "' is not a finite number");
  }
  return v;
}

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

}  // namespace

std::vector<std::string> config_arguments(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot read '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::vector<std::string> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      std::string v;
      if (value.is_string()) {
        v = value.get<std::string>();
      } else if (value.is_array()) {
        for (const auto& item : value) {
          if (!v.empty()) v += ',';
          v += item.is_string() ? item.get<std::string>() : item.dump();
        }
      } else {
        v = value.dump();
      }
      out.push_back("--" + normalize_key(key) + "=" + v);
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key=value");
    }
    out.push_back("--" + normalize_key(trim(line.substr(0, eq))) + "=" + trim(line.substr(eq + 1)));
  }
  return out;
}

void RunConfig::resolve() {
  params.validate();
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw std::invalid_argument("spacing must be positive");
  if (extent < 0.0) throw std::invalid_argument("extent must be non-negative");
  if (nx < 0 || ny < 0) throw std::invalid_argument("nx and ny must be positive");
  if (nx == 0) {
    if (extent > 0.0) {
      nx = static_cast<int>(std::lround(extent / spacing)) + 1;
    } else {
      // 150 sites for the lattice; a physical side of 40 for the continuum.
      nx = params.kind == ModelKind::Hubbard ? 150 : static_cast<int>(std::lround(40.0 / spacing)) + 1;
    }
  }
  if (ny == 0) ny = nx;
  if (nx < 2) throw std::invalid_argument("nx must be >= 2");
  if (ny < 2) throw std::invalid_argument("ny must be >= 2");

  if (command == "fermions" && n_fermions == 0) throw std::invalid_argument("n-fermions must be >= 1");
  if (!n_states_set) solver.n_states = std::max<std::size_t>(12, n_fermions + 8);
  solver.validate();
  const auto dim = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  if (solver.n_states > dim) {
    throw std::invalid_argument("n-states = " + std::to_string(solver.n_states) + " exceeds the " +
                                std::to_string(dim) + " grid sites");
  }
  if (n_fermions > solver.n_states) {
    throw std::invalid_argument("n-fermions exceeds n-states = " + std::to_string(solver.n_states));
  }
  if ((command == "density" || command == "currents") && state >= solver.n_states) {
    throw std::invalid_argument("state must be below n-states = " + std::to_string(solver.n_states));
  }
  thresholds.validate();
  if (2 * thresholds.margin >= std::min(nx, ny)) throw std::invalid_argument("margin too large for the grid");

  if (command == "contain") {
    if (mode != "scan" && mode != "threshold") throw std::invalid_argument("mode must be scan or threshold");
    if (mode == "scan") {
      if (levels.size() < 2) throw std::invalid_argument("levels: a scan needs at least two levels");
      const auto grids = scan_levels();
      // Outputs are named after the first level. Its extent equals the
      // resolved one, so a rerun from the sidecar gives the same levels.
      nx = grids.front().nx;
      ny = grids.front().ny;
      spacing = grids.front().spacing;
    } else {
      if (!(bracket_lo >= 0.0) || !(bracket_hi > bracket_lo)) {
        throw std::invalid_argument("bracket-lo and bracket-hi must satisfy 0 <= lo < hi");
      }
      if (!(bisect_tol > 0.0)) throw std::invalid_argument("bisect-tol must be positive");
      params.bigomega = bracket_lo;
    }
  }
  if (command == "sweep") {
    if (bigomegas.empty()) throw std::invalid_argument("bigomegas: at least one value is required");
    if (!std::is_sorted(bigomegas.begin(), bigomegas.end())) throw std::invalid_argument("bigomegas must be ascending");
    if (bigomegas.front() < 0.0) throw std::invalid_argument("bigomegas must be non-negative");
    params.bigomega = bigomegas.front();
  }
}

std::vector<GridSpec> RunConfig::scan_levels() const {
  std::vector<GridSpec> out;
  if (axis == ScanAxis::Mesh) {
    std::vector<double> hs;
    for (const auto& l : levels) {
      const double h = parse_number(l, "levels");
      if (!(h > 0.0)) throw std::invalid_argument("levels: mesh spacing must be positive");
      hs.push_back(h);
    }
    const double ex = extent > 0.0 ? extent : (nx - 1) * spacing;
    const double ey = extent > 0.0 ? extent : (ny - 1) * spacing;
    out = mesh_levels(ex, ey, hs);
  } else {
    for (const auto& l : levels) {
      const auto x = l.find('x');
      try {
        const int a = std::stoi(x == std::string::npos ? l : l.substr(0, x));
        const int b = x == std::string::npos ? a : std::stoi(l.substr(x + 1));
        if (a < 2 || b < 2) throw std::invalid_argument("small");
        out.push_back({a, b, spacing});
      } catch (const std::exception&) {
        throw std::invalid_argument("levels: '" + l + "' is not a grid size like 100 or 150x100");
      }
    }
  }
  for (const auto& g : out) {
    if (2 * thresholds.margin >= std::min(g.nx, g.ny)) throw std::invalid_argument("levels: grid too small for margin");
  }
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"command", command},
                      {"model", rotlat::to_json(params)},
                      {"nx", nx},
                      {"ny", ny},
                      {"spacing", spacing},
                      {"extent", extent},
                      {"solver", rotlat::to_json(solver)},
                      {"n_fermions", n_fermions},
                      {"thresholds", rotlat::to_json(thresholds)},
                      {"out", out.string()}};
  if (command == "density" || command == "currents") {
    j["state"] = state;
    j["members"] = members;
    j["average"] = average;
  }
  if (command == "contain") {
    j["mode"] = mode;
    if (mode == "scan") {
      j["axis"] = std::string(to_string(axis));
      j["levels"] = levels;
    } else {
      j["bracket"] = {bracket_lo, bracket_hi};
      j["bisect_tol"] = bisect_tol;
    }
  }
  if (command == "sweep") j["bigomegas"] = bigomegas;
  return j;
}

namespace {

struct Outcome {
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json solver;
  std::vector<std::filesystem::path> files;
  bool converged = true;
};

class Runner {
 public:
  Runner(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out), geom_(cfg.nx, cfg.ny, cfg.spacing) {}

  Outcome run() {
    if (cfg_.command == "spectrum") spectrum();
    else if (cfg_.command == "density") density();
    else if (cfg_.command == "currents") currents();
    else if (cfg_.command == "fermions") fermions();
    else if (cfg_.command == "contain") contain();
    else if (cfg_.command == "sweep") sweep();
    else throw std::invalid_argument("unknown command " + cfg_.command);
    nlohmann::json sidecar = {{"config", cfg_.to_json()}, {"results", outcome_.results}};
    if (!outcome_.solver.is_null()) sidecar["solver"] = outcome_.solver;
    sidecar["converged"] = outcome_.converged;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : outcome_.files) files.push_back(f.filename().string());
    sidecar["files"] = files;
    emit_raw(stem() + ".json", sidecar.dump(2) + "\n");
    return outcome_;
  }

 private:
  std::string stem() const {
    return output_stem(cfg_.command, cfg_.params.kind, cfg_.nx, cfg_.ny, cfg_.params.omega, cfg_.params.bigomega);
  }

  void emit_raw(const std::string& name, const std::string& content) {
    const auto path = cfg_.out / name;
    write_file(path, content);
    outcome_.files.push_back(path);
    out_ << "wrote " << path.string() << '\n';
  }

  template <class Writer>
  void emit(const std::string& suffix, Writer&& writer) {
    std::ostringstream os;
    writer(os);
    emit_raw(stem() + suffix + ".csv", os.str());
  }

  EigenSolution solve() {
    const auto h = build_hamiltonian(geom_, cfg_.params);
    EigenSolution sol;
    try {
      sol = solve_lowest(h, cfg_.solver);
    } catch (const ConvergenceError& e) {
      out_ << "warning: " << e.what() << '\n';
      sol = e.partial();
    }
    outcome_.solver = to_json(sol.diagnostics);
    outcome_.converged = outcome_.converged && sol.diagnostics.converged;
    nlohmann::json ev = nlohmann::json::array();
    for (double e : sol.eigenvalues) ev.push_back(e);
    outcome_.results["eigenvalues"] = ev;
    outcome_.results["band_bottom_shift"] = band_bottom_shift(cfg_.params);
    return sol;
  }

  const Multiplet& selected_multiplet(const EigenSolution& sol) {
    if (!sol.multiplet_resolved(cfg_.state)) {
      throw std::invalid_argument("the multiplet of state " + std::to_string(cfg_.state) +
                                  " reaches the last computed state; raise n-states");
    }
    const Multiplet& m = sol.multiplet_of(cfg_.state);
    outcome_.results["multiplet"] = {{"first", m.first}, {"count", m.count}};
    return m;
  }

  void sections(const ScalarField& field, const std::string& prefix) {
    const Profile along_x = cross_section(field, Axis::X, 0.0);
    const Profile along_y = cross_section(field, Axis::Y, 0.0);
    emit(prefix + "_xsec_y0", [&](std::ostream& os) { write_profile_csv(os, along_x); });
    emit(prefix + "_xsec_x0", [&](std::ostream& os) { write_profile_csv(os, along_y); });
    try {
      const Profile diag = diagonal_profile(field);
      emit(prefix + "_diag", [&](std::ostream& os) { write_profile_csv(os, diag); });
    } catch (const std::invalid_argument&) {
      // The line x = y misses the sites; no diagonal profile for this grid.
    }
    outcome_.results["max_on_y0"] = *std::max_element(along_x.values.begin(), along_x.values.end());
    outcome_.results["max_on_x0"] = *std::max_element(along_y.values.begin(), along_y.values.end());
  }

  void spectrum() {
    const EigenSolution sol = solve();
    std::vector<AnalyticLevel> labels;
    if (cfg_.params.kind == ModelKind::Continuum && cfg_.params.bigomega <= cfg_.params.omega) {
      labels = analytic_lowest(cfg_.params.omega, cfg_.params.bigomega, sol.size());
    }
    emit("", [&](std::ostream& os) { write_spectrum_csv(os, sol, band_bottom_shift(cfg_.params), labels); });
    out_ << "ground energy " << sol.eigenvalues.front() << " (shifted "
         << sol.eigenvalues.front() + band_bottom_shift(cfg_.params) << ")\n";
  }

  void density() {
    const EigenSolution sol = solve();
    const Multiplet& m = selected_multiplet(sol);
    const ScalarField rho = multiplet_average_density(geom_, sol, m);
    emit("", [&](std::ostream& os) { write_scalar_field_csv(os, rho); });
    sections(rho, "");
    if (cfg_.members) {
      for (std::size_t i = m.first; i <= m.last(); ++i) {
        const ScalarField member = rotlat::density(geom_, sol.state(i));
        emit("_state" + std::to_string(i), [&](std::ostream& os) { write_scalar_field_csv(os, member); });
      }
    }
    outcome_.results["boundary_mass"] = boundary_mass(rho, cfg_.thresholds.margin);
    outcome_.results["max_density"] = rho.max();
    if (geom_.has_fourfold_symmetry()) outcome_.results["rotation_asymmetry"] = rotation_asymmetry(rho);
  }

  void currents() {
    const EigenSolution sol = solve();
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.size(); ++i) {
      worst = std::max(worst, continuity_defect(bond_currents(geom_, cfg_.params, sol.state(i))));
    }
    const BondField field = cfg_.average ? multiplet_average_currents(geom_, cfg_.params, sol, selected_multiplet(sol))
                                         : bond_currents(geom_, cfg_.params, sol.state(cfg_.state));
    emit("", [&](std::ostream& os) { write_bond_field_csv(os, field); });
    emit("_sites", [&](std::ostream& os) { write_site_currents_csv(os, field); });
    outcome_.results["continuity_defect"] = continuity_defect(field);
    outcome_.results["continuity_defect_all_states"] = worst;
    outcome_.results["max_abs_current"] = field.max_abs();
    out_ << "max net current over computed states " << worst << '\n';
  }

  void fermions() {
    const EigenSolution sol = solve();
    const ScalarField rho = fermion_density(geom_, sol, cfg_.n_fermions);
    emit("", [&](std::ostream& os) { write_scalar_field_csv(os, rho); });
    sections(rho, "");
    const Profile line = cross_section(rho, Axis::X, 0.0);
    // Value at x = 0: the middle site, or the mean of the two middle sites.
    const std::size_t n = line.values.size();
    const double center = n % 2 ? line.values[n / 2] : 0.5 * (line.values[n / 2 - 1] + line.values[n / 2]);
    outcome_.results["total"] = rho.total();
    outcome_.results["center_on_y0"] = center;
    outcome_.results["fermi_energy"] = sol.eigenvalues[cfg_.n_fermions - 1];
  }

  void contain() {
    if (cfg_.mode == "scan") {
      const auto levels = cfg_.scan_levels();
      const ContainmentReport report = refinement_scan(cfg_.params, levels, cfg_.solver, cfg_.thresholds);
      emit("", [&](std::ostream& os) { write_runs_csv(os, report.runs); });
      outcome_.results = to_json(report);
      outcome_.converged = report.converged;
      out_ << "verdict " << to_string(report.verdict) << " (energy sensitivity " << report.energy_sensitivity
           << ", density sensitivity " << report.density_sensitivity << ")\n";
    } else {
      const ThresholdResult r = escape_threshold(cfg_.grid(), cfg_.params, cfg_.bracket_lo, cfg_.bracket_hi,
                                                 cfg_.bisect_tol, cfg_.solver, cfg_.thresholds);
      emit("", [&](std::ostream& os) { write_sweep_csv(os, r.evaluations); });
      outcome_.results = to_json(r);
      for (const auto& row : r.evaluations) outcome_.converged = outcome_.converged && row.run.solver.converged;
      out_ << "escape threshold in [" << r.lower << ", " << r.upper << "]\n";
    }
  }

  void sweep() {
    const auto rows = omega_sweep(cfg_.grid(), cfg_.params, cfg_.bigomegas, cfg_.solver, cfg_.thresholds);
    emit("", [&](std::ostream& os) { write_sweep_csv(os, rows); });
    for (const auto& row : rows) outcome_.converged = outcome_.converged && row.run.solver.converged;
    outcome_.results["verdicts_monotone"] = verdicts_monotone(rows);
  }

  const RunConfig& cfg_;
  std::ostream& out_;
  LatticeGeometry geom_;
  Outcome outcome_;
};

struct Names {
  std::string model = "hubbard";
  std::string method = "chebyshev";
  std::string axis = "mesh";
  std::string levels;
  std::string bigomegas;
};

void add_common(CLI::App* sub, RunConfig& cfg, Names& names) {
  sub->set_help_flag("--help", "Print this help message and exit");  // -h is taken by --h
  sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  sub->add_option("--model", names.model, "hubbard | continuum")->capture_default_str();
  sub->add_option("--nx", cfg.nx, "Sites along x (default: from --extent, else 150 / side 40)");
  sub->add_option("--ny", cfg.ny, "Sites along y (default: nx)");
  sub->add_option("--spacing,--h,--d", cfg.spacing, "Lattice constant or mesh size")->capture_default_str();
  sub->add_option("--extent", cfg.extent, "Physical side length; sets nx = ny when they are absent");
  sub->add_option("--t", cfg.params.t, "Hopping energy")->capture_default_str();
  sub->add_option("--omega", cfg.params.omega, "Trap frequency")->capture_default_str();
  sub->add_option("--bigomega", cfg.params.bigomega, "Rotation frequency")->capture_default_str();
  sub->add_option_function<std::size_t>(
      "--n-states",
      [&cfg](const std::size_t& n) {
        cfg.solver.n_states = n;
        cfg.n_states_set = true;
      },
      "Eigenpairs to compute (default max(12, n-fermions + 8))");
  sub->add_option("--tol", cfg.solver.tol, "Residual tolerance relative to ||H||_1")->capture_default_str();
  sub->add_option("--seed", cfg.solver.seed, "Seed of the random starting block")->capture_default_str();
  sub->add_option("--method", names.method, "chebyshev | block-lanczos")->capture_default_str();
  sub->add_option("--block-size", cfg.solver.block_size, "Block size")->capture_default_str();
  sub->add_option("--max-basis", cfg.solver.max_basis, "Krylov basis size (0: automatic)");
  sub->add_option("--max-restarts", cfg.solver.max_restarts, "Restart or sweep budget (0: 50 n-states)");
  sub->add_option("--cluster-tol", cfg.solver.cluster_tol, "Multiplet clustering gap")->capture_default_str();
  sub->add_option("--eps-energy", cfg.thresholds.energy, "Containment energy threshold")->capture_default_str();
  sub->add_option("--eps-density", cfg.thresholds.density, "Containment density L1 threshold")->capture_default_str();
  sub->add_option("--eps-boundary", cfg.thresholds.boundary, "Boundary mass threshold")->capture_default_str();
  sub->add_option("--margin", cfg.thresholds.margin, "Boundary width in sites")->capture_default_str();
  sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
}

// Inserts the contents of --config FILE after the subcommand so that explicit
// flags, which come later, take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> file_args;
  for (std::size_t i = 0; i < args.size();) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("config: missing file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
      continue;
    }
    if (!file_args.empty()) throw std::invalid_argument("config: only one config file is accepted");
    file_args = config_arguments(path);
  }
  if (!file_args.empty()) {
    const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
    if (sub == args.end()) throw std::invalid_argument("config: a subcommand is required");
    args.insert(sub + 1, file_args.begin(), file_args.end());
  }
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  Names names;
  CLI::App app{"Low-lying eigenstates of a rotating, harmonically trapped particle on a lattice or a mesh."};
  app.name("rotlat");
  app.require_subcommand(1);

  auto* spectrum = app.add_subcommand("spectrum", "Lowest eigenvalues, with analytic labels for the continuum");
  auto* density = app.add_subcommand("density", "Multiplet-averaged density and its cross-sections");
  auto* currents = app.add_subcommand("currents", "Bond currents of one state or multiplet");
  auto* fermions = app.add_subcommand("fermions", "Density of N noninteracting fermions");
  auto* contain = app.add_subcommand("contain", "Refinement scan or escape-threshold bisection");
  auto* sweep = app.add_subcommand("sweep", "Ground energy and containment across rotation frequencies");
  for (auto* sub : {spectrum, density, currents, fermions, contain, sweep}) add_common(sub, cfg, names);

  for (auto* sub : {density, currents}) {
    sub->add_option("--state", cfg.state, "Index of the state (its multiplet for densities)")->capture_default_str();
  }
  density->add_flag("--members", cfg.members, "Also write each member density");
  currents->add_flag("--average", cfg.average, "Average over the multiplet of --state");
  fermions->add_option("--n-fermions", cfg.n_fermions, "Number of fermions")->required();
  contain->add_option("--mode", cfg.mode, "scan | threshold")->capture_default_str();
  contain->add_option("--axis", names.axis, "mesh | lattice-size")->capture_default_str();
  contain->add_option("--levels", names.levels, "Mesh sizes (0.5,0.25) or grids (100x100,150x150)");
  contain->add_option("--bracket-lo", cfg.bracket_lo, "Lower end of the bisection bracket")->capture_default_str();
  contain->add_option("--bracket-hi", cfg.bracket_hi, "Upper end of the bisection bracket")->capture_default_str();
  contain->add_option("--bisect-tol", cfg.bisect_tol, "Bracket width at which bisection stops")->capture_default_str();
  sweep->add_option("--bigomegas", names.bigomegas, "Ascending rotation frequencies, comma separated")->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.params.kind = parse_model_kind(names.model);
    cfg.solver.method = parse_solver_method(names.method);
    cfg.axis = parse_scan_axis(names.axis);
    cfg.levels = split_list(names.levels);
    for (const auto& s : split_list(names.bigomegas)) cfg.bigomegas.push_back(parse_number(s, "bigomegas"));
    cfg.resolve();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    Runner runner(cfg, out);
    const Outcome outcome = runner.run();
    if (!outcome.converged) {
      err << "error: at least one solve missed its residual target\n";
      return kExitUnconverged;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}

}  // namespace rotlat::cli
