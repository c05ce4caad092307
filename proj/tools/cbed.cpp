// cbed: exact diagonalization and inequality checks for the checkerboard
// Heisenberg antiferromagnet.
//
//   cbed lattice-info --lattice checkerboard:4x2
//   cbed solve --lattice single-box --spin 1
//   cbed verify --suite all --lattice checkerboard-4x2 --out reports
//   cbed scan --lattice checkerboard-4x2 --beta-grid 0.5,1,2 --b-grid 0,0.5

#include "cbed/cbed.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace cbed;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Config {
  std::string lattice = "checkerboard-4x2";
  std::string spin = "1/2";
  bool periodic = true;
  bool ferro = false;
  std::string suite = "all";
  std::vector<double> beta_grid;
  std::vector<double> b_grid;
  std::uint64_t seed = 0xF2;
  std::string out;
  std::size_t workers = 0;
  std::size_t dense_threshold = kDefaultDenseThreshold;
  double tol = 0.0;
  std::string fields;
  bool dump = false;
};

SpinRep parse_spin(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return SpinRep::from_value(std::stod(s));
    std::size_t pos = 0;
    const int num = std::stoi(s.substr(0, slash), &pos);
    if (pos != slash || s.substr(slash + 1) != "2") throw std::invalid_argument(s);
    return SpinRep(num);
  } catch (const std::exception&) {
    throw ConfigError("--spin: expected a positive half-integer such as 1/2, 1 or 1.5, got '" + s + "'");
  }
}

std::vector<std::size_t> parse_extent(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, 'x')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != tok.size()) throw ConfigError("bad extent '" + s + "' (expected e.g. 4x2)");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("bad extent '" + s + "'");
  return out;
}

/// Presets, kind:LxxLy forms, or a path to a JSON spec.
LatticeSpec resolve_lattice(const Config& cfg) {
  LatticeSpec spec;
  const std::string& l = cfg.lattice;
  if (l == "single-box") {
    spec.kind = LatticeKind::single_box;
    spec.extent = {2, 2};
    spec.periodic = {false, false};
  } else if (l == "checkerboard-4x2" || l == "checkerboard-4x4") {
    spec.kind = LatticeKind::checkerboard;
    spec.extent = {4, l.back() == '2' ? 2u : 4u};
    spec.periodic.assign(2, cfg.periodic);
  } else if (l == "dimer") {
    spec.kind = LatticeKind::chain;
    spec.extent = {2};
    spec.periodic = {false};
  } else if (const auto colon = l.find(':'); colon != std::string::npos) {
    try {
      spec.kind = lattice_kind_from_string(l.substr(0, colon));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    spec.extent = parse_extent(l.substr(colon + 1));
    spec.periodic.assign(spec.extent.size(), cfg.periodic);
  } else if (fs::exists(l)) {
    spec = lattice_spec_from_json(read_json_file(l));
  } else {
    throw ConfigError("unknown lattice '" + l +
                      "' (presets: single-box, checkerboard-4x2, checkerboard-4x4, dimer; "
                      "or kind:LxxLy, or a JSON file)");
  }
  if (cfg.ferro) spec.coupling_sign = -spec.coupling_sign;
  return spec;
}

SolverOptions solver_options(const Config& cfg) {
  SolverOptions opt;
  opt.workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
  opt.dense_threshold = cfg.dense_threshold;
  return opt;
}

VerifyOptions verify_options(const Config& cfg) {
  VerifyOptions opt;
  opt.solver = solver_options(cfg);
  opt.seed = cfg.seed;
  opt.solver.lanczos.seed = cfg.seed;
  if (!cfg.beta_grid.empty()) opt.beta_grid = cfg.beta_grid;
  if (!cfg.b_grid.empty()) opt.b_grid = cfg.b_grid;
  if (cfg.tol > 0.0) {
    opt.energy_tol = cfg.tol;
    opt.expectation_tol = cfg.tol;
  }
  return opt;
}

void ensure_out(const Config& cfg) {
  if (cfg.out.empty()) return;
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out + ": " + ec.message());
}

std::string out_path(const Config& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

void write_metadata(const Config& cfg, const std::string& command) {
  if (cfg.out.empty()) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_json(out_path(cfg, "metadata.json"), json{{"command", command}, {"timestamp", buf}});
}

json run_header(const Config& cfg, const LatticeSpec& spec, const SpinRep& rep) {
  return {{"schema", kReportSchema}, {"lattice", to_json(spec)}, {"spin", rep.s()}, {"seed", cfg.seed}};
}

int cmd_lattice_info(const Config& cfg) {
  const auto spec = resolve_lattice(cfg);
  const auto g = build_lattice(spec);
  const auto cuts = find_reflection_cuts(g);
  const auto nb = hamiltonian_bonds(g).size();
  std::cout << g.n_sites << " sites, " << g.boxes.size() << (g.boxes.size() == 1 ? " box, " : " boxes, ")
            << nb << (nb == 1 ? " bond, " : " bonds, ") << cuts.size() << (cuts.size() == 1 ? " cut" : " cuts")
            << "\n";
  for (const auto& c : cuts) {
    std::cout << "  cut axis " << c.axis << " at " << c.position << "|" << c.position + 1 << ": left {";
    for (std::size_t i = 0; i < c.left_sites.size(); ++i) std::cout << (i ? "," : "") << c.left_sites[i];
    std::cout << "}, " << c.cut_boxes.size() << " crossing boxes\n";
  }
  if (!cfg.out.empty()) {
    ensure_out(cfg);
    write_json(out_path(cfg, "lattice.json"), to_json(g));
    write_metadata(cfg, "lattice-info");
  }
  return kExitPass;
}

int cmd_solve(const Config& cfg) {
  const auto spec = resolve_lattice(cfg);
  const auto rep = parse_spin(cfg.spin);
  const auto g = build_lattice(spec);
  HilbertSpace space(g.n_sites, rep);
  std::optional<BoxFieldAssignment> fields;
  if (!cfg.fields.empty()) fields = box_fields_from_json(read_json_file(cfg.fields));
  const auto op = box_terms(g, rep, fields ? &*fields : nullptr);
  const auto gs = ground_space(op, space, solver_options(cfg));

  json j = run_header(cfg, spec, rep);
  j["hamiltonian"] = "boxes";
  j["offset_to_bond_form"] = box_form_offset(g, rep);
  j["ground"] = to_json(gs);
  if (fields) {
    json f = json::object();
    for (std::size_t x = 0; x < g.boxes.size(); ++x) f[std::to_string(x)] = fields->at(x);
    j["box_fields"] = f;
  }
  if (cfg.dump) {
    const auto cuts = find_reflection_cuts(g);
    if (!cuts.empty()) {
      ReflectionFrame frame(space, cuts.front());
      json reps = json::array();
      for (const auto& c : hermitize_ground_space(gs, frame)) reps.push_back(to_json(c));
      j["dump"] = {{"cut", to_json(cuts.front())}, {"t", to_json(frame.t_matrices())}, {"c", reps}};
    }
  }
  std::cout << "E0 = " << format_double(gs.energy) << ", degeneracy " << gs.degeneracy << "\n";
  for (std::size_t i = 0; i < gs.s2_expectation.size(); ++i)
    std::cout << "  vector " << i << ": m = " << 0.5 * gs.two_m[i] << ", <S^2> = " << gs.s2_expectation[i]
              << ", residual " << gs.residuals[i] << "\n";
  if (!cfg.out.empty()) {
    ensure_out(cfg);
    write_json(out_path(cfg, "ground.json"), j);
    write_metadata(cfg, "solve");
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return kExitPass;
}

int cmd_verify(const Config& cfg) {
  const std::vector<std::string> known{"ground", "reflection", "ice", "thermo", "all"};
  if (std::find(known.begin(), known.end(), cfg.suite) == known.end())
    throw ConfigError("--suite must be one of ground, reflection, ice, thermo, all");
  const auto spec = resolve_lattice(cfg);
  const auto rep = parse_spin(cfg.spin);
  const auto g = build_lattice(spec);
  const auto opt = verify_options(cfg);
  const bool all = cfg.suite == "all";
  ensure_out(cfg);

  bool pass = true;
  auto emit = [&](const InequalityReport& r) {
    std::cout << (r.pass() ? "PASS" : "FAIL") << "  " << r.suite << ": " << r.rows.size() - r.failures() << "/"
              << r.rows.size() << " checks\n";
    for (const auto& row : r.rows)
      if (!row.pass) std::cout << "      failed " << row.check << " margin " << row.margin << "\n";
    if (!cfg.out.empty()) {
      json j = run_header(cfg, spec, rep);
      j.update(to_json(r));
      write_json(out_path(cfg, "report_" + r.suite + ".json"), j);
    }
    pass = pass && r.pass();
  };
  if (all || cfg.suite == "ground") emit(verify_ground_inequalities(g, rep, opt));
  if (all || cfg.suite == "ice") emit(verify_ice_rule(g, rep, opt));
  if (all || cfg.suite == "thermo") {
    const auto t = verify_thermo_inequalities(g, rep, opt);
    emit(t.report);
    if (!cfg.out.empty()) {
      std::ostringstream os;
      write_thermo_csv(os, t.curve);
      write_text(out_path(cfg, "thermo_curve.csv"), os.str());
    }
  }
  if (all || cfg.suite == "reflection") emit(verify_reflection(g, rep, opt));
  write_metadata(cfg, "verify");
  return pass ? kExitPass : kExitFail;
}

int cmd_scan(const Config& cfg) {
  const auto spec = resolve_lattice(cfg);
  const auto rep = parse_spin(cfg.spin);
  const auto g = build_lattice(spec);
  HilbertSpace space(g.n_sites, rep);
  const auto spec0 = dense_spectrum(box_terms(g, rep), space, false, cfg.dense_threshold);
  const auto betas = cfg.beta_grid.empty() ? VerifyOptions{}.beta_grid : cfg.beta_grid;
  const auto fields = cfg.b_grid.empty() ? VerifyOptions{}.B_grid : cfg.b_grid;
  const auto rows = thermo_scan(spec0, g.n_sites, betas, fields);
  std::ostringstream os;
  write_thermo_csv(os, rows);
  if (cfg.out.empty()) {
    std::cout << os.str();
  } else {
    ensure_out(cfg);
    write_text(out_path(cfg, "scan.csv"), os.str());
    write_metadata(cfg, "scan");
    std::cout << rows.size() << " rows written to " << out_path(cfg, "scan.csv") << "\n";
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact diagonalization and inequality checks for the checkerboard antiferromagnet"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* sub, bool spin) {
    sub->add_option("--lattice", cfg.lattice,
                    "single-box, checkerboard-4x2, checkerboard-4x4, dimer, kind:LxxLy or a JSON spec file")
        ->capture_default_str();
    sub->add_flag("--periodic,!--open", cfg.periodic, "periodic boundaries for kind:LxxLy lattices")
        ->capture_default_str();
    sub->add_flag("--ferro", cfg.ferro, "flip every coupling to ferromagnetic");
    sub->add_option("--out", cfg.out, "output directory");
    if (!spin) return;
    sub->add_option("--spin", cfg.spin, "spin s, e.g. 1/2, 1, 3/2")->capture_default_str();
    sub->add_option("--workers", cfg.workers, "worker threads (0 = all cores)")->capture_default_str();
    sub->add_option("--dense-threshold", cfg.dense_threshold, "largest matrix diagonalized densely")
        ->capture_default_str();
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  };

  auto* info = app.add_subcommand("lattice-info", "print sites, boxes, bonds and reflection cuts");
  common(info, false);

  auto* solve = app.add_subcommand("solve", "ground space of the box-form Hamiltonian");
  common(solve, true);
  solve->add_option("--fields", cfg.fields, "JSON file of box fields {\"box\": b}");
  solve->add_flag("--dump", cfg.dump, "include coefficient and t matrices of the first cut");

  auto* verify = app.add_subcommand("verify", "run inequality suites; exit 1 on any failure");
  common(verify, true);
  verify->add_option("--suite", cfg.suite, "ground, reflection, ice, thermo or all")->capture_default_str();
  verify->add_option("--beta-grid", cfg.beta_grid, "inverse temperatures")->delimiter(',');
  verify->add_option("--b-grid", cfg.b_grid, "single-box and uniform field values")->delimiter(',');
  verify->add_option("--tol", cfg.tol, "energy and expectation tolerance");

  auto* scan = app.add_subcommand("scan", "thermodynamics on a (beta, B) grid as CSV");
  common(scan, true);
  scan->add_option("--beta-grid", cfg.beta_grid, "inverse temperatures")->delimiter(',');
  scan->add_option("--b-grid", cfg.b_grid, "uniform fields")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*info) return cmd_lattice_info(cfg);
    if (*solve) return cmd_solve(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*scan) return cmd_scan(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LatticeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
