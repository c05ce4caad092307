#pragma once

#include "cbed/hamiltonian.hpp"
#include "cbed/lattice.hpp"
#include "cbed/reflection.hpp"
#include "cbed/solver.hpp"
#include "cbed/thermo.hpp"
#include "cbed/verification.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cbed {

using json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"kind": "checkerboard", "extent": [4, 2], "periodic": [true, true],
///  "crossed_parity": 0, "coupling_sign": 1}; only kind is required.
inline LatticeSpec lattice_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("lattice spec must be a JSON object");
  LatticeSpec spec;
  try {
    spec.kind = lattice_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("extent")) spec.extent = j["extent"].get<std::vector<std::size_t>>();
    if (j.contains("periodic")) {
      if (j["periodic"].is_boolean())
        spec.periodic.assign(spec.extent.size(), j["periodic"].get<bool>());
      else
        spec.periodic = j["periodic"].get<std::vector<bool>>();
    }
    if (j.contains("crossed_parity")) spec.crossed_parity = j["crossed_parity"].get<int>();
    if (j.contains("coupling_sign")) spec.coupling_sign = j["coupling_sign"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad lattice spec: ") + e.what());
  } catch (const LatticeError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

inline json to_json(const LatticeSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"extent", s.extent},
          {"periodic", s.periodic},
          {"crossed_parity", s.crossed_parity},
          {"coupling_sign", s.coupling_sign}};
}

inline json to_json(const ReflectionCut& c) {
  json boxes = json::array();
  for (const auto& cb : c.cut_boxes)
    boxes.push_back({{"box", cb.box}, {"left_pair", cb.left_pair}, {"right_pair", cb.right_pair}});
  return {{"axis", c.axis},
          {"position", c.position},
          {"left_sites", c.left_sites},
          {"right_sites", c.right_sites},
          {"cut_boxes", boxes}};
}

inline json to_json(const LatticeGraph& g) {
  json bonds = json::array();
  for (const auto& b : hamiltonian_bonds(g))
    bonds.push_back({{"i", b.i}, {"j", b.j}, {"coupling", b.coupling}, {"box", b.box}});
  json boxes = json::array();
  for (const auto& b : g.boxes) boxes.push_back({{"sites", b.sites}, {"position", b.position}});
  json cuts = json::array();
  for (const auto& c : find_reflection_cuts(g)) cuts.push_back(to_json(c));
  return {{"kind", to_string(g.kind)},
          {"extent", g.extent},
          {"periodic", g.periodic},
          {"n_sites", g.n_sites},
          {"n_boxes", g.boxes.size()},
          {"n_bonds", hamiltonian_bonds(g).size()},
          {"coords", g.coords},
          {"boxes", boxes},
          {"bonds", bonds},
          {"cuts", cuts}};
}

/// {"0": 0.5, "3": -1.0}: box index to field; missing boxes get 0.
inline BoxFieldAssignment box_fields_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("box fields must be a JSON object");
  std::map<std::size_t, double> v;
  for (const auto& [key, val] : j.items()) {
    std::size_t pos = 0;
    unsigned long idx = 0;
    try {
      idx = std::stoul(key, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != key.size() || !val.is_number())
      throw ConfigError("box fields: expected {\"box index\": number}, got key '" + key + "'");
    v[idx] = val.get<double>();
  }
  try {
    return BoxFieldAssignment(std::move(v));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Non-finite values become strings so the report stays valid JSON.
inline json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline json to_json(const InequalityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json params = json::object();
    for (const auto& [k, v] : row.params) params[k] = number(v);
    rows.push_back({{"check", row.check},
                    {"params", params},
                    {"lhs", number(row.lhs)},
                    {"rhs", number(row.rhs)},
                    {"margin", number(row.margin)},
                    {"tolerance", row.tolerance},
                    {"pass", row.pass}});
  }
  return {{"schema", kReportSchema},
          {"suite", r.suite},
          {"seed", r.seed},
          {"pass", r.pass()},
          {"n_rows", r.rows.size()},
          {"n_failed", r.failures()},
          {"rows", rows}};
}

inline json to_json(const GroundSpace& gs) {
  json vecs = json::array();
  for (std::size_t i = 0; i < gs.vectors.size() || i < gs.two_m.size(); ++i) {
    json v = json::object();
    if (i < gs.two_m.size()) v["m"] = 0.5 * gs.two_m[i];
    if (i < gs.s2_expectation.size()) v["s2"] = gs.s2_expectation[i];
    if (i < gs.residuals.size()) v["residual"] = gs.residuals[i];
    vecs.push_back(v);
  }
  return {{"energy", gs.energy},
          {"degeneracy", gs.degeneracy},
          {"degeneracy_tol", gs.degeneracy_tol},
          {"vectors", vecs}};
}

inline json to_json(const ThermoPoint& p) {
  return {{"beta", p.beta}, {"B", p.B},          {"log_Z", p.log_Z}, {"Z", number(p.Z)},
          {"F", p.F},       {"M", p.M},          {"chi", p.chi},     {"n_sites", p.n_sites}};
}

/// {"real": [[...]], "imag": [[...]]}
inline json to_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array(), c = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      r.push_back(m(i, k).real());
      c.push_back(m(i, k).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"real", re}, {"imag", im}};
}

inline json to_json(const CoefficientMatrix& c) {
  return {{"mode", to_string(c.mode)}, {"matrix", to_json(c.entries)}};
}

inline json to_json(const TMatrices& t) {
  json out = json::array();
  for (const auto& box : t.per_box) {
    json b = json::array();
    for (const auto& m : box) b.push_back(to_json(Matrix(m.cast<cplx>())));
    out.push_back(std::move(b));
  }
  return out;
}

/// Shortest round-trip representation.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  std::string s;
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << x;
    s = t.str();
    if (std::stod(s) == x) break;
  }
  return s;
}

inline const char* kThermoCsvHeader = "beta,B,Z,F,M,chi,bound_margin";

inline void write_thermo_csv(std::ostream& os, const std::vector<ThermoCurveRow>& rows) {
  os << kThermoCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& p = r.point;
    os << format_double(p.beta) << ',' << format_double(p.B) << ',' << format_double(p.Z) << ','
       << format_double(p.F) << ',' << format_double(p.M) << ',' << format_double(p.chi) << ','
       << format_double(r.bound_margin) << '\n';
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("error writing " + path);
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace cbed
