// Acceptance criteria, one PASS/FAIL line each. Exit status is the number of
// failed criteria (0 when all pass).

#include "cbed/cbed.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace cbed;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

LatticeGraph lattice(LatticeKind kind, std::size_t lx = 4, std::size_t ly = 2, double sign = 1.0) {
  LatticeSpec s;
  s.kind = kind;
  s.extent = {lx, ly};
  s.periodic = {kind != LatticeKind::single_box, kind != LatticeKind::single_box};
  s.coupling_sign = sign;
  return build_lattice(s);
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

bool rows_pass(const InequalityReport& r, const std::vector<std::string>& checks, Outcome& o) {
  bool ok = true;
  for (const auto& row : r.rows) {
    if (std::find(checks.begin(), checks.end(), row.check) == checks.end()) continue;
    if (!row.pass) {
      ok = false;
      o.detail << " [" << r.suite << "/" << row.check << " margin " << row.margin << "]";
    }
  }
  return ok;
}

double worst_of(const InequalityReport& r, const std::string& check) {
  double w = 0.0;
  for (const auto& row : r.rows)
    if (row.check == check) w = std::max(w, std::abs(row.lhs - row.rhs));
  return w;
}

/// Spin-zero and S3 checks on every ground vector.
void spin_zero_ground(const LatticeGraph& g, const SpinRep& rep, const SolverOptions& opt, Outcome& o,
                      const std::string& tag) {
  HilbertSpace space(g.n_sites, rep);
  const auto gs = ground_space(heisenberg_terms(g, rep), space, opt);
  const auto tot = total_spin_ops(space);
  double s2 = 0.0, s3 = 0.0;
  for (const auto& v : gs.vectors) {
    s2 = std::max(s2, std::abs(tot.s2_tot.expectation(v)));
    s3 = std::max(s3, std::abs(tot.s3_tot.expectation(v)));
  }
  o.detail << " " << tag << ": d=" << gs.degeneracy << " max<S2>=" << s2 << " max|<S3>|=" << s3;
  o.require(!gs.vectors.empty(), tag + " ground space empty");
  o.require(s2 < 1e-8, tag + " <S2_tot> >= 1e-8");
  o.require(s3 < 1e-10, tag + " <S3_tot> >= 1e-10");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CBED_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion1() {
  Outcome o;
  const auto g = lattice(LatticeKind::single_box);
  for (int ts : {1, 2}) {
    SpinRep rep(ts);
    HilbertSpace space(4, rep);
    const auto gs = ground_space(box_terms(g, rep), space);
    double s2 = 0.0;
    for (double x : gs.s2_expectation) s2 = std::max(s2, std::abs(x));
    o.detail << " s=" << rep.s() << ": E0=" << gs.energy << " d=" << gs.degeneracy << " max<S2>=" << s2;
    o.require(std::abs(gs.energy) < 1e-10, "E0 != 0");
    o.require(gs.degeneracy == static_cast<std::size_t>(ts + 1), "degeneracy != 2s+1");
    o.require(s2 < 1e-8, "<S2_tot> >= 1e-8");
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::mt19937_64 rng(0xF2);
  std::normal_distribution<double> nd(0.0, 1.0);
  struct Case {
    std::string name;
    LatticeGraph g;
  };
  const std::vector<Case> cases{{"single_box", lattice(LatticeKind::single_box)},
                                {"4x2", lattice(LatticeKind::checkerboard, 4, 2)},
                                {"4x4", lattice(LatticeKind::checkerboard, 4, 4)}};
  for (const auto& c : cases) {
    for (int ts : {1, 2}) {
      SpinRep rep(ts);
      const double dim = std::pow(static_cast<double>(rep.local_dim()), static_cast<double>(c.g.n_sites));
      std::ostringstream tag;
      tag << c.name << " s=" << rep.s();
      if (dim > static_cast<double>(std::size_t{1} << 24)) {
        o.detail << " " << tag.str() << ": not run (dim " << static_cast<std::size_t>(dim)
                 << " beyond the 2^24 desk-scale limit)";
        o.require(false, tag.str() + " infeasible on this machine");
        continue;
      }
      HilbertSpace space(c.g.n_sites, rep);
      const auto hb = build_H_boxes(c.g, space);
      const auto ha = build_H_AF(c.g, space);
      const double k = 2.0 * rep.casimir() * static_cast<double>(c.g.boxes.size());
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        Vector v(static_cast<Eigen::Index>(space.dim()));
        for (auto& x : v) x = cplx(nd(rng), nd(rng));
        v.normalize();
        worst = std::max(worst, (hb.apply(v) - ha.apply(v) - k * v).norm());
      }
      o.detail << " " << tag.str() << ": " << worst;
      o.require(worst < 1e-10, tag.str() + " residual >= 1e-10");
    }
  }
  return o;
}

Outcome criterion3and4(bool ice, bool& ran, InequalityReport* ice_out) {
  Outcome o;
  const auto g = lattice(LatticeKind::checkerboard, 4, 2);
  SolverOptions dense;
  dense.dense_cutoff = 1u << 20;
  for (int ts : {1, 2}) {
    SpinRep rep(ts);
    if (!ice) {
      spin_zero_ground(g, rep, dense, o, "s=" + std::to_string(rep.s()).substr(0, 3));
    } else {
      VerifyOptions vo;
      vo.solver = dense;
      const auto r = verify_ice_rule(g, rep, vo);
      o.detail << " s=" << rep.s() << ": max|<S_box>|=" << worst_of(r, "box_spin");
      o.require(rows_pass(r, {"box_spin", "ground_space_found"}, o), "ice rule");
      if (ice_out) ice_out->append(r);
    }
  }
  ran = true;
  return o;
}

Outcome criterion5and6(bool positivity) {
  Outcome o;
  struct Case {
    LatticeGraph g;
    int ts;
    std::string tag;
  };
  const std::vector<Case> cases{{lattice(LatticeKind::single_box), 1, "single_box s=1/2"},
                                {lattice(LatticeKind::single_box), 2, "single_box s=1"},
                                {lattice(LatticeKind::checkerboard, 4, 2), 1, "4x2 s=1/2"}};
  for (const auto& c : cases) {
    const auto r = verify_reflection(c.g, SpinRep(c.ts));
    if (!positivity) {
      o.detail << " " << c.tag << ": round-trip " << worst_of(r, "round_trip") << ", residual "
               << worst_of(r, "eigen_equation_residual") << ", trace " << worst_of(r, "trace_energy");
      o.require(rows_pass(r, {"cuts_found", "round_trip", "hermitian_representative",
                              "eigen_equation_residual", "representative_residual", "trace_energy"},
                          o),
                c.tag);
    } else {
      double min_tr = std::numeric_limits<double>::infinity(), min_eig = 0.0, overlap = 0.0;
      for (const auto& row : r.rows) {
        if (row.check == "psd_trace") min_tr = std::min(min_tr, row.lhs);
        if (row.check == "spin_zero_psd") min_eig = std::min(min_eig, row.lhs);
        if (row.check == "psi0_ground_overlap") overlap = std::max(overlap, row.lhs);
      }
      o.detail << " " << c.tag << ": |c| dE " << worst_of(r, "abs_energy") << ", min tr " << min_tr
               << ", overlap " << overlap << ", projector " << worst_of(r, "spin_zero_spectral")
               << ", min eig " << min_eig;
      o.require(rows_pass(r, {"abs_energy", "abs_norm", "abs_monotone", "psd_in_ground_space",
                              "psd_min_eigenvalue", "psd_trace", "psi0_ground_overlap", "psi0_spin_zero",
                              "spin_zero_psd", "spin_zero_spectral", "spin_zero_s2"},
                          o),
                c.tag);
    }
  }
  return o;
}

Outcome criterion7(const LatticeGraph& g, const SolverOptions& solver) {
  Outcome o;
  VerifyOptions vo;
  vo.solver = solver;
  const auto r = verify_ground_inequalities(g, SpinRep(1), vo);
  o.detail << " worst margins: E(b)+b^2/2-E(0) " << r.worst_margin("box_field_envelope") << ", E_b-E0 "
           << r.worst_margin("box_field_draw") << ", chi_loc " << r.worst_margin("chi_loc_secant");
  o.require(r.pass(), "ground inequalities");
  rows_pass(r, {"box_field_envelope", "box_field_draw", "chi_loc_secant", "uniform_field_envelope"}, o);
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto g = lattice(LatticeKind::checkerboard, 4, 2);
  const auto t = verify_thermo_inequalities(g, SpinRep(1));
  double chi = 0.0;
  for (const auto& row : t.report.rows)
    if (row.check == "susceptibility_bound") chi = std::max(chi, row.lhs);
  o.detail << " worst margins: Z " << t.report.worst_margin("partition_function_draw") << ", F "
           << t.report.worst_margin("free_energy_envelope") << ", max chi_T(0) " << chi << ", rows "
           << t.report.rows.size();
  o.require(t.report.pass(), "thermo inequalities");
  rows_pass(t.report, {"partition_function_draw", "free_energy_envelope", "magnetization_zero_field",
                       "susceptibility_bound"},
            o);
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto g42 = lattice(LatticeKind::checkerboard, 4, 2);
  for (int ts : {1, 2}) {
    SpinRep rep(ts);
    HilbertSpace space(g42.n_sites, rep);
    const auto op = heisenberg_terms(g42, rep);
    SolverOptions dense, lanczos;
    dense.dense_cutoff = 1u << 20;
    lanczos.dense_cutoff = 0;
    const double ed = ground_space(op, space, dense).energy;
    const double el = ground_space(op, space, lanczos).energy;
    o.detail << " 4x2 s=" << rep.s() << ": |dE|=" << std::abs(ed - el);
    o.require(std::abs(ed - el) < 1e-8, "Lanczos vs dense on 4x2");
  }

  const auto g44 = lattice(LatticeKind::checkerboard, 4, 4);
  SpinRep half(1);
  HilbertSpace space(g44.n_sites, half);
  SolverOptions lanczos;
  const auto t0 = Clock::now();
  const auto gs = ground_space(heisenberg_terms(g44, half), space, lanczos);
  const double t = seconds_since(t0);
  double res = 0.0;
  for (double r : gs.residuals) res = std::max(res, r);
  o.detail << "; 4x4 s=1/2: E0=" << gs.energy << " d=" << gs.degeneracy << " residual " << res << " in " << t
           << " s;";
  o.require(res < 1e-8, "4x4 residual");
  o.require(t < 60.0, "4x4 Lanczos time");

  spin_zero_ground(g44, half, lanczos, o, "spin-zero(4x4)");
  const auto ice = verify_ice_rule(g44, half);
  o.detail << "; ice(4x4) max|<S_box>|=" << worst_of(ice, "box_spin");
  o.require(ice.pass(), "ice rule on 4x4");
  const auto ineq = criterion7(g44, lanczos);
  o.detail << "; inequalities(4x4)" << ineq.detail.str();
  o.require(ineq.pass, "energy inequalities on 4x4");
  return o;
}

Outcome criterion10() {
  Outcome o;
  const auto g = lattice(LatticeKind::checkerboard, 4, 2, -1.0);
  const auto r = verify_ice_rule(g, SpinRep(1));
  const int code = run_cli("verify --suite ice --ferro --lattice checkerboard-4x2 --workers 1");
  const int af = run_cli("verify --suite ice --lattice checkerboard-4x2 --workers 1");
  o.detail << " ferromagnet: " << r.failures() << "/" << r.rows.size() << " ice checks fail, CLI exit " << code
           << " (antiferromagnet exit " << af << ")";
  o.require(!r.pass(), "ferromagnetic ice suite passed");
  o.require(code == 1, "CLI exit code is not 1");
  o.require(af == 0, "antiferromagnetic control did not pass");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Outcome()> run;
  };
  bool ran = false;
  const std::vector<Criterion> criteria{
      {1, "minimal example (single box)", 1.0, criterion1},
      {2, "operator identity H_boxes = H_AF + 2s(s+1) N_box", 10.0, criterion2},
      {3, "spin-zero ground states on 4x2", 120.0, [&] { return criterion3and4(false, ran, nullptr); }},
      {4, "quantum ice rule on 4x2", 120.0, [&] { return criterion3and4(true, ran, nullptr); }},
      {5, "reflection machinery", 30.0, [] { return criterion5and6(false); }},
      {6, "positivity pipeline", 60.0, [] { return criterion5and6(true); }},
      {7, "energy inequalities on 4x2", 300.0,
       [] { return criterion7(lattice(LatticeKind::checkerboard, 4, 2), SolverOptions{}); }},
      {8, "finite-temperature bounds on 4x2", 120.0, criterion8},
      {9, "solver cross-validation and 4x4 reruns", 0.0, criterion9},
      {10, "negative control (ferromagnet)", 0.0, criterion10},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double t = seconds_since(t0);
    if (c.limit_s > 0.0 && t >= c.limit_s) {
      o.pass = false;
      o.detail << " [runtime " << t << " s over " << c.limit_s << " s]";
    }
    std::printf("%s  criterion %2d  %-50s %8.2f s |%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), t,
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
