#pragma once

#include "cbed/hamiltonian.hpp"
#include "cbed/lattice.hpp"
#include "cbed/reflection.hpp"
#include "cbed/solver.hpp"
#include "cbed/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace cbed {

/// One checked inequality. margin >= -tolerance is a pass.
struct ReportRow {
  std::string check;
  std::map<std::string, double> params;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct InequalityReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;

  bool pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
  }

  /// Row requiring lhs >= rhs.
  void at_least(std::string check, std::map<std::string, double> params, double lhs, double rhs,
                double tol) {
    add(std::move(check), std::move(params), lhs, rhs, lhs - rhs, tol);
  }

  /// Row requiring lhs <= rhs.
  void at_most(std::string check, std::map<std::string, double> params, double lhs, double rhs,
               double tol) {
    add(std::move(check), std::move(params), lhs, rhs, rhs - lhs, tol);
  }

  void append(const InequalityReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return !r.pass; }));
  }

  /// Smallest margin among rows with the given check id.
  double worst_margin(const std::string& check) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows)
      if (r.check == check) m = std::min(m, r.margin);
    return m;
  }

 private:
  void add(std::string check, std::map<std::string, double> params, double lhs, double rhs,
           double margin, double tol) {
    ReportRow r{std::move(check), std::move(params), lhs, rhs, margin, tol, false};
    r.pass = std::isfinite(margin) && margin >= -tol;
    rows.push_back(std::move(r));
  }
};

struct VerifyOptions {
  SolverOptions solver{};
  std::uint64_t seed = 0xF2;
  double energy_tol = 1e-9;
  /// Relative tolerance on partition functions.
  double z_rel_tol = 1e-12;
  double expectation_tol = 1e-8;
  double spin_zero_tol = 1e-8;
  std::vector<double> b_grid{-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0};
  std::vector<double> beta_grid{0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> B_grid{-1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0};
  std::size_t n_draws = 20;
  double draw_range = 1.0;
  /// Boxes that receive the single-box field; empty means the boxes bisected
  /// by the first reflection cut (or box 0 when there is none).
  std::vector<std::size_t> field_boxes{};
  /// Random states per cut for the reflection identities.
  std::size_t n_random_states = 20;
};

/// Seeded uniform box-field draws in [-range, range].
inline std::vector<BoxFieldAssignment> random_box_fields(const LatticeGraph& g, std::size_t n_draws,
                                                         double range, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-range, range);
  std::vector<BoxFieldAssignment> out;
  for (std::size_t d = 0; d < n_draws; ++d) {
    std::map<std::size_t, double> v;
    for (std::size_t x = 0; x < g.boxes.size(); ++x) v[x] = u(rng);
    out.emplace_back(std::move(v));
  }
  return out;
}

namespace detail {

inline std::vector<std::size_t> default_field_boxes(const LatticeGraph& g, const VerifyOptions& opt) {
  if (!opt.field_boxes.empty()) return opt.field_boxes;
  auto cuts = find_reflection_cuts(g);
  std::vector<std::size_t> out;
  if (!cuts.empty())
    for (const auto& cb : cuts.front().cut_boxes) out.push_back(cb.box);
  if (out.empty() && !g.boxes.empty()) out.push_back(0);
  return out;
}

inline Vector random_state(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(n(rng), n(rng));
  return v.normalized();
}

inline Matrix random_matrix(Eigen::Index n, std::mt19937_64& rng, bool complex_entries) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(d(rng), complex_entries ? d(rng) : 0.0);
  return m;
}

}  // namespace detail

/// Zero-temperature field inequalities: the single-box envelope
/// E(b) + b^2/2 >= E(0), its secant form of chi_loc <= 1/4, the uniform-field
/// envelope E(B) + (N/16) B^2 >= E(0) and E_{b_x} >= E_0 for random box fields.
inline InequalityReport verify_ground_inequalities(const LatticeGraph& g, const SpinRep& rep,
                                                   const VerifyOptions& opt = {}) {
  InequalityReport rep_out;
  rep_out.suite = "ground";
  rep_out.seed = opt.seed;
  HilbertSpace space(g.n_sites, rep);
  const auto h0 = heisenberg_terms(g, rep);
  const auto minima = sector_minima(h0, space, opt.solver);
  double e0 = std::numeric_limits<double>::infinity();
  for (const auto& [tm, e] : minima) e0 = std::min(e0, e);

  constexpr double box_size = 4.0;
  rep_out.at_least("box_field_envelope", {{"b", 0.0}}, e0, e0, opt.energy_tol);
  const auto h0_blocks = materialize_sectors(h0, space);
  for (auto z : detail::default_field_boxes(g, opt)) {
    for (double b : opt.b_grid) {
      const double eb = ground_energy(h0_blocks, (-b) * box_spin(g, rep, z, 3), space, opt.solver);
      const double zz = static_cast<double>(z);
      rep_out.at_least("box_field_envelope", {{"box", zz}, {"b", b}}, eb + 0.5 * b * b, e0,
                       opt.energy_tol);
      if (b != 0.0)
        rep_out.at_most("chi_loc_secant", {{"box", zz}, {"b", b}},
                        2.0 * (e0 - eb) / (box_size * b * b), 1.0 / box_size,
                        2.0 * opt.energy_tol / (box_size * b * b));
    }
  }

  const double n = static_cast<double>(g.n_sites);
  for (double B : opt.b_grid) {
    double eB = std::numeric_limits<double>::infinity();
    for (const auto& [tm, e] : minima) eB = std::min(eB, e - B * 0.5 * tm);
    rep_out.at_least("uniform_field_envelope", {{"B", B}}, eB + n / 16.0 * B * B, e0,
                     opt.energy_tol);
  }

  const auto boxes_blocks = materialize_sectors(box_terms(g, rep), space);
  const double e0_boxes = ground_energy(boxes_blocks, OperatorSum{}, space, opt.solver);
  const auto draws = random_box_fields(g, opt.n_draws, opt.draw_range, opt.seed);
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const double eb =
        ground_energy(boxes_blocks, box_field_terms(g, rep, draws[d]), space, opt.solver);
    rep_out.at_least("box_field_draw", {{"draw", static_cast<double>(d)}}, eb, e0_boxes,
                     opt.energy_tol);
  }
  return rep_out;
}

/// Ground-state ice rule: every matrix element of every box spin component
/// between ground vectors vanishes, as do <S3_tot> and <S^2_tot>.
inline InequalityReport verify_ice_rule(const LatticeGraph& g, const SpinRep& rep,
                                        const VerifyOptions& opt = {}) {
  InequalityReport out;
  out.suite = "ice";
  out.seed = opt.seed;
  HilbertSpace space(g.n_sites, rep);
  const auto gs = ground_space(heisenberg_terms(g, rep), space, opt.solver);
  const auto tot = total_spin_ops(space);

  out.at_least("ground_space_found", {{"degeneracy", static_cast<double>(gs.degeneracy)}},
               static_cast<double>(gs.vectors.size()), 1.0, 0.0);
  for (std::size_t x = 0; x < g.boxes.size(); ++x) {
    for (int a = 1; a <= 3; ++a) {
      const auto op = materialize(box_spin(g, rep, x, a), space, true);
      double worst = 0.0;
      for (const auto& vi : gs.vectors) {
        const Vector w = op.apply(vi);
        for (const auto& vj : gs.vectors) worst = std::max(worst, std::abs(vj.dot(w)));
      }
      out.at_most("box_spin", {{"box", static_cast<double>(x)}, {"component", a}}, worst, 0.0,
                  opt.expectation_tol);
    }
  }
  double s3 = 0.0, s2 = 0.0;
  for (const auto& v : gs.vectors) {
    s3 = std::max(s3, std::abs(tot.s3_tot.expectation(v)));
    s2 = std::max(s2, std::abs(tot.s2_tot.expectation(v)));
  }
  out.at_most("total_s3", {}, s3, 0.0, opt.expectation_tol);
  out.at_most("total_s2", {}, s2, 0.0, opt.spin_zero_tol);
  return out;
}

struct ThermoVerification {
  InequalityReport report;
  std::vector<ThermoCurveRow> curve;
};

/// Finite-temperature bounds from full spectra: Z_{b_x} <= Z_0,
/// F(B) + (N/16) B^2 >= F(0), M_T(0) = 0 and chi_T(0) <= 1/8.
inline ThermoVerification verify_thermo_inequalities(const LatticeGraph& g, const SpinRep& rep,
                                                     const VerifyOptions& opt = {}) {
  ThermoVerification out;
  out.report.suite = "thermo";
  out.report.seed = opt.seed;
  HilbertSpace space(g.n_sites, rep);
  const auto spec0 = dense_spectrum(box_terms(g, rep), space, false, opt.solver.dense_threshold);
  const double n = static_cast<double>(g.n_sites);

  out.curve = thermo_scan(spec0, g.n_sites, opt.beta_grid, opt.B_grid);
  for (const auto& row : out.curve)
    out.report.at_least("free_energy_envelope", {{"beta", row.point.beta}, {"B", row.point.B}},
                        row.point.F + n / 16.0 * row.point.B * row.point.B,
                        row.point.F + n / 16.0 * row.point.B * row.point.B - row.bound_margin,
                        opt.energy_tol);
  for (double beta : opt.beta_grid) {
    const auto p = thermo_point(spec0, beta, 0.0, g.n_sites);
    out.report.at_most("magnetization_zero_field", {{"beta", beta}}, std::abs(p.M), 0.0,
                       opt.energy_tol);
    out.report.at_most("susceptibility_bound", {{"beta", beta}}, p.chi, 0.125, opt.energy_tol);
  }

  const auto draws = random_box_fields(g, opt.n_draws, opt.draw_range, opt.seed);
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto specb =
        dense_spectrum(box_terms(g, rep, &draws[d]), space, false, opt.solver.dense_threshold);
    for (double beta : opt.beta_grid) {
      const double lz0 = log_partition_function(spec0.eigenvalues, {}, beta, 0.0);
      const double lzb = log_partition_function(specb.eigenvalues, {}, beta, 0.0);
      // Z_b <= Z_0 (1 + tol)  <=>  ln Z_b <= ln Z_0 + ln(1 + tol)
      out.report.at_most("partition_function_draw", {{"draw", static_cast<double>(d)}, {"beta", beta}},
                         lzb, lz0, std::log1p(opt.z_rel_tol));
    }
  }
  return out;
}

/// Reflection construction on every cut of the lattice: factorization round
/// trip, the coefficient-matrix eigen equation for Hermitized ground
/// representatives, the trace energy formula, the |c| and c+/c- positivity
/// pipeline, the singlet product state and spin-zero projection.
inline InequalityReport verify_reflection(const LatticeGraph& g, const SpinRep& rep,
                                          const VerifyOptions& opt = {},
                                          std::vector<ReflectionCut> cuts = {}) {
  InequalityReport out;
  out.suite = "reflection";
  out.seed = opt.seed;
  if (cuts.empty()) cuts = find_reflection_cuts(g);
  out.at_least("cuts_found", {}, static_cast<double>(cuts.size()), 1.0, 0.0);
  if (cuts.empty()) return out;

  HilbertSpace space(g.n_sites, rep);
  const auto h_op = box_terms(g, rep);
  const auto h_full = materialize(h_op, space, true);
  const auto gs = ground_space(h_op, space, opt.solver);
  const auto tot = total_spin_ops(space);
  std::mt19937_64 rng(opt.seed);

  // Spectral projector onto S^2_tot = 0, independent of the coupled-basis route.
  const auto& m0 = space.sector(0);
  const auto s2_block = total_spin_squared_sector(space, 0);
  const auto s2_eig = dense_eigen(s2_block.to_dense(), true);
  Matrix p0_vectors(static_cast<Eigen::Index>(space.dim()), 0);
  for (Eigen::Index k = 0; k < s2_eig.values.size(); ++k) {
    if (s2_eig.values(k) > 0.5) break;
    p0_vectors.conservativeResize(Eigen::NoChange, p0_vectors.cols() + 1);
    p0_vectors.col(p0_vectors.cols() - 1).setZero();
    for (std::size_t i = 0; i < m0.size(); ++i)
      p0_vectors(static_cast<Eigen::Index>(m0[i]), p0_vectors.cols() - 1) =
          s2_eig.vectors(static_cast<Eigen::Index>(i), k);
  }
  auto spin_zero_part = [&](const Vector& v) -> Vector {
    return p0_vectors * (p0_vectors.adjoint() * v);
  };
  auto energy_of = [&](const Vector& v) { return h_full.expectation(v).real() / v.squaredNorm(); };

  for (std::size_t ci = 0; ci < cuts.size(); ++ci) {
    const double cut_id = static_cast<double>(ci);
    ReflectionFrame frame(space, cuts[ci]);
    const auto split = split_LR(g, rep, cuts[ci]);
    const auto sides = frame.side_hamiltonians(split, g.coupling_sign);
    const auto tm = frame.t_matrices();

    double round_trip = 0.0, trace_err = 0.0;
    for (std::size_t s = 0; s < opt.n_random_states; ++s) {
      const Vector psi = detail::random_state(space.dim(), rng);
      for (auto mode : {BasisMode::rotated, BasisMode::plain})
        round_trip = std::max(round_trip, (frame.assemble(frame.factorize(psi, mode)) - psi).cwiseAbs().maxCoeff());
      const auto c = frame.factorize(psi, BasisMode::rotated);
      const double e_trace = frame.trace_energy(c, sides, tm) + sides.offset;
      trace_err = std::max(trace_err, std::abs(e_trace - h_full.expectation(psi).real()));
    }
    out.at_most("round_trip", {{"cut", cut_id}}, round_trip, 0.0, 1e-12);
    out.at_most("trace_energy", {{"cut", cut_id}}, trace_err, 0.0, opt.energy_tol);

    const auto reps = hermitize_ground_space(gs, frame);
    const double e_bond = gs.energy - sides.offset;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      const std::map<std::string, double> p{{"cut", cut_id}, {"representative", static_cast<double>(r)}};
      const auto& c = reps[r];
      out.at_most("hermitian_representative", p, c.hermiticity_error(), 0.0, 1e-9);
      out.at_most("eigen_equation_residual", p,
                  frame.eigen_equation_residual(c, e_bond, sides, tm).norm(), 0.0, 1e-8);
      const Vector psi_c = frame.assemble(c);
      out.at_most("representative_residual", p, (h_full.apply(psi_c) - gs.energy * psi_c).norm(), 0.0,
                  1e-8);

      const auto abs_c = abs_transform(c);
      out.at_most("abs_energy", p, std::abs(energy_of(frame.assemble(abs_c)) - gs.energy), 0.0, 1e-8);
      out.at_most("abs_norm", p, std::abs(abs_c.norm_squared() - c.norm_squared()), 0.0, 1e-10);

      const auto split_c = psd_split(c);
      for (const auto* part : {&split_c.plus, &split_c.minus}) {
        const double nrm = std::sqrt(part->norm_squared());
        if (nrm < 1e-6) continue;
        auto pp = p;
        pp["part"] = part == &split_c.plus ? 1.0 : -1.0;
        CoefficientMatrix unit{part->entries / nrm, BasisMode::rotated};
        const Vector v = frame.assemble(unit);
        out.at_most("psd_in_ground_space", pp, (h_full.apply(v) - gs.energy * v).norm(), 0.0, 1e-8);
        out.at_least("psd_min_eigenvalue", pp, min_eigenvalue(unit), 0.0, 1e-10);
        out.at_least("psd_trace", pp, unit.trace().real(), 1e-6, 0.0);
      }
    }

    // |c| never raises the energy of a Hermitian coefficient matrix.
    for (std::size_t s = 0; g.coupling_sign > 0 && s < opt.n_random_states; ++s) {
      Matrix a = detail::random_matrix(frame.side_dim(), rng, true);
      CoefficientMatrix c{0.5 * (a + a.adjoint()), BasisMode::rotated};
      c.entries /= std::sqrt(c.norm_squared());
      const double e_c = energy_of(frame.assemble(c));
      const double e_abs = energy_of(frame.assemble(abs_transform(c)));
      out.at_most("abs_monotone", {{"cut", cut_id}, {"trial", static_cast<double>(s)}}, e_abs, e_c,
                  opt.energy_tol);
    }

    const Vector psi0 = frame.psi0();
    double overlap = 0.0;
    for (const auto& v : gs.vectors) overlap += std::norm(v.dot(psi0));
    out.at_least("psi0_ground_overlap", {{"cut", cut_id}}, std::sqrt(overlap), 1e-6, 0.0);
    out.at_most("psi0_spin_zero", {{"cut", cut_id}}, std::abs(tot.s2_tot.expectation(psi0)), 0.0, 1e-10);
    const auto c0 = frame.factorize(psi0, BasisMode::rotated);
    const auto dl = frame.side_dim();
    out.at_most("psi0_identity",
                {{"cut", cut_id}},
                (c0.entries - Matrix::Identity(dl, dl) / std::sqrt(static_cast<double>(dl))).cwiseAbs().maxCoeff(),
                0.0, 1e-12);

    const auto coupled = coupled_left_basis(frame.side_space());
    for (std::size_t s = 0; s < opt.n_random_states; ++s) {
      Matrix a = detail::random_matrix(dl, rng, s % 2 == 1);
      CoefficientMatrix c{a * a.adjoint(), BasisMode::rotated};
      c.entries /= std::sqrt(c.norm_squared());
      const auto proj = spin_zero_project(c, coupled);
      const std::map<std::string, double> p{{"cut", cut_id}, {"trial", static_cast<double>(s)}};
      out.at_least("spin_zero_psd", p, min_eigenvalue(proj), 0.0, 1e-10);
      const Vector direct = spin_zero_part(frame.assemble(c));
      out.at_most("spin_zero_spectral", p, (frame.assemble(proj) - direct).norm(), 0.0, 1e-9);
      out.at_most("spin_zero_s2", p, std::abs(tot.s2_tot.expectation(frame.assemble(proj))), 0.0, 1e-9);
    }
  }
  return out;
}

}  // namespace cbed
