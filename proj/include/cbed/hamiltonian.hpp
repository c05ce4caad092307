#pragma once

#include "cbed/lattice.hpp"
#include "cbed/spin_algebra.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbed {

/// Field b_x on box x, in natural units.
class BoxFieldAssignment {
 public:
  BoxFieldAssignment() = default;
  explicit BoxFieldAssignment(std::map<std::size_t, double> values) : values_(std::move(values)) {
    for (const auto& [box, b] : values_)
      if (!std::isfinite(b))
        throw std::invalid_argument("BoxFieldAssignment: field on box " + std::to_string(box) +
                                    " is not finite");
  }

  /// b_x = B/2 on every box, the box form of a uniform field B on all spins.
  static BoxFieldAssignment uniform(const LatticeGraph& g, double B) {
    std::map<std::size_t, double> v;
    for (std::size_t x = 0; x < g.boxes.size(); ++x) v[x] = 0.5 * B;
    return BoxFieldAssignment(std::move(v));
  }

  double at(std::size_t box) const {
    auto it = values_.find(box);
    return it == values_.end() ? 0.0 : it->second;
  }

  void validate(const LatticeGraph& g) const {
    for (const auto& [box, b] : values_)
      if (box >= g.boxes.size())
        throw std::invalid_argument("BoxFieldAssignment: box " + std::to_string(box) +
                                    " does not exist");
  }

  /// (1/2) sum_x b_x^2
  double constant() const {
    double c = 0.0;
    for (const auto& [box, b] : values_) c += 0.5 * b * b;
    return c;
  }

  const std::map<std::size_t, double>& values() const { return values_; }

 private:
  std::map<std::size_t, double> values_;
};

inline std::vector<std::size_t> box_sites(const LatticeGraph& g, std::size_t box) {
  const auto& s = g.boxes.at(box).sites;
  return {s.begin(), s.end()};
}

/// sum over bonds of J s_i . s_j
inline OperatorSum heisenberg_terms(const LatticeGraph& g, const SpinRep& rep) {
  OperatorSum h;
  for (const auto& b : hamiltonian_bonds(g)) h += b.coupling * spin_dot(rep, b.i, b.j);
  return h;
}

/// (1/2) sum_x (s1 + s2 + s3 + s4)_x^2, with the third-component square of
/// box x replaced by (S3_x - b_x)^2 when fields are given. Bonds outside
/// every box are added in bond form.
inline OperatorSum box_terms(const LatticeGraph& g, const SpinRep& rep,
                             const BoxFieldAssignment* fields = nullptr) {
  if (fields) fields->validate(g);
  OperatorSum h;
  for (std::size_t x = 0; x < g.boxes.size(); ++x) {
    const auto sites = box_sites(g, x);
    auto s1 = spin_component_sum(rep, sites, 1);
    auto s2 = spin_component_sum(rep, sites, 2);
    auto s3 = spin_component_sum(rep, sites, 3);
    if (fields) s3 = s3 - fields->at(x);
    h += (0.5 * g.coupling_sign) * (s1 * s1 + s2 * s2 + s3 * s3);
  }
  for (const auto& b : g.extra_bonds) h += b.coupling * spin_dot(rep, b.i, b.j);
  return h;
}

/// The field-dependent part of box_terms(g, rep, &fields), expanded:
/// sign * sum_x (b_x^2 / 2 - b_x (S3)_x). Diagonal in the product basis.
inline OperatorSum box_field_terms(const LatticeGraph& g, const SpinRep& rep,
                                   const BoxFieldAssignment& fields) {
  fields.validate(g);
  OperatorSum h;
  for (std::size_t x = 0; x < g.boxes.size(); ++x) {
    const double b = fields.at(x);
    if (b == 0.0) continue;
    h += (-g.coupling_sign * b) * spin_component_sum(rep, box_sites(g, x), 3);
    h += 0.5 * g.coupling_sign * b * b;
  }
  return h;
}

namespace detail {
inline void check_space(const LatticeGraph& g, const HilbertSpace& space) {
  if (space.n_sites() != g.n_sites)
    throw std::invalid_argument("Hilbert space has " + std::to_string(space.n_sites()) +
                                " sites but the lattice has " + std::to_string(g.n_sites));
}
}  // namespace detail

inline SparseOperator build_H_AF(const LatticeGraph& g, const HilbertSpace& space) {
  detail::check_space(g, space);
  return materialize(heisenberg_terms(g, space.rep()), space, true);
}

inline SparseOperator build_H_boxes(const LatticeGraph& g, const HilbertSpace& space,
                                    const BoxFieldAssignment* fields = nullptr) {
  detail::check_space(g, space);
  return materialize(box_terms(g, space.rep(), fields), space, true);
}

/// Constant separating the box form from the bond form:
/// H_boxes = H_AF + 2 s(s+1) N_box (times the coupling sign).
inline double box_form_offset(const LatticeGraph& g, const SpinRep& rep) {
  return g.coupling_sign * 2.0 * rep.casimir() * static_cast<double>(g.boxes.size());
}

/// Total S^a of one box.
inline OperatorSum box_spin(const LatticeGraph& g, const SpinRep& rep, std::size_t box,
                            int component) {
  return spin_component_sum(rep, box_sites(g, box), component);
}

/// Bond-form Hamiltonian split across a cut. H_left and H_right hold the
/// bonds wholly inside each half (the s1.s2 and s3.s4 bonds of cut boxes
/// included); H_cross = sum over cut boxes of (s1 + s2).(s3 + s4).
/// H_left + H_right + H_cross = H_boxes - offset.
struct LRSplit {
  OperatorSum h_left;
  OperatorSum h_right;
  OperatorSum h_cross;
  double offset = 0.0;
};

inline LRSplit split_LR(const LatticeGraph& g, const SpinRep& rep, const ReflectionCut& cut) {
  if (cut.n_sites() != g.n_sites)
    throw std::invalid_argument("split_LR: cut does not belong to this lattice");
  std::vector<int> side(g.n_sites, -1);
  for (auto s : cut.left_sites) side[s] = 0;
  for (auto s : cut.right_sites) side[s] = 1;
  for (auto s : side)
    if (s < 0) throw std::invalid_argument("split_LR: cut does not cover every site");

  LRSplit out;
  for (const auto& b : hamiltonian_bonds(g)) {
    if (side[b.i] != side[b.j]) {
      // crossing bonds must come from cut boxes; they are rebuilt below
      bool ok = false;
      for (const auto& cb : cut.cut_boxes) {
        const auto& s = g.boxes[cb.box].sites;
        ok = ok || (std::find(s.begin(), s.end(), b.i) != s.end() &&
                    std::find(s.begin(), s.end(), b.j) != s.end());
      }
      if (!ok) throw std::invalid_argument("split_LR: bond crosses the cut outside a cut box");
      continue;
    }
    (side[b.i] == 0 ? out.h_left : out.h_right) += b.coupling * spin_dot(rep, b.i, b.j);
  }
  for (const auto& cb : cut.cut_boxes) {
    std::vector<std::size_t> l{cb.left_pair[0], cb.left_pair[1]};
    std::vector<std::size_t> r{cb.right_pair[0], cb.right_pair[1]};
    for (int a = 1; a <= 3; ++a)
      out.h_cross += g.coupling_sign * (spin_component_sum(rep, l, a) * spin_component_sum(rep, r, a));
  }
  out.offset = box_form_offset(g, rep);
  return out;
}

/// Site relabeling that places one half of a cut on its own space: the i-th
/// site of `sites` becomes site i.
inline std::vector<std::ptrdiff_t> side_site_map(std::size_t n_sites,
                                                 const std::vector<std::size_t>& sites) {
  std::vector<std::ptrdiff_t> map(n_sites, -1);
  for (std::size_t i = 0; i < sites.size(); ++i) map[sites[i]] = static_cast<std::ptrdiff_t>(i);
  return map;
}

}  // namespace cbed
