#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace cbed {

enum class LatticeKind { checkerboard, single_box, all_crossed, cubic_variant, chain };

inline std::string to_string(LatticeKind k) {
  switch (k) {
    case LatticeKind::checkerboard: return "checkerboard";
    case LatticeKind::single_box: return "single_box";
    case LatticeKind::all_crossed: return "all_crossed";
    case LatticeKind::cubic_variant: return "cubic_variant";
    case LatticeKind::chain: return "chain";
  }
  return "unknown";
}

inline LatticeKind lattice_kind_from_string(const std::string& s) {
  if (s == "checkerboard") return LatticeKind::checkerboard;
  if (s == "single_box" || s == "single-box") return LatticeKind::single_box;
  if (s == "all_crossed" || s == "all-crossed") return LatticeKind::all_crossed;
  if (s == "cubic_variant" || s == "cubic-variant") return LatticeKind::cubic_variant;
  if (s == "chain") return LatticeKind::chain;
  throw std::invalid_argument("unknown lattice kind '" + s + "'");
}

/// Raised for lattice specifications that violate a geometric constraint.
class LatticeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LatticeSpec {
  LatticeKind kind = LatticeKind::checkerboard;
  std::vector<std::size_t> extent{4, 2};
  std::vector<bool> periodic{true, true};
  /// Plaquette (x, y[, z]) is crossed when (x + y [+ z]) % 2 == crossed_parity.
  int crossed_parity = 0;
  /// Multiplies every coupling; -1 turns the antiferromagnet into a ferromagnet.
  double coupling_sign = 1.0;
};

struct Bond {
  std::size_t i;
  std::size_t j;
  double coupling;
  /// Owning box for checkerboard bonds, -1 for bonds not tied to one box.
  std::ptrdiff_t box;
};

struct Box {
  /// Corners counter-clockwise from the lower-left one.
  std::array<std::size_t, 4> sites;
  /// Lower-left corner of the crossed plaquette.
  std::vector<std::size_t> position;
};

struct LatticeGraph {
  LatticeKind kind = LatticeKind::checkerboard;
  std::vector<std::size_t> extent;
  std::vector<bool> periodic;
  int crossed_parity = 0;
  double coupling_sign = 1.0;
  std::size_t n_sites = 0;
  std::vector<std::vector<std::size_t>> coords;
  std::vector<Bond> bonds;
  std::vector<Box> boxes;
  /// Bonds not contained in any box; part of the Hamiltonian outside the
  /// box-square form (interlayer bonds of the cubic variant, chain bonds).
  std::vector<Bond> extra_bonds;

  std::size_t site_index(const std::vector<std::size_t>& c) const {
    std::size_t idx = 0, mul = 1;
    for (std::size_t a = 0; a < c.size(); ++a) {
      idx += c[a] * mul;
      mul *= extent[a];
    }
    return idx;
  }

  /// Number of boxes each site belongs to.
  std::vector<std::size_t> box_membership() const {
    std::vector<std::size_t> count(n_sites, 0);
    for (const auto& b : boxes)
      for (auto s : b.sites) ++count[s];
    return count;
  }
};

namespace detail {

inline std::vector<std::size_t> wrap_coord(const LatticeGraph& g, std::vector<std::size_t> c) {
  for (std::size_t a = 0; a < c.size(); ++a)
    if (c[a] >= g.extent[a]) c[a] -= g.extent[a];
  return c;
}

inline void init_sites(LatticeGraph& g) {
  g.n_sites = 1;
  for (auto e : g.extent) g.n_sites *= e;
  g.coords.resize(g.n_sites);
  for (std::size_t idx = 0; idx < g.n_sites; ++idx) {
    std::vector<std::size_t> c(g.extent.size());
    std::size_t r = idx;
    for (std::size_t a = 0; a < g.extent.size(); ++a) {
      c[a] = r % g.extent[a];
      r /= g.extent[a];
    }
    g.coords[idx] = c;
  }
}

/// Crossed squares in the (x, y) plane of every layer.
inline void add_plaquette_boxes(LatticeGraph& g, bool all_plaquettes) {
  const std::size_t nx = g.periodic[0] ? g.extent[0] : g.extent[0] - 1;
  const std::size_t ny = g.periodic[1] ? g.extent[1] : g.extent[1] - 1;
  const std::size_t nz = g.extent.size() > 2 ? g.extent[2] : 1;
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      for (std::size_t x = 0; x < nx; ++x) {
        std::size_t parity = x + y + (g.extent.size() > 2 ? z : 0);
        if (!all_plaquettes && static_cast<int>(parity % 2) != g.crossed_parity) continue;
        auto at = [&](std::size_t dx, std::size_t dy) {
          std::vector<std::size_t> c{x + dx, y + dy};
          if (g.extent.size() > 2) c.push_back(z);
          return g.site_index(wrap_coord(g, c));
        };
        Box b;
        b.sites = {at(0, 0), at(1, 0), at(1, 1), at(0, 1)};
        b.position = {x, y};
        if (g.extent.size() > 2) b.position.push_back(z);
        g.boxes.push_back(b);
      }
    }
  }
}

/// Box bonds with coupling equal to how many boxes share the geometric edge.
/// Edge identity is geometric (corner + direction), so on an extent-2 periodic
/// axis two distinct bonds may join the same pair of sites.
inline void add_box_bonds(LatticeGraph& g) {
  if (g.kind == LatticeKind::checkerboard || g.kind == LatticeKind::single_box ||
      g.kind == LatticeKind::cubic_variant) {
    for (std::size_t bi = 0; bi < g.boxes.size(); ++bi) {
      const auto& s = g.boxes[bi].sites;
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b)
          g.bonds.push_back({s[a], s[b], g.coupling_sign, static_cast<std::ptrdiff_t>(bi)});
    }
    return;
  }
  // all_crossed: edges shared by neighbouring boxes are merged.
  using Key = std::tuple<std::size_t, std::size_t, int>;  // lower corner site, partner, kind
  std::map<Key, double> edges;
  for (const auto& box : g.boxes) {
    const auto& s = box.sites;
    edges[{s[0], s[1], 0}] += 1.0;  // bottom
    edges[{s[3], s[2], 0}] += 1.0;  // top
    edges[{s[0], s[3], 1}] += 1.0;  // left
    edges[{s[1], s[2], 1}] += 1.0;  // right
    edges[{s[0], s[2], 2}] += 1.0;  // diagonals
    edges[{s[1], s[3], 3}] += 1.0;
  }
  for (const auto& [k, mult] : edges)
    g.bonds.push_back({std::get<0>(k), std::get<1>(k), mult * g.coupling_sign, -1});
}

inline void check_extent(const LatticeSpec& spec, std::size_t dims) {
  if (spec.extent.size() != dims)
    throw LatticeError(to_string(spec.kind) + " needs " + std::to_string(dims) +
                       " extents, got " + std::to_string(spec.extent.size()));
  if (spec.periodic.size() != dims)
    throw LatticeError(to_string(spec.kind) + " needs " + std::to_string(dims) +
                       " periodic flags, got " + std::to_string(spec.periodic.size()));
  for (std::size_t a = 0; a < dims; ++a)
    if (spec.extent[a] < 2)
      throw LatticeError("extent along axis " + std::to_string(a) + " must be at least 2, got " +
                         std::to_string(spec.extent[a]));
}

}  // namespace detail

/// Builds the lattice; site indexing is row-major with x fastest.
inline LatticeGraph build_lattice(const LatticeSpec& spec) {
  if (spec.crossed_parity != 0 && spec.crossed_parity != 1)
    throw LatticeError("crossed_parity must be 0 or 1");
  LatticeGraph g;
  g.kind = spec.kind;
  g.crossed_parity = spec.crossed_parity;
  g.coupling_sign = spec.coupling_sign;

  switch (spec.kind) {
    case LatticeKind::single_box: {
      g.extent = {2, 2};
      g.periodic = {false, false};
      g.crossed_parity = 0;
      detail::init_sites(g);
      detail::add_plaquette_boxes(g, true);
      detail::add_box_bonds(g);
      break;
    }
    case LatticeKind::checkerboard:
    case LatticeKind::cubic_variant: {
      const std::size_t dims = spec.kind == LatticeKind::checkerboard ? 2 : 3;
      detail::check_extent(spec, dims);
      for (std::size_t a = 0; a < dims; ++a)
        if (spec.periodic[a] && spec.extent[a] % 2 != 0)
          throw LatticeError("periodic axis " + std::to_string(a) +
                             " needs an even extent so the crossed plaquettes alternate, got " +
                             std::to_string(spec.extent[a]));
      g.extent = spec.extent;
      g.periodic = spec.periodic;
      detail::init_sites(g);
      detail::add_plaquette_boxes(g, false);
      detail::add_box_bonds(g);
      if (spec.kind == LatticeKind::cubic_variant) {
        // Interlayer bonds at doubled strength. Experimental reading of the
        // stacked 3D variant.
        const std::size_t nz = g.periodic[2] ? g.extent[2] : g.extent[2] - 1;
        for (std::size_t idx = 0; idx < g.n_sites; ++idx) {
          auto c = g.coords[idx];
          if (c[2] >= nz) continue;
          c[2] += 1;
          g.extra_bonds.push_back(
              {idx, g.site_index(detail::wrap_coord(g, c)), 2.0 * g.coupling_sign, -1});
        }
      }
      break;
    }
    case LatticeKind::all_crossed: {
      detail::check_extent(spec, 2);
      g.extent = spec.extent;
      g.periodic = spec.periodic;
      detail::init_sites(g);
      detail::add_plaquette_boxes(g, true);
      detail::add_box_bonds(g);
      break;
    }
    case LatticeKind::chain: {
      if (spec.extent.empty() || spec.extent[0] < 2)
        throw LatticeError("chain needs at least 2 sites");
      g.extent = {spec.extent[0]};
      g.periodic = {!spec.periodic.empty() && spec.periodic[0] && spec.extent[0] > 2};
      detail::init_sites(g);
      const std::size_t n = g.n_sites;
      for (std::size_t i = 0; i + 1 < n; ++i) g.extra_bonds.push_back({i, i + 1, g.coupling_sign, -1});
      if (g.periodic[0]) g.extra_bonds.push_back({n - 1, 0, g.coupling_sign, -1});
      break;
    }
  }

  for (const auto& b : g.bonds)
    if (b.i == b.j) throw LatticeError("bond joins a site to itself; increase the extent");
  for (const auto& box : g.boxes) {
    std::set<std::size_t> s(box.sites.begin(), box.sites.end());
    if (s.size() != 4) throw LatticeError("box has repeated sites; increase the extent");
  }
  return g;
}

/// All bonds entering the Heisenberg Hamiltonian.
inline std::vector<Bond> hamiltonian_bonds(const LatticeGraph& g) {
  std::vector<Bond> all = g.bonds;
  all.insert(all.end(), g.extra_bonds.begin(), g.extra_bonds.end());
  return all;
}

struct CutBox {
  std::size_t box;
  std::array<std::size_t, 2> left_pair;   // s1, s2
  std::array<std::size_t, 2> right_pair;  // s3 = mirror(s1), s4 = mirror(s2)
};

/// Mirror line through bonds (never sites) splitting the lattice into two
/// congruent halves.
struct ReflectionCut {
  std::size_t axis = 0;
  /// Line sits between coordinates position and position + 1 along axis.
  std::size_t position = 0;
  std::vector<std::size_t> left_sites;
  std::vector<std::size_t> right_sites;  // right_sites[i] = mirror(left_sites[i])
  /// Full involution on sites, left <-> right.
  std::vector<std::size_t> mirror;
  std::vector<CutBox> cut_boxes;

  std::size_t n_sites() const { return mirror.size(); }
  bool is_left(std::size_t site) const {
    return std::find(left_sites.begin(), left_sites.end(), site) != left_sites.end();
  }
};

namespace detail {

using BondKey = std::tuple<std::size_t, std::size_t, long long>;

inline std::multiset<BondKey> bond_multiset(const std::vector<Bond>& bonds,
                                            const std::vector<std::size_t>* relabel) {
  std::multiset<BondKey> out;
  for (const auto& b : bonds) {
    std::size_t i = relabel ? (*relabel)[b.i] : b.i;
    std::size_t j = relabel ? (*relabel)[b.j] : b.j;
    if (i > j) std::swap(i, j);
    out.insert({i, j, std::llround(b.coupling * 1e9)});
  }
  return out;
}

/// Fills cut boxes and checks the cut conditions. Returns false when the
/// mirror fails to preserve bonds or a bond crosses outside a box.
inline bool complete_cut(const LatticeGraph& g, ReflectionCut& cut, bool check_bonds) {
  std::vector<int> side(g.n_sites, -1);
  for (auto s : cut.left_sites) side[s] = 0;
  for (auto s : cut.right_sites) side[s] = 1;
  for (auto s : side)
    if (s < 0) return false;

  cut.cut_boxes.clear();
  std::vector<bool> box_is_cut(g.boxes.size(), false);
  for (std::size_t bi = 0; bi < g.boxes.size(); ++bi) {
    std::vector<std::size_t> l, r;
    for (auto s : g.boxes[bi].sites) (side[s] == 0 ? l : r).push_back(s);
    if (l.empty() || r.empty()) continue;
    if (l.size() != 2) return false;
    CutBox cb{bi, {l[0], l[1]}, {cut.mirror[l[0]], cut.mirror[l[1]]}};
    std::set<std::size_t> rs(r.begin(), r.end());
    if (!rs.count(cb.right_pair[0]) || !rs.count(cb.right_pair[1])) return false;
    cut.cut_boxes.push_back(cb);
    box_is_cut[bi] = true;
  }
  if (!check_bonds) return true;

  const auto bonds = hamiltonian_bonds(g);
  for (const auto& b : bonds) {
    if (side[b.i] == side[b.j]) continue;
    // Crossing bond: must be internal to a cut box.
    bool inside = false;
    for (const auto& cb : cut.cut_boxes) {
      const auto& s = g.boxes[cb.box].sites;
      if (std::find(s.begin(), s.end(), b.i) != s.end() &&
          std::find(s.begin(), s.end(), b.j) != s.end())
        inside = true;
    }
    if (!inside) return false;
  }
  return bond_multiset(bonds, nullptr) == bond_multiset(bonds, &cut.mirror);
}

}  // namespace detail

/// Cut from an explicit left/right split, paired index by index. Used for
/// lattices without the mirror geometry (e.g. a two-site dimer).
inline ReflectionCut make_cut(const LatticeGraph& g, const std::vector<std::size_t>& left,
                              const std::vector<std::size_t>& right) {
  if (left.size() != right.size() || left.size() + right.size() != g.n_sites)
    throw std::invalid_argument("make_cut: left and right must split all sites evenly");
  ReflectionCut cut;
  cut.left_sites = left;
  cut.right_sites = right;
  cut.mirror.assign(g.n_sites, g.n_sites);
  for (std::size_t i = 0; i < left.size(); ++i) {
    cut.mirror[left[i]] = right[i];
    cut.mirror[right[i]] = left[i];
  }
  for (auto m : cut.mirror)
    if (m >= g.n_sites) throw std::invalid_argument("make_cut: sites must partition the lattice");
  if (!detail::complete_cut(g, cut, false))
    throw std::invalid_argument("make_cut: a box is split unevenly by the cut");
  return cut;
}

/// Mirror cuts perpendicular to `axis` (0 = x, the default; 1 = y). Every
/// returned cut has been checked: the mirror maps the bond multiset onto
/// itself and every crossing bond belongs to a cut box. On a periodic axis
/// each cut consists of two lines and both sets of bisected boxes are listed.
inline std::vector<ReflectionCut> find_reflection_cuts(const LatticeGraph& g, std::size_t axis = 0) {
  std::vector<ReflectionCut> cuts;
  if (g.kind == LatticeKind::chain || axis >= g.extent.size() || axis > 1) return cuts;
  const std::size_t L = g.extent[axis];
  if (L % 2 != 0) return cuts;
  const bool periodic = g.periodic[axis];

  std::vector<std::size_t> positions;
  if (periodic)
    for (std::size_t k = 0; k < L / 2; ++k) positions.push_back(k);
  else
    positions.push_back(L / 2 - 1);

  for (auto k : positions) {
    ReflectionCut cut;
    cut.axis = axis;
    cut.position = k;
    cut.mirror.assign(g.n_sites, 0);
    auto mirror_coord = [&](std::size_t x) {
      if (periodic) return (2 * k + 1 + 2 * L - x) % L;
      return L - 1 - x;
    };
    auto on_left = [&](std::size_t x) {
      if (!periodic) return x <= k;
      // columns k+1-L/2 .. k (mod L)
      std::size_t shifted = (x + L - (k + 1 + L / 2) % L) % L;
      return shifted < L / 2;
    };
    for (std::size_t idx = 0; idx < g.n_sites; ++idx) {
      auto c = g.coords[idx];
      c[axis] = mirror_coord(c[axis]);
      cut.mirror[idx] = g.site_index(c);
    }
    for (std::size_t idx = 0; idx < g.n_sites; ++idx) {
      if (on_left(g.coords[idx][axis])) {
        cut.left_sites.push_back(idx);
        cut.right_sites.push_back(cut.mirror[idx]);
      }
    }
    if (cut.left_sites.size() * 2 != g.n_sites) continue;
    if (detail::complete_cut(g, cut, true)) cuts.push_back(std::move(cut));
  }
  return cuts;
}

}  // namespace cbed
