#pragma once

#include "cbed/sparse_operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbed {

/// Spin-s representation, stored as the integer 2s.
class SpinRep {
 public:
  explicit SpinRep(int twice_s) : twice_s_(twice_s) {
    if (twice_s < 1)
      throw std::invalid_argument("SpinRep: 2s must be a positive integer, got " +
                                  std::to_string(twice_s));
  }

  /// Accepts s as a double (0.5, 1, 1.5, ...).
  static SpinRep from_value(double s) {
    double t = 2.0 * s;
    if (!(t >= 1.0) || std::abs(t - std::round(t)) > 1e-12)
      throw std::invalid_argument("SpinRep: s must be a positive half-integer");
    return SpinRep(static_cast<int>(std::lround(t)));
  }

  int twice_s() const { return twice_s_; }
  double s() const { return 0.5 * twice_s_; }
  std::size_t local_dim() const { return static_cast<std::size_t>(twice_s_) + 1; }
  /// s(s+1)
  double casimir() const { return s() * (s() + 1.0); }
  /// m value of local basis digit k (m descending: digit 0 is m = s).
  double m_of_digit(std::size_t k) const { return s() - static_cast<double>(k); }

  bool operator==(const SpinRep&) const = default;

 private:
  int twice_s_;
};

struct SpinMatrices {
  Matrix s1, s2, s3, splus, sminus;
};

/// Standard ladder construction in the |s,m> basis, m descending.
inline SpinMatrices spin_matrices(const SpinRep& rep) {
  const auto d = static_cast<Eigen::Index>(rep.local_dim());
  const double s = rep.s();
  SpinMatrices out;
  out.s3 = Matrix::Zero(d, d);
  out.splus = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double m = rep.m_of_digit(static_cast<std::size_t>(k));
    out.s3(k, k) = m;
    // S+ |s,m> = sqrt(s(s+1) - m(m+1)) |s,m+1>, and m+1 sits at digit k-1
    if (k > 0) out.splus(k - 1, k) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  out.sminus = out.splus.adjoint();
  out.s1 = 0.5 * (out.splus + out.sminus);
  out.s2 = (out.splus - out.sminus) / cplx(0.0, 2.0);
  return out;
}

/// Product basis of n spins. Site 0 is the most significant digit in base
/// 2s+1; digit k means m = s - k.
class HilbertSpace {
 public:
  HilbertSpace(std::size_t n_sites, SpinRep rep) : n_sites_(n_sites), rep_(rep) {
    if (n_sites == 0) throw std::invalid_argument("HilbertSpace: no sites");
    const std::size_t d = rep.local_dim();
    dim_ = 1;
    strides_.assign(n_sites, 0);
    for (std::size_t i = n_sites; i-- > 0;) {
      strides_[i] = dim_;
      if (dim_ > std::numeric_limits<std::size_t>::max() / d / 4)
        throw std::invalid_argument("HilbertSpace: dimension overflow");
      dim_ *= d;
    }
    if (dim_ > (std::size_t{1} << 24))
      throw std::invalid_argument("HilbertSpace: dimension too large for desk-scale ED");
    two_m_.resize(dim_);
    for (std::size_t idx = 0; idx < dim_; ++idx) {
      int digits = 0;
      for (std::size_t i = 0; i < n_sites; ++i)
        digits += static_cast<int>(digit(idx, i));
      two_m_[idx] = static_cast<int>(n_sites) * rep.twice_s() - 2 * digits;
      sectors_[two_m_[idx]].push_back(idx);
    }
  }

  std::size_t n_sites() const { return n_sites_; }
  const SpinRep& rep() const { return rep_; }
  std::size_t local_dim() const { return rep_.local_dim(); }
  std::size_t dim() const { return dim_; }
  std::size_t stride(std::size_t site) const { return strides_.at(site); }

  std::size_t digit(std::size_t index, std::size_t site) const {
    return (index / strides_[site]) % rep_.local_dim();
  }

  /// Twice the total S3 eigenvalue of a product state.
  int two_m(std::size_t index) const { return two_m_[index]; }

  /// Sector map keyed by 2*m_tot, ascending.
  const std::map<int, std::vector<std::size_t>>& sectors() const { return sectors_; }

  const std::vector<std::size_t>& sector(int two_m) const {
    auto it = sectors_.find(two_m);
    if (it == sectors_.end())
      throw std::out_of_range("HilbertSpace: no sector with 2m = " + std::to_string(two_m));
    return it->second;
  }

  std::size_t index_of(const std::vector<std::size_t>& digits) const {
    if (digits.size() != n_sites_)
      throw std::invalid_argument("HilbertSpace::index_of: wrong digit count");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n_sites_; ++i) idx += digits[i] * strides_[i];
    return idx;
  }

  Vector basis_state(std::size_t index) const {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return v;
  }

 private:
  std::size_t n_sites_;
  SpinRep rep_;
  std::size_t dim_ = 1;
  std::vector<std::size_t> strides_;
  std::vector<int> two_m_;
  std::map<int, std::vector<std::size_t>> sectors_;
};

/// Partition of the product basis by total S3.
inline const std::map<int, std::vector<std::size_t>>& sector_decomposition(
    const HilbertSpace& space) {
  return space.sectors();
}

/// A product of single-site operators. Factors act right to left, so the
/// last factor is applied first; a site may appear more than once.
struct SiteFactor {
  std::size_t site;
  Matrix local;
};

struct ProductTerm {
  cplx coefficient = 1.0;
  std::vector<SiteFactor> factors;
};

/// Symbolic sum of site-operator products plus a constant. Materialized on a
/// HilbertSpace (optionally a single S3 sector) on demand, so the same
/// expression can be placed on the full lattice or on one side of a cut.
class OperatorSum {
 public:
  OperatorSum() = default;
  explicit OperatorSum(double constant) : constant_(constant) {}

  static OperatorSum site(std::size_t site, const Matrix& local, cplx coef = 1.0) {
    OperatorSum o;
    o.terms_.push_back({coef, {{site, local}}});
    return o;
  }

  const std::vector<ProductTerm>& terms() const { return terms_; }
  double constant() const { return constant_; }

  OperatorSum& operator+=(const OperatorSum& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }

  OperatorSum& operator+=(double c) {
    constant_ += c;
    return *this;
  }

  OperatorSum& operator*=(double a) {
    for (auto& t : terms_) t.coefficient *= a;
    constant_ *= a;
    return *this;
  }

  friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
  friend OperatorSum operator+(OperatorSum a, double c) { return a += c; }
  friend OperatorSum operator-(OperatorSum a, const OperatorSum& b) {
    OperatorSum nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend OperatorSum operator-(OperatorSum a, double c) { return a += -c; }
  friend OperatorSum operator*(double a, OperatorSum b) { return b *= a; }

  /// Operator product; (A + a)(B + b) expands with constants as identity terms.
  friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
    OperatorSum out;
    for (const auto& ta : a.terms_) {
      for (const auto& tb : b.terms_) {
        ProductTerm t;
        t.coefficient = ta.coefficient * tb.coefficient;
        t.factors = ta.factors;
        t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
        out.terms_.push_back(std::move(t));
      }
    }
    if (b.constant_ != 0.0)
      for (auto t : a.terms_) {
        t.coefficient *= b.constant_;
        out.terms_.push_back(std::move(t));
      }
    if (a.constant_ != 0.0)
      for (auto t : b.terms_) {
        t.coefficient *= a.constant_;
        out.terms_.push_back(std::move(t));
      }
    out.constant_ = a.constant_ * b.constant_;
    return out;
  }

  /// Renames sites; used to move one side of a cut onto its own space.
  OperatorSum relabeled(const std::vector<std::ptrdiff_t>& site_map) const {
    OperatorSum out(constant_);
    for (auto t : terms_) {
      for (auto& f : t.factors) {
        if (f.site >= site_map.size() || site_map[f.site] < 0)
          throw std::invalid_argument("OperatorSum::relabeled: site not mapped");
        f.site = static_cast<std::size_t>(site_map[f.site]);
      }
      out.terms_.push_back(std::move(t));
    }
    return out;
  }

  std::size_t max_site() const {
    std::size_t m = 0;
    for (const auto& t : terms_)
      for (const auto& f : t.factors) m = std::max(m, f.site);
    return m;
  }

 private:
  std::vector<ProductTerm> terms_;
  double constant_ = 0.0;
};

namespace detail {

/// Column of the materialized operator for basis state `col`, as a merged
/// list of (global row, value).
inline void apply_terms_to_basis_state(const OperatorSum& op, const HilbertSpace& space,
                                       std::size_t col,
                                       std::vector<std::pair<std::size_t, cplx>>& out) {
  out.clear();
  std::vector<std::pair<std::size_t, cplx>> cur, next;
  for (const auto& term : op.terms()) {
    cur.assign(1, {col, term.coefficient});
    for (auto f = term.factors.rbegin(); f != term.factors.rend(); ++f) {
      if (f->site >= space.n_sites())
        throw std::invalid_argument("OperatorSum: site index outside the space");
      const auto d = static_cast<Eigen::Index>(space.local_dim());
      if (f->local.rows() != d || f->local.cols() != d)
        throw std::invalid_argument("OperatorSum: local matrix has wrong dimension");
      next.clear();
      const std::size_t stride = space.stride(f->site);
      for (const auto& [idx, amp] : cur) {
        const auto dg = static_cast<Eigen::Index>(space.digit(idx, f->site));
        for (Eigen::Index r = 0; r < d; ++r) {
          const cplx m = f->local(r, dg);
          if (m == cplx(0.0)) continue;
          const std::size_t nidx = idx - static_cast<std::size_t>(dg) * stride +
                                   static_cast<std::size_t>(r) * stride;
          next.emplace_back(nidx, amp * m);
        }
      }
      std::swap(cur, next);
      if (cur.empty()) break;
    }
    out.insert(out.end(), cur.begin(), cur.end());
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < out.size();) {
    std::size_t j = i;
    cplx sum = 0.0;
    while (j < out.size() && out[j].first == out[i].first) sum += out[j++].second;
    if (std::abs(sum) > 1e-14) out[w++] = {out[i].first, sum};
    i = j;
  }
  out.resize(w);
}

}  // namespace detail

/// Materializes the operator on the full space.
inline SparseOperator materialize(const OperatorSum& op, const HilbertSpace& space,
                                  bool hermitian = false) {
  std::vector<Triplet> t;
  std::vector<std::pair<std::size_t, cplx>> col;
  for (std::size_t c = 0; c < space.dim(); ++c) {
    detail::apply_terms_to_basis_state(op, space, c, col);
    for (const auto& [r, v] : col) t.push_back({r, c, v});
  }
  return SparseOperator(space.dim(), t, op.constant(), hermitian);
}

/// Materializes the block of an S3-conserving operator on one sector. Local
/// index i corresponds to space.sector(two_m)[i].
inline SparseOperator materialize_sector(const OperatorSum& op, const HilbertSpace& space,
                                         int two_m, bool hermitian = false) {
  const auto& basis = space.sector(two_m);
  std::vector<std::ptrdiff_t> local(space.dim(), -1);
  for (std::size_t i = 0; i < basis.size(); ++i)
    local[basis[i]] = static_cast<std::ptrdiff_t>(i);
  std::vector<Triplet> t;
  std::vector<std::pair<std::size_t, cplx>> col;
  for (std::size_t c = 0; c < basis.size(); ++c) {
    detail::apply_terms_to_basis_state(op, space, basis[c], col);
    for (const auto& [r, v] : col) {
      if (local[r] < 0)
        throw std::invalid_argument(
            "materialize_sector: operator does not conserve total S3");
      t.push_back({static_cast<std::size_t>(local[r]), c, v});
    }
  }
  return SparseOperator(basis.size(), t, op.constant(), hermitian);
}

/// Embeds a single-site matrix: acts as `local` on `site`, identity elsewhere.
inline SparseOperator site_operator(const HilbertSpace& space, std::size_t site,
                                    const Matrix& local) {
  if (site >= space.n_sites())
    throw std::invalid_argument("site_operator: site index out of range");
  const auto d = static_cast<Eigen::Index>(space.local_dim());
  if (local.rows() != d || local.cols() != d)
    throw std::invalid_argument("site_operator: local matrix must be (2s+1)x(2s+1)");
  return materialize(OperatorSum::site(site, local), space);
}

/// Symbolic sum_i s^a_i over the given sites (a = 1, 2, 3).
inline OperatorSum spin_component_sum(const SpinRep& rep, const std::vector<std::size_t>& sites,
                                      int component) {
  const auto m = spin_matrices(rep);
  const Matrix& local = component == 1 ? m.s1 : component == 2 ? m.s2 : m.s3;
  if (component < 1 || component > 3)
    throw std::invalid_argument("spin_component_sum: component must be 1, 2 or 3");
  OperatorSum out;
  for (auto s : sites) out += OperatorSum::site(s, local);
  return out;
}

/// Symbolic (sum_i s_i)^2 over the given sites.
inline OperatorSum spin_squared(const SpinRep& rep, const std::vector<std::size_t>& sites) {
  OperatorSum out;
  for (int a = 1; a <= 3; ++a) {
    auto sa = spin_component_sum(rep, sites, a);
    out += sa * sa;
  }
  return out;
}

/// Symbolic s_i . s_j
inline OperatorSum spin_dot(const SpinRep& rep, std::size_t i, std::size_t j) {
  const auto m = spin_matrices(rep);
  return OperatorSum::site(i, m.s1) * OperatorSum::site(j, m.s1) +
         OperatorSum::site(i, m.s2) * OperatorSum::site(j, m.s2) +
         OperatorSum::site(i, m.s3) * OperatorSum::site(j, m.s3);
}

inline std::vector<std::size_t> all_sites(const HilbertSpace& space) {
  std::vector<std::size_t> s(space.n_sites());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
  return s;
}

struct TotalSpinOps {
  SparseOperator s3_tot;
  SparseOperator s2_tot;  // (sum_i s_i)^2
};

inline TotalSpinOps total_spin_ops(const HilbertSpace& space) {
  const auto sites = all_sites(space);
  TotalSpinOps out;
  out.s3_tot = materialize(spin_component_sum(space.rep(), sites, 3), space, true);
  out.s2_tot = materialize(spin_squared(space.rep(), sites), space, true);
  return out;
}

/// Block of the total spin squared on one S3 sector.
inline SparseOperator total_spin_squared_sector(const HilbertSpace& space, int two_m) {
  return materialize_sector(spin_squared(space.rep(), all_sites(space)), space, two_m, true);
}

/// Local matrix of the pi rotation about the 2-axis: |s,m> -> (-1)^(s-m) |s,-m>.
inline Matrix rotation_matrix(const SpinRep& rep) {
  const auto d = static_cast<Eigen::Index>(rep.local_dim());
  Matrix r = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k)  // s - m = k for digit k
    r(d - 1 - k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return r;
}

/// Pi rotation about the 2-axis applied on the listed sites. Real signed
/// permutation matrix.
inline SparseOperator rotation_operator(const HilbertSpace& space,
                                        const std::vector<std::size_t>& sites) {
  const std::size_t d = space.local_dim();
  std::vector<Triplet> t;
  t.reserve(space.dim());
  for (std::size_t c = 0; c < space.dim(); ++c) {
    std::size_t r = c;
    int sign = 1;
    for (auto s : sites) {
      if (s >= space.n_sites())
        throw std::invalid_argument("rotation_operator: site index out of range");
      const std::size_t k = space.digit(c, s);
      r = r - k * space.stride(s) + (d - 1 - k) * space.stride(s);
      if (k % 2 == 1) sign = -sign;
    }
    t.push_back({r, c, static_cast<double>(sign)});
  }
  return SparseOperator(space.dim(), t);
}

/// Norm of [A, B] applied to v.
inline double commutator_norm(const SparseOperator& a, const SparseOperator& b,
                              const Vector& v) {
  return (a.apply(b.apply(v)) - b.apply(a.apply(v))).norm();
}

}  // namespace cbed
