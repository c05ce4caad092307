#pragma once

#include "cbed/hamiltonian.hpp"
#include "cbed/lattice.hpp"
#include "cbed/solver.hpp"
#include "cbed/spin_algebra.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbed {

/// rotated: right factor in the pi-rotated mirror basis.
/// plain: same product basis on both sides.
enum class BasisMode { rotated, plain };

inline std::string to_string(BasisMode m) { return m == BasisMode::rotated ? "rotated" : "plain"; }

/// Amplitudes c_ab of a state over left (x) right product bases of a cut.
/// Rows index the left basis, columns the (possibly rotated) mirror basis.
struct CoefficientMatrix {
  Matrix entries;
  BasisMode mode = BasisMode::rotated;

  Eigen::Index dim() const { return entries.rows(); }
  double norm_squared() const { return entries.squaredNorm(); }
  cplx trace() const { return entries.trace(); }
  double hermiticity_error() const {
    return entries.size() ? (entries - entries.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  }
};

/// Real matrices of the pair spin (s1 + s2) of one cut box on the left basis:
/// t1, t3 are its 1- and 3-components, t2 is i times its 2-component.
struct TMatrices {
  std::vector<std::array<RealMatrix, 3>> per_box;
};

/// Real matrix elements of the two side Hamiltonians: h_left on the left
/// basis, h_right on the rotated mirror basis.
struct SideHamiltonians {
  RealMatrix h_left;
  RealMatrix h_right;
  double offset = 0.0;       // H_boxes - (H_left + H_right + H_cross)
  double cross_sign = 1.0;   // coupling sign of the crossing term
};

class ReflectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline RealMatrix assert_real(const Matrix& m, double tol, const char* what) {
  const double im = m.size() ? m.imag().cwiseAbs().maxCoeff() : 0.0;
  if (im > tol)
    throw ReflectionError(std::string(what) + " has imaginary residue " + std::to_string(im) +
                          "; basis convention broken");
  return m.real();
}
}  // namespace detail

/// Factorization machinery for one cut of one Hilbert space. Left basis
/// index a enumerates digits of left_sites in order (first site most
/// significant); the right basis uses the mirrored sites with the same digits.
class ReflectionFrame {
 public:
  ReflectionFrame(const HilbertSpace& space, ReflectionCut cut)
      : space_(space), cut_(std::move(cut)),
        side_(cut_.left_sites.size(), space.rep()) {
    if (cut_.n_sites() != space.n_sites())
      throw std::invalid_argument("ReflectionFrame: cut and space disagree on site count");
    if (cut_.left_sites.size() != cut_.right_sites.size())
      throw std::invalid_argument("ReflectionFrame: sides differ in size");
    const std::size_t d = space.local_dim();
    const std::size_t n = side_.dim();
    left_offset_.resize(n);
    right_offset_.resize(n);
    right_rot_offset_.resize(n);
    right_rot_sign_.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      std::size_t l = 0, r = 0, rr = 0;
      int sign = 1;
      for (std::size_t i = 0; i < side_.n_sites(); ++i) {
        const std::size_t k = side_.digit(a, i);
        l += k * space.stride(cut_.left_sites[i]);
        r += k * space.stride(cut_.right_sites[i]);
        rr += (d - 1 - k) * space.stride(cut_.right_sites[i]);
        if (k % 2 == 1) sign = -sign;
      }
      left_offset_[a] = l;
      right_offset_[a] = r;
      right_rot_offset_[a] = rr;
      right_rot_sign_[a] = sign;
    }
  }

  const HilbertSpace& space() const { return space_; }
  const ReflectionCut& cut() const { return cut_; }
  /// Hilbert space of one half, sites renumbered 0..n/2-1.
  const HilbertSpace& side_space() const { return side_; }
  Eigen::Index side_dim() const { return static_cast<Eigen::Index>(side_.dim()); }

  CoefficientMatrix factorize(const Vector& psi, BasisMode mode) const {
    check_vector(psi);
    const auto n = side_dim();
    CoefficientMatrix c{Matrix(n, n), mode};
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        c.entries(a, b) = amplitude_sign(b, mode) * psi(full_index(a, b, mode));
    return c;
  }

  Vector assemble(const CoefficientMatrix& c) const {
    const auto n = side_dim();
    if (c.entries.rows() != n || c.entries.cols() != n)
      throw std::invalid_argument("ReflectionFrame::assemble: coefficient matrix has wrong size");
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(space_.dim()));
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        psi(full_index(a, b, c.mode)) = amplitude_sign(b, c.mode) * c.entries(a, b);
    return psi;
  }

  /// Product of mirror-pair singlets, normalized. Its rotated coefficient
  /// matrix is the identity over sqrt(dim_L).
  Vector psi0() const {
    const auto n = side_dim();
    CoefficientMatrix c{Matrix::Identity(n, n) / std::sqrt(static_cast<double>(n)),
                        BasisMode::rotated};
    return assemble(c);
  }

  /// Crossing-term matrices for every cut box, asserted real.
  TMatrices t_matrices() const {
    const auto map = side_site_map(space_.n_sites(), cut_.left_sites);
    TMatrices out;
    for (const auto& cb : cut_.cut_boxes) {
      std::vector<std::size_t> pair{static_cast<std::size_t>(map[cb.left_pair[0]]),
                                    static_cast<std::size_t>(map[cb.left_pair[1]])};
      std::array<RealMatrix, 3> t;
      for (int a = 1; a <= 3; ++a) {
        Matrix m = materialize(spin_component_sum(side_.rep(), pair, a), side_).to_dense();
        if (a == 2) m *= cplx(0.0, 1.0);
        t[static_cast<std::size_t>(a - 1)] = detail::assert_real(m, 1e-12, "t matrix");
      }
      out.per_box.push_back(std::move(t));
    }
    return out;
  }

  /// h_left on the left basis and h_right on the rotated mirror basis.
  SideHamiltonians side_hamiltonians(const LRSplit& split, double cross_sign = 1.0) const {
    const auto lmap = side_site_map(space_.n_sites(), cut_.left_sites);
    const auto rmap = side_site_map(space_.n_sites(), cut_.right_sites);
    SideHamiltonians h;
    h.h_left = detail::assert_real(materialize(split.h_left.relabeled(lmap), side_).to_dense(),
                                   1e-12, "h_left");
    auto r = rotation_operator(side_, all_sites(side_)).to_dense();
    Matrix hr = materialize(split.h_right.relabeled(rmap), side_).to_dense();
    h.h_right = detail::assert_real(Matrix(r.adjoint() * hr * r), 1e-12, "h_right");
    h.offset = split.offset;
    h.cross_sign = cross_sign;
    return h;
  }

  /// h_L c + c h_R^T - sum_{a,y} t c t^T - E c
  Matrix eigen_equation_residual(const CoefficientMatrix& c, double energy,
                                 const SideHamiltonians& h, const TMatrices& t) const {
    if (c.mode != BasisMode::rotated)
      throw std::invalid_argument("eigen_equation_residual needs a rotated-mode matrix");
    const Matrix hl = h.h_left.cast<cplx>();
    const Matrix hr = h.h_right.cast<cplx>();
    Matrix res = hl * c.entries + c.entries * hr.transpose() - energy * c.entries;
    for (const auto& box : t.per_box)
      for (const auto& ta : box) {
        const Matrix tc = ta.cast<cplx>();
        res -= h.cross_sign * (tc * c.entries * tc.transpose());
      }
    return res;
  }

  /// Energy in bond form from the coefficient matrix:
  /// tr c c^dag h_L + tr c^dag c h_R^T - sum tr c^dag t c t^T. Add h.offset
  /// for the box form.
  double trace_energy(const CoefficientMatrix& c, const SideHamiltonians& h,
                      const TMatrices& t) const {
    if (c.mode != BasisMode::rotated)
      throw std::invalid_argument("trace_energy needs a rotated-mode matrix");
    const Matrix& m = c.entries;
    const Matrix hl = h.h_left.cast<cplx>();
    const Matrix hr = h.h_right.cast<cplx>();
    cplx e = (m * m.adjoint() * hl).trace() + (m.adjoint() * m * hr.transpose()).trace();
    for (const auto& box : t.per_box)
      for (const auto& ta : box) {
        const Matrix tc = ta.cast<cplx>();
        e -= h.cross_sign * (m.adjoint() * tc * m * tc.transpose()).trace();
      }
    return e.real();
  }

 private:
  void check_vector(const Vector& psi) const {
    if (static_cast<std::size_t>(psi.size()) != space_.dim())
      throw std::invalid_argument("ReflectionFrame: state has wrong dimension");
  }

  Eigen::Index full_index(Eigen::Index a, Eigen::Index b, BasisMode mode) const {
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    return static_cast<Eigen::Index>(
        left_offset_[ua] + (mode == BasisMode::rotated ? right_rot_offset_[ub] : right_offset_[ub]));
  }

  double amplitude_sign(Eigen::Index b, BasisMode mode) const {
    return mode == BasisMode::rotated ? right_rot_sign_[static_cast<std::size_t>(b)] : 1.0;
  }

  const HilbertSpace& space_;
  ReflectionCut cut_;
  HilbertSpace side_;
  std::vector<std::size_t> left_offset_, right_offset_, right_rot_offset_;
  std::vector<int> right_rot_sign_;
};

/// Re-expresses a ground space in states with Hermitian rotated-mode
/// coefficient matrices, built from c + c^dag and i(c - c^dag).
inline std::vector<CoefficientMatrix> hermitize_ground_space(const GroundSpace& gs,
                                                             const ReflectionFrame& frame) {
  std::vector<Matrix> cand;
  for (const auto& v : gs.vectors) {
    auto c = frame.factorize(v, BasisMode::rotated).entries;
    cand.push_back(c + c.adjoint());
    cand.push_back(cplx(0.0, 1.0) * (c - c.adjoint()));
  }
  const auto m = static_cast<Eigen::Index>(cand.size());
  RealMatrix gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      gram(i, j) = (cand[static_cast<std::size_t>(i)].adjoint() * cand[static_cast<std::size_t>(j)])
                       .trace()
                       .real();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(gram);
  const double top = m ? es.eigenvalues().maxCoeff() : 0.0;
  std::vector<CoefficientMatrix> out;
  for (Eigen::Index k = m - 1; k >= 0; --k) {
    const double lam = es.eigenvalues()(k);
    if (lam <= 1e-10 * top) break;
    Matrix c = Matrix::Zero(frame.side_dim(), frame.side_dim());
    for (Eigen::Index j = 0; j < m; ++j) c += es.eigenvectors()(j, k) * cand[static_cast<std::size_t>(j)];
    c /= std::sqrt(lam);
    c = 0.5 * (c + c.adjoint());
    out.push_back({c, BasisMode::rotated});
  }
  if (out.size() != gs.vectors.size())
    throw ReflectionError("Hermitized candidates span dimension " + std::to_string(out.size()) +
                          " but the ground space has dimension " +
                          std::to_string(gs.vectors.size()) +
                          "; the Hamiltonian is not mirror symmetric for this cut");
  return out;
}

namespace detail {
inline Eigen::SelfAdjointEigenSolver<Matrix> hermitian_eigen(const CoefficientMatrix& c,
                                                              double tol, const char* what) {
  if (c.hermiticity_error() > tol)
    throw ReflectionError(std::string(what) + ": coefficient matrix is not Hermitian (error " +
                          std::to_string(c.hermiticity_error()) + ")");
  Matrix h = 0.5 * (c.entries + c.entries.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(h);
}
}  // namespace detail

/// |c| = sqrt(c^2), by replacing eigenvalues of the Hermitian c with their
/// absolute values.
inline CoefficientMatrix abs_transform(const CoefficientMatrix& c, double tol = 1e-9) {
  auto es = detail::hermitian_eigen(c, tol, "abs_transform");
  const Matrix& u = es.eigenvectors();
  Matrix out = u * es.eigenvalues().cwiseAbs().cast<cplx>().asDiagonal() * u.adjoint();
  return {0.5 * (out + out.adjoint()), c.mode};
}

struct PsdSplit {
  CoefficientMatrix plus;
  CoefficientMatrix minus;
};

/// c = c+ - c-, |c| = c+ + c-, both positive semidefinite.
inline PsdSplit psd_split(const CoefficientMatrix& c, double tol = 1e-9) {
  auto es = detail::hermitian_eigen(c, tol, "psd_split");
  const Matrix& u = es.eigenvectors();
  Eigen::VectorXd pos = es.eigenvalues().cwiseMax(0.0);
  Eigen::VectorXd neg = (-es.eigenvalues()).cwiseMax(0.0);
  Matrix p = u * pos.cast<cplx>().asDiagonal() * u.adjoint();
  Matrix n = u * neg.cast<cplx>().asDiagonal() * u.adjoint();
  return {{0.5 * (p + p.adjoint()), c.mode}, {0.5 * (n + n.adjoint()), c.mode}};
}

inline double min_eigenvalue(const CoefficientMatrix& c) {
  Matrix h = 0.5 * (c.entries + c.entries.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

struct CoupledLabel {
  int twice_j;
  int twice_m;
  std::size_t k;  // multiplet index among those with the same j
};

/// Orthonormal real basis of simultaneous S^2, S^3 eigenstates of one half.
/// Columns are grouped by (j ascending, k, m descending); inside a multiplet
/// the states follow from the highest weight by S- with positive coefficients.
struct CoupledBasis {
  RealMatrix vectors;  // columns in the product basis of the half
  std::vector<CoupledLabel> labels;

  /// Multiplicity of each 2j.
  std::map<int, std::size_t> multiplicities() const {
    std::map<int, std::size_t> out;
    for (const auto& l : labels)
      if (l.twice_m == l.twice_j) ++out[l.twice_j];
    return out;
  }
};

inline CoupledBasis coupled_left_basis(const HilbertSpace& side) {
  if (side.dim() > 4096)
    throw std::invalid_argument("coupled_left_basis: half too large for dense spin diagonalization");
  const auto sites = all_sites(side);
  const Matrix s2 = materialize(spin_squared(side.rep(), sites), side).to_dense();
  const auto lowering = spin_matrices(side.rep()).sminus;
  OperatorSum sm;
  for (auto s : sites) sm += OperatorSum::site(s, lowering);
  const RealMatrix sminus = detail::assert_real(materialize(sm, side).to_dense(), 1e-12, "S-");
  const RealMatrix s2r = detail::assert_real(s2, 1e-12, "S^2");

  const int max_twice_j = static_cast<int>(side.n_sites()) * side.rep().twice_s();
  CoupledBasis out;
  out.vectors.resize(static_cast<Eigen::Index>(side.dim()), 0);
  for (int tj = max_twice_j % 2; tj <= max_twice_j; tj += 2) {
    const auto& basis = side.sector(tj);
    const auto nb = static_cast<Eigen::Index>(basis.size());
    RealMatrix block(nb, nb);
    for (Eigen::Index a = 0; a < nb; ++a)
      for (Eigen::Index b = 0; b < nb; ++b)
        block(a, b) = s2r(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(a)]),
                          static_cast<Eigen::Index>(basis[static_cast<std::size_t>(b)]));
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(block);
    const double j = 0.5 * tj;
    std::size_t k = 0;
    for (Eigen::Index e = 0; e < nb; ++e) {
      if (std::abs(es.eigenvalues()(e) - j * (j + 1)) > 1e-8) continue;
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(side.dim()));
      for (Eigen::Index a = 0; a < nb; ++a)
        v(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(a)])) = es.eigenvectors()(a, e);
      for (int tm = tj; tm >= -tj; tm -= 2) {
        const auto col = out.vectors.cols();
        out.vectors.conservativeResize(Eigen::NoChange, col + 1);
        out.vectors.col(col) = v;
        out.labels.push_back({tj, tm, k});
        if (tm > -tj) {
          const double m = 0.5 * tm;
          v = sminus * v / std::sqrt(j * (j + 1) - m * (m - 1));
        }
      }
      ++k;
    }
  }
  if (out.vectors.cols() != static_cast<Eigen::Index>(side.dim()))
    throw ReflectionError("coupled_left_basis: multiplets do not fill the space");
  return out;
}

/// Spin-zero projection in the coupled basis: keep blocks with j = j', take
/// the partial trace over m divided by 2j+1, and spread it back on the
/// m-diagonal.
inline Matrix spin_zero_project_coupled(const Matrix& c_coupled, const CoupledBasis& basis) {
  const auto n = c_coupled.rows();
  // start column of each (j, k) multiplet
  struct Multiplet {
    int twice_j;
    Eigen::Index start;
  };
  std::vector<Multiplet> mult;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& l = basis.labels[static_cast<std::size_t>(i)];
    if (l.twice_m == l.twice_j) mult.push_back({l.twice_j, i});
  }
  Matrix out = Matrix::Zero(n, n);
  for (const auto& a : mult)
    for (const auto& b : mult) {
      if (a.twice_j != b.twice_j) continue;
      const Eigen::Index size = a.twice_j + 1;
      cplx tr = 0.0;
      for (Eigen::Index m = 0; m < size; ++m) tr += c_coupled(a.start + m, b.start + m);
      tr /= static_cast<double>(size);
      for (Eigen::Index m = 0; m < size; ++m) out(a.start + m, b.start + m) = tr;
    }
  return out;
}

/// Coefficient matrix of the spin-zero component of the state with rotated
/// coefficient matrix c.
inline CoefficientMatrix spin_zero_project(const CoefficientMatrix& c, const CoupledBasis& basis) {
  if (c.mode != BasisMode::rotated)
    throw std::invalid_argument("spin_zero_project needs a rotated-mode matrix");
  if (c.entries.rows() != basis.vectors.rows())
    throw std::invalid_argument("spin_zero_project: coupled basis does not match the matrix");
  const Matrix u = basis.vectors.cast<cplx>();
  const Matrix coupled = u.transpose() * c.entries * u;
  const Matrix projected = spin_zero_project_coupled(coupled, basis);
  CoefficientMatrix out{u * projected * u.transpose(), BasisMode::rotated};
  if (c.hermiticity_error() < 1e-12 && min_eigenvalue(c) >= -1e-12 && min_eigenvalue(out) < -1e-10)
    throw ReflectionError("spin_zero_project lost positivity of a PSD input");
  return out;
}

}  // namespace cbed
