#pragma once

#include "cbed/spin_algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace cbed {

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  std::vector<int> two_m;           // 2 m_tot per level; empty when unlabeled
  std::vector<Vector> eigenvectors; // full-space vectors, empty unless requested
};

/// Dense solves above this size are refused.
inline constexpr std::size_t kDefaultDenseThreshold = 8192;

class DenseTooLargeError : public std::runtime_error {
 public:
  explicit DenseTooLargeError(std::size_t dim, std::size_t threshold)
      : std::runtime_error("dense diagonalization of dimension " + std::to_string(dim) +
                           " exceeds the threshold " + std::to_string(threshold) +
                           "; use the Lanczos solver or a sector decomposition") {}
};

/// Eigenvalues (and vectors) of a Hermitian matrix, ascending. Real input is
/// solved in real arithmetic so eigenvectors come out real.
struct DenseEigen {
  Eigen::VectorXd values;
  Matrix vectors;
};

inline DenseEigen dense_eigen(const Matrix& m, bool want_vectors) {
  DenseEigen out;
  const auto opts = want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  if (m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(m.real(), opts);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    out.values = es.eigenvalues();
    if (want_vectors) out.vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, opts);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    out.values = es.eigenvalues();
    if (want_vectors) out.vectors = es.eigenvectors();
  }
  return out;
}

inline Spectrum dense_spectrum(const SparseOperator& op, bool want_vectors,
                               std::size_t threshold = kDefaultDenseThreshold) {
  if (op.dim() > threshold) throw DenseTooLargeError(op.dim(), threshold);
  auto es = dense_eigen(op.to_dense(), want_vectors);
  Spectrum s;
  s.eigenvalues.assign(es.values.data(), es.values.data() + es.values.size());
  if (want_vectors)
    for (Eigen::Index k = 0; k < es.vectors.cols(); ++k) s.eigenvectors.push_back(es.vectors.col(k));
  return s;
}

/// Full spectrum of an S3-conserving operator, one dense solve per sector,
/// merged with m labels. The threshold applies per sector.
inline Spectrum dense_spectrum(const OperatorSum& op, const HilbertSpace& space, bool want_vectors,
                               std::size_t threshold = kDefaultDenseThreshold) {
  struct Level {
    double e;
    int two_m;
    Vector v;
  };
  std::vector<Level> levels;
  for (const auto& [two_m, basis] : space.sectors()) {
    if (basis.size() > threshold) throw DenseTooLargeError(basis.size(), threshold);
    auto block = materialize_sector(op, space, two_m, true);
    auto es = dense_eigen(block.to_dense(), want_vectors);
    for (Eigen::Index k = 0; k < es.values.size(); ++k) {
      Level l{es.values(k), two_m, {}};
      if (want_vectors) {
        l.v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
        for (std::size_t i = 0; i < basis.size(); ++i)
          l.v(static_cast<Eigen::Index>(basis[i])) = es.vectors(static_cast<Eigen::Index>(i), k);
      }
      levels.push_back(std::move(l));
    }
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.e < b.e; });
  Spectrum s;
  for (auto& l : levels) {
    s.eigenvalues.push_back(l.e);
    s.two_m.push_back(l.two_m);
    if (want_vectors) s.eigenvectors.push_back(std::move(l.v));
  }
  return s;
}

struct LanczosOptions {
  std::size_t block_size = 4;
  /// Number of lowest eigenpairs that must converge; 0 means block_size.
  std::size_t n_wanted = 0;
  double tol = 1e-10;
  /// Largest Krylov basis before giving up.
  std::size_t max_iter = 600;
  std::uint64_t seed = 0xF2;
};

struct EigenPairs {
  std::vector<double> values;
  std::vector<Vector> vectors;
  std::vector<double> residuals;
};

class LanczosError : public std::runtime_error {
 public:
  LanczosError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

namespace detail {

/// Orthogonalizes v against basis twice (classical Gram-Schmidt with
/// reorthogonalization). Returns the remaining norm.
inline double orthogonalize(Vector& v, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) v -= q * q.dot(v);
  return v.norm();
}

/// Block Lanczos core on scalar type S. The Krylov basis q and its image hq
/// are stored column-wise so that reorthogonalization and Ritz vectors are
/// matrix-vector products.
template <class S, class Apply>
EigenPairs lanczos_kernel(std::size_t n, Apply&& apply, const LanczosOptions& opt) {
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  constexpr bool is_complex = !std::is_same_v<S, double>;
  const auto nn = static_cast<Eigen::Index>(n);
  const auto k = static_cast<Eigen::Index>(std::max<std::size_t>(1, std::min(opt.block_size, n)));
  const auto wanted = static_cast<Eigen::Index>(std::min(opt.n_wanted == 0 ? static_cast<std::size_t>(k) : opt.n_wanted, n));
  const auto max_dim = static_cast<Eigen::Index>(std::min(opt.max_iter, n));

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vec = [&] {
    Vec v(nn);
    for (Eigen::Index i = 0; i < nn; ++i) v(i) = S(normal(rng));
    return v;
  };

  Eigen::Index cap = std::min<Eigen::Index>(max_dim, std::max<Eigen::Index>(64, 4 * k));
  Mat q(nn, cap), hq(nn, cap);
  Mat t = Mat::Zero(max_dim, max_dim);
  Eigen::Index m = 0;

  auto append = [&](Vec v) -> bool {
    const double before = v.norm();
    for (int pass = 0; pass < 2 && m > 0; ++pass) {
      const Vec overlap = q.leftCols(m).adjoint() * v;
      v.noalias() -= q.leftCols(m) * overlap;
    }
    const double after = v.norm();
    if (after <= 1e-10 * std::max(before, 1.0)) return false;
    if (m == cap) {
      cap = std::min(max_dim, 2 * cap);
      q.conservativeResize(Eigen::NoChange, cap);
      hq.conservativeResize(Eigen::NoChange, cap);
    }
    q.col(m) = v / after;
    hq.col(m) = apply(q.col(m));
    const Vec col = q.leftCols(m + 1).adjoint() * hq.col(m);
    for (Eigen::Index i = 0; i <= m; ++i) {
      t(i, m) = col(i);
      if constexpr (is_complex) t(m, i) = std::conj(col(i));
      else t(m, i) = col(i);
    }
    t(m, m) = S(std::real(col(m)));
    ++m;
    return true;
  };

  std::vector<Eigen::Index> last_block;
  for (Eigen::Index b = 0; b < k && m < max_dim; ++b)
    if (append(random_vec())) last_block.push_back(m - 1);

  EigenPairs best;
  double best_res = std::numeric_limits<double>::infinity();
  Eigen::Index next_check = 0;
  for (;;) {
    const bool exhausted = last_block.empty() || m >= max_dim;
    if (m >= wanted && (m >= next_check || exhausted)) {
      Eigen::SelfAdjointEigenSolver<Mat> es(t.topLeftCorner(m, m));
      const Mat y = es.eigenvectors().leftCols(wanted);
      Mat x = q.leftCols(m) * y;
      Mat hx = hq.leftCols(m) * y;
      EigenPairs cur;
      double worst = 0.0;
      for (Eigen::Index j = 0; j < wanted; ++j) {
        const double theta = es.eigenvalues()(j);
        const double nx = x.col(j).norm();
        const double res = (hx.col(j) - theta * x.col(j)).norm() / nx;
        worst = std::max(worst, res);
        cur.values.push_back(theta);
        cur.vectors.push_back((x.col(j) / nx).template cast<cplx>());
        cur.residuals.push_back(res);
      }
      if (worst < best_res) {
        best_res = worst;
        best = cur;
      }
      if (worst < opt.tol || (last_block.empty() && worst < 1e3 * opt.tol)) return cur;
      next_check = m + std::max<Eigen::Index>(k, m / 8);
    }
    if (exhausted) {
      if (last_block.empty() && m < nn) {
        // Krylov space closed before convergence; restart with a fresh block.
        for (Eigen::Index b = 0; b < k && m < max_dim; ++b)
          if (append(random_vec())) last_block.push_back(m - 1);
        if (!last_block.empty()) continue;
      }
      throw LanczosError("Lanczos did not converge within " + std::to_string(max_dim) +
                             " basis vectors (best residual " + std::to_string(best_res) + ")",
                         best_res);
    }
    std::vector<Eigen::Index> block;
    for (auto idx : last_block) {
      if (m >= max_dim) break;
      if (append(hq.col(idx))) block.push_back(m - 1);
    }
    last_block = std::move(block);
  }
}

}  // namespace detail

/// Lowest eigenpairs of a Hermitian operator by block Lanczos with full
/// reorthogonalization. The block size bounds the degeneracy that can be
/// resolved. Ritz values come from the exact projected matrix and residuals
/// are computed explicitly. Real operators are handled in real arithmetic.
inline EigenPairs lanczos_lowest(const SparseOperator& op, const LanczosOptions& opt) {
  const std::size_t n = op.dim();
  if (n == 0) throw std::invalid_argument("lanczos_lowest: empty operator");
  const double c = op.constant();
  if (op.is_real(0.0)) {
    const Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> a = op.matrix().real();
    return detail::lanczos_kernel<double>(
        n, [&](const auto& x) -> Eigen::VectorXd { return a * x + c * x; }, opt);
  }
  const auto& a = op.matrix();
  return detail::lanczos_kernel<cplx>(
      n, [&](const auto& x) -> Vector { return a * x + c * x; }, opt);
}

/// Rotates an orthonormal basis of an eigenspace of a real symmetric matrix
/// onto real vectors spanning the same space.
inline std::vector<Vector> realify_basis(const std::vector<Vector>& vs) {
  if (vs.empty()) return {};
  const auto n = vs.front().size();
  const auto d = static_cast<Eigen::Index>(vs.size());
  RealMatrix a(n, 2 * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    a.col(j) = vs[static_cast<std::size_t>(j)].real();
    a.col(d + j) = vs[static_cast<std::size_t>(j)].imag();
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(a.transpose() * a);
  std::vector<Vector> out;
  for (Eigen::Index j = 2 * d - 1; j >= d; --j) {
    Eigen::VectorXd v = a * es.eigenvectors().col(j);
    v.normalize();
    // fixed sign: largest-magnitude component positive
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    out.push_back(v.cast<cplx>());
  }
  // Re-orthonormalize in the original order of importance.
  std::vector<Vector> ortho;
  for (auto& v : out) {
    detail::orthogonalize(v, ortho);
    v.normalize();
    ortho.push_back(v);
  }
  return ortho;
}

struct GroundSpace {
  double energy = 0.0;
  std::size_t degeneracy = 0;
  std::vector<Vector> vectors;     // full-space, orthonormal
  std::vector<double> residuals;   // ||H v - E0 v||
  std::vector<int> two_m;          // sector of each vector (when solved by sector)
  std::vector<double> s2_expectation;
  double degeneracy_tol = 1e-7;
};

/// Ground space of a single operator via Lanczos (no sector split).
inline GroundSpace lanczos_ground(const SparseOperator& op, const LanczosOptions& opt,
                                  double degeneracy_tol = 1e-7) {
  auto pairs = lanczos_lowest(op, opt);
  GroundSpace gs;
  gs.degeneracy_tol = degeneracy_tol;
  gs.energy = pairs.values.front();
  std::vector<Vector> vs;
  for (std::size_t j = 0; j < pairs.values.size(); ++j) {
    if (pairs.values[j] - gs.energy > degeneracy_tol) break;
    vs.push_back(pairs.vectors[j]);
  }
  if (op.is_real(0.0)) vs = realify_basis(vs);
  for (auto& v : vs) gs.residuals.push_back((op.apply(v) - gs.energy * v).norm());
  gs.vectors = std::move(vs);
  gs.degeneracy = gs.vectors.size();
  return gs;
}

struct SolverOptions {
  /// Sectors up to this size are diagonalized densely, larger ones by Lanczos.
  std::size_t dense_cutoff = 600;
  /// Hard limit on any dense solve.
  std::size_t dense_threshold = kDefaultDenseThreshold;
  LanczosOptions lanczos{};
  double degeneracy_tol = 1e-7;
  std::size_t workers = 1;
  /// Fill GroundSpace::s2_expectation.
  bool compute_s2 = true;
  /// Only keep eigenvalues, not vectors (cheaper for energy-only checks).
  bool energy_only = false;
};

namespace detail {

struct SectorResult {
  int two_m = 0;
  std::vector<double> values;
  std::vector<Vector> vectors;  // sector-local
  std::vector<double> residuals;
};

/// Runs f(i) for i in [0, n) on up to `workers` threads.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

namespace detail {

/// Lowest eigenpairs of every S3 sector; sectors may be solved in parallel.
/// Lowest eigenpairs of one sector block, dense or Lanczos by size.
inline SectorResult solve_sector_block(const SparseOperator& block, int two_m, const SolverOptions& opt) {
  SectorResult r;
  r.two_m = two_m;
  const std::size_t size = block.dim();
  if (size <= opt.dense_cutoff) {
    if (size > opt.dense_threshold) throw DenseTooLargeError(size, opt.dense_threshold);
    auto es = dense_eigen(block.to_dense(), !opt.energy_only);
    const auto keep = std::min<Eigen::Index>(es.values.size(),
                                             static_cast<Eigen::Index>(opt.lanczos.block_size));
    for (Eigen::Index k = 0; k < keep; ++k) {
      r.values.push_back(es.values(k));
      if (opt.energy_only) continue;
      Vector v = es.vectors.col(k);
      r.residuals.push_back((block.apply(v) - es.values(k) * v).norm());
      r.vectors.push_back(std::move(v));
    }
  } else {
    auto lo = opt.lanczos;
    lo.seed = opt.lanczos.seed + static_cast<std::uint64_t>(two_m + 1000);
    auto pairs = lanczos_lowest(block, lo);
    r.values = std::move(pairs.values);
    r.vectors = std::move(pairs.vectors);
    r.residuals = std::move(pairs.residuals);
  }
  // Real form per degenerate cluster of the sector.
  if (!opt.energy_only && block.is_real(0.0) && !r.values.empty()) {
    std::size_t start = 0;
    while (start < r.values.size()) {
      std::size_t end = start + 1;
      while (end < r.values.size() && r.values[end] - r.values[start] <= opt.degeneracy_tol) ++end;
      std::vector<Vector> cluster(r.vectors.begin() + static_cast<std::ptrdiff_t>(start),
                                  r.vectors.begin() + static_cast<std::ptrdiff_t>(end));
      cluster = realify_basis(cluster);
      for (std::size_t j = start; j < end; ++j) r.vectors[j] = cluster[j - start];
      start = end;
    }
    for (std::size_t j = 0; j < r.vectors.size(); ++j)
      r.residuals[j] = (block.apply(r.vectors[j]) - r.values[j] * r.vectors[j]).norm();
  }
  return r;
}

inline std::vector<SectorResult> solve_sectors(const OperatorSum& op, const HilbertSpace& space,
                                               const SolverOptions& opt,
                                               const std::set<int>* only = nullptr) {
  std::vector<int> sectors;
  for (const auto& [two_m, basis] : space.sectors())
    if (!only || only->count(two_m)) sectors.push_back(two_m);
  std::vector<SectorResult> results(sectors.size());
  parallel_for(sectors.size(), opt.workers, [&](std::size_t i) {
    results[i] = solve_sector_block(materialize_sector(op, space, sectors[i], true), sectors[i], opt);
  });
  return results;
}

}  // namespace detail

/// Lowest eigenvalue of each S3 sector, keyed by 2 m_tot.
inline std::map<int, double> sector_minima(const OperatorSum& op, const HilbertSpace& space,
                                           SolverOptions opt = {}) {
  opt.energy_only = true;
  opt.lanczos.n_wanted = 1;
  opt.lanczos.block_size = 1;
  std::map<int, double> out;
  for (const auto& r : detail::solve_sectors(op, space, opt)) out[r.two_m] = r.values.front();
  return out;
}

/// Global ground space of an S3-conserving operator. Sector minima are found
/// first; sectors reaching the global minimum are then solved for vectors and
/// merged. Degeneracy is counted across sectors.
inline GroundSpace ground_space(const OperatorSum& op, const HilbertSpace& space,
                                const SolverOptions& opt = {}) {
  std::vector<detail::SectorResult> results;
  if (opt.energy_only) {
    results = detail::solve_sectors(op, space, opt);
  } else {
    const auto minima = sector_minima(op, space, opt);
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& [tm, e] : minima) lowest = std::min(lowest, e);
    std::set<int> candidates;
    const double window = std::max(1e-6, 10.0 * opt.degeneracy_tol);
    for (const auto& [tm, e] : minima)
      if (e - lowest <= window) candidates.insert(tm);
    results = detail::solve_sectors(op, space, opt, &candidates);
  }

  double e0 = std::numeric_limits<double>::infinity();
  for (const auto& r : results)
    if (!r.values.empty()) e0 = std::min(e0, r.values.front());

  GroundSpace gs;
  gs.energy = e0;
  gs.degeneracy_tol = opt.degeneracy_tol;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto& basis = space.sector(r.two_m);
    std::optional<SparseOperator> s2;
    for (std::size_t j = 0; j < r.values.size(); ++j) {
      if (r.values[j] - e0 > opt.degeneracy_tol) continue;
      ++gs.degeneracy;
      gs.two_m.push_back(r.two_m);
      if (opt.energy_only) continue;
      if (opt.compute_s2) {
        if (!s2) s2 = total_spin_squared_sector(space, r.two_m);
        gs.s2_expectation.push_back(s2->expectation(r.vectors[j]).real());
      }
      Vector full = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
      for (std::size_t a = 0; a < basis.size(); ++a)
        full(static_cast<Eigen::Index>(basis[a])) = r.vectors[j](static_cast<Eigen::Index>(a));
      gs.vectors.push_back(std::move(full));
      gs.residuals.push_back(r.residuals[j] + std::abs(r.values[j] - e0));
    }
  }
  return gs;
}

/// Lowest eigenvalue over all sectors.
inline double ground_energy(const OperatorSum& op, const HilbertSpace& space, SolverOptions opt = {}) {
  opt.energy_only = true;
  opt.compute_s2 = false;
  opt.lanczos.n_wanted = 1;
  opt.lanczos.block_size = 1;
  return ground_space(op, space, opt).energy;
}

/// Sector blocks of an operator, materialized once for repeated solves.
using SectorBlocks = std::map<int, SparseOperator>;

inline SectorBlocks materialize_sectors(const OperatorSum& op, const HilbertSpace& space) {
  SectorBlocks out;
  for (const auto& [two_m, basis] : space.sectors())
    out.emplace(two_m, materialize_sector(op, space, two_m, true));
  return out;
}

/// Lowest eigenvalue of base + extra. Only extra is materialized, which makes
/// scans over cheap (e.g. diagonal field) perturbations fast.
inline double ground_energy(const SectorBlocks& base, const OperatorSum& extra,
                            const HilbertSpace& space, SolverOptions opt = {}) {
  opt.energy_only = true;
  opt.lanczos.n_wanted = 1;
  opt.lanczos.block_size = 1;
  std::vector<const std::pair<const int, SparseOperator>*> items;
  for (const auto& kv : base) items.push_back(&kv);
  std::vector<double> minima(items.size());
  detail::parallel_for(items.size(), opt.workers, [&](std::size_t i) {
    const auto& [two_m, block] = *items[i];
    const auto full = block + materialize_sector(extra, space, two_m, true);
    minima[i] = detail::solve_sector_block(full, two_m, opt).values.front();
  });
  return *std::min_element(minima.begin(), minima.end());
}

}  // namespace cbed
