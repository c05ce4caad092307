#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cbed {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Operator on a many-body Hilbert space: a sparse matrix plus a scalar
/// multiple of the identity. The constant is kept apart from the stored
/// entries so energy offsets (like the b^2/2 terms of field Hamiltonians)
/// stay visible to callers.
class SparseOperator {
 public:
  using Storage = Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::ptrdiff_t>;

  SparseOperator() = default;

  SparseOperator(std::size_t dim, const std::vector<Triplet>& entries,
                 double constant = 0.0, bool hermitian = false)
      : matrix_(static_cast<std::ptrdiff_t>(dim),
                static_cast<std::ptrdiff_t>(dim)),
        constant_(constant),
        hermitian_(hermitian) {
    std::vector<Eigen::Triplet<cplx, std::ptrdiff_t>> t;
    t.reserve(entries.size());
    for (const auto& e : entries) {
      if (e.row >= dim || e.col >= dim)
        throw std::out_of_range("SparseOperator: entry outside dimension");
      t.emplace_back(static_cast<std::ptrdiff_t>(e.row),
                     static_cast<std::ptrdiff_t>(e.col), e.value);
    }
    matrix_.setFromTriplets(t.begin(), t.end());
    prune();
    if (hermitian_ && !is_hermitian(1e-12))
      throw std::invalid_argument(
          "SparseOperator: flagged Hermitian but entries are not");
  }

  SparseOperator(Storage matrix, double constant, bool hermitian)
      : matrix_(std::move(matrix)), constant_(constant), hermitian_(hermitian) {
    prune();
  }

  static SparseOperator identity(std::size_t dim) {
    std::vector<Triplet> t;
    t.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) t.push_back({i, i, 1.0});
    return SparseOperator(dim, t, 0.0, true);
  }

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t nnz() const { return static_cast<std::size_t>(matrix_.nonZeros()); }
  double constant() const { return constant_; }
  bool hermitian_flag() const { return hermitian_; }
  const Storage& matrix() const { return matrix_; }

  /// y = (A + constant) x
  Vector apply(const Vector& x) const {
    if (x.size() != matrix_.cols())
      throw std::invalid_argument("SparseOperator::apply: dimension mismatch");
    Vector y = matrix_ * x;
    if (constant_ != 0.0) y += constant_ * x;
    return y;
  }

  Vector operator*(const Vector& x) const { return apply(x); }

  cplx expectation(const Vector& v) const { return v.dot(apply(v)); }

  cplx matrix_element(const Vector& u, const Vector& v) const {
    return u.dot(apply(v));
  }

  Matrix to_dense() const {
    Matrix m = Matrix(matrix_);
    m.diagonal().array() += constant_;
    return m;
  }

  bool is_hermitian(double tol) const {
    Storage diff = matrix_ - Storage(matrix_.adjoint());
    for (std::ptrdiff_t k = 0; k < diff.outerSize(); ++k)
      for (Storage::InnerIterator it(diff, k); it; ++it)
        if (std::abs(it.value()) > tol) return false;
    return true;
  }

  double max_imag() const {
    double m = 0.0;
    for (std::ptrdiff_t k = 0; k < matrix_.outerSize(); ++k)
      for (Storage::InnerIterator it(matrix_, k); it; ++it)
        m = std::max(m, std::abs(it.value().imag()));
    return m;
  }

  bool is_real(double tol) const { return max_imag() <= tol; }

  /// Folds the constant into the diagonal.
  SparseOperator with_constant_folded() const {
    if (constant_ == 0.0) return *this;
    Storage id(matrix_.rows(), matrix_.cols());
    id.setIdentity();
    return SparseOperator(Storage(matrix_ + constant_ * id), 0.0, hermitian_);
  }

  SparseOperator operator+(const SparseOperator& o) const {
    check_same_dim(o);
    return SparseOperator(Storage(matrix_ + o.matrix_), constant_ + o.constant_,
                          hermitian_ && o.hermitian_);
  }

  SparseOperator operator-(const SparseOperator& o) const {
    check_same_dim(o);
    return SparseOperator(Storage(matrix_ - o.matrix_), constant_ - o.constant_,
                          hermitian_ && o.hermitian_);
  }

  SparseOperator operator*(double a) const {
    return SparseOperator(Storage(a * matrix_), a * constant_, hermitian_);
  }

  /// Operator product, constants included.
  SparseOperator compose(const SparseOperator& o) const {
    check_same_dim(o);
    Storage id(matrix_.rows(), matrix_.cols());
    id.setIdentity();
    Storage a = matrix_ + constant_ * id;
    Storage b = o.matrix_ + o.constant_ * id;
    return SparseOperator(Storage(a * b), 0.0, false);
  }

  SparseOperator adjoint() const {
    return SparseOperator(Storage(matrix_.adjoint()), constant_, hermitian_);
  }

  /// Restriction to the given basis indices. Throws if the operator couples
  /// the block to states outside it.
  SparseOperator block(const std::vector<std::size_t>& indices) const {
    std::vector<std::ptrdiff_t> local(dim(), -1);
    for (std::size_t i = 0; i < indices.size(); ++i)
      local[indices[i]] = static_cast<std::ptrdiff_t>(i);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      auto row = static_cast<std::ptrdiff_t>(indices[i]);
      for (Storage::InnerIterator it(matrix_, row); it; ++it) {
        auto c = local[static_cast<std::size_t>(it.col())];
        if (c < 0)
          throw std::invalid_argument(
              "SparseOperator::block: operator leaks out of the block");
        t.push_back({i, static_cast<std::size_t>(c), it.value()});
      }
    }
    return SparseOperator(indices.size(), t, constant_, hermitian_);
  }

 private:
  void prune() {
    matrix_.prune([](const std::ptrdiff_t&, const std::ptrdiff_t&,
                     const cplx& v) { return std::abs(v) > 1e-15; });
    matrix_.makeCompressed();
  }

  void check_same_dim(const SparseOperator& o) const {
    if (o.dim() != dim())
      throw std::invalid_argument("SparseOperator: dimension mismatch");
  }

  Storage matrix_;
  double constant_ = 0.0;
  bool hermitian_ = false;
};

}  // namespace cbed
