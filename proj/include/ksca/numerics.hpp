#pragma once

// Small dense linear-algebra kernel. Matrices are Eigen::MatrixXd, i.e.
// column-major; a "column" is always one sample / one basis vector.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>

#include "ksca/errors.hpp"

namespace ksca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Default relative tolerance for numerical rank decisions.
inline constexpr double kRankTol = 1e-10;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite())
    throw InvalidInput(std::string(what) + ": non-finite entry");
}

/// A list of unit-norm, pairwise-orthogonal vectors stored as the columns of
/// a dim x size matrix.
class OrthonormalBasis {
public:
  OrthonormalBasis() = default;
  explicit OrthonormalBasis(Matrix vectors) : vectors_(std::move(vectors)) {}

  Index dim() const { return vectors_.rows(); }
  Index size() const { return vectors_.cols(); }
  const Matrix& matrix() const { return vectors_; }
  auto vector(Index i) const { return vectors_.col(i); }

  /// Orthogonal projector onto the span, B * B^T.
  Matrix projector() const { return vectors_ * vectors_.transpose(); }

private:
  Matrix vectors_;
};

namespace detail {

// One modified Gram-Schmidt sweep of v against the first `count` columns of q.
inline void mgs_sweep(const Matrix& q, Index count, Eigen::Ref<Vector> v) {
  for (Index j = 0; j < count; ++j) v -= q.col(j).dot(v) * q.col(j);
}

} // namespace detail

/// Orthonormalizes the columns of `cols` with modified Gram-Schmidt and a
/// second re-orthogonalization sweep. Throws DependentColumns when a column
/// keeps less than `tol` of its original norm after projection.
inline OrthonormalBasis gram_schmidt(const Eigen::Ref<const Matrix>& cols, double tol = kRankTol) {
  require_finite(cols, "gram_schmidt");
  const Index m = cols.rows();
  const Index l = cols.cols();
  if (l > m)
    throw DependentColumns("gram_schmidt: more columns than the ambient dimension");

  Matrix q(m, l);
  for (Index j = 0; j < l; ++j) {
    Vector v = cols.col(j);
    const double original = v.norm();
    if (original == 0.0)
      throw DependentColumns("gram_schmidt: zero column " + std::to_string(j));
    detail::mgs_sweep(q, j, v);
    detail::mgs_sweep(q, j, v);
    const double residual = v.norm();
    if (residual <= tol * original)
      throw DependentColumns("gram_schmidt: column " + std::to_string(j) +
                             " lies in the span of the previous columns");
    q.col(j) = v / residual;
  }
  return OrthonormalBasis(std::move(q));
}

/// Orthonormal basis of the orthogonal complement of span(basis), built by
/// continuing Gram-Schmidt over the coordinate axes (largest residual first).
inline Matrix orthogonal_complement(const OrthonormalBasis& basis) {
  const Index m = basis.dim();
  const Index l = basis.size();
  Matrix full(m, m);
  full.leftCols(l) = basis.matrix();
  for (Index filled = l; filled < m; ++filled) {
    Vector best;
    double best_norm = -1.0;
    for (Index axis = 0; axis < m; ++axis) {
      Vector v = Vector::Unit(m, axis);
      detail::mgs_sweep(full, filled, v);
      detail::mgs_sweep(full, filled, v);
      const double norm = v.norm();
      if (norm > best_norm) {
        best_norm = norm;
        best = std::move(v);
      }
    }
    full.col(filled) = best / best_norm;
  }
  return full.rightCols(m - l);
}

struct SvdResult {
  Matrix u;  // m x min(m, cols)
  Vector s;  // descending
  Matrix v;  // cols x min(m, cols)
};

/// Economy-size SVD.
inline SvdResult svd(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) throw InvalidInput("svd: empty matrix");
  require_finite(m, "svd");
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("svd: kernel did not converge");
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

struct LeftSingularResult {
  Matrix u;  // m x m, columns ordered by descending singular value
  Vector s;  // min(m, cols) values, descending
};

/// Full left singular basis. Columns past min(m, cols) span the left null
/// space; the last column always belongs to the smallest singular value.
inline LeftSingularResult left_singular_vectors(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) throw InvalidInput("left_singular_vectors: empty matrix");
  require_finite(m, "left_singular_vectors");
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeFullU);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("left_singular_vectors: kernel did not converge");
  return {solver.matrixU(), solver.singularValues()};
}

/// Number of singular values above tol * sigma_max.
inline Index rank_of(const Eigen::Ref<const Matrix>& m, double tol = kRankTol) {
  if (!(tol > 0.0)) throw ConfigError("rank_of: tolerance must be positive");
  if (m.size() == 0) return 0;
  require_finite(m, "rank_of");
  Eigen::JacobiSVD<Matrix> solver(m);
  const Vector& s = solver.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = tol * s(0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++r;
  return r;
}

struct EvdResult {
  Vector eigenvalues;         // ascending
  OrthonormalBasis eigenvectors;  // column i belongs to eigenvalues(i)
};

/// Symmetric eigendecomposition; eigenvalues ascending.
inline EvdResult evd_sym(const Eigen::Ref<const Matrix>& r) {
  if (r.rows() != r.cols()) throw ShapeMismatch("evd_sym: matrix is not square");
  require_finite(r, "evd_sym");
  const double asym = (r - r.transpose()).norm();
  if (asym > 1e-10 * r.norm()) throw NotSymmetric("evd_sym: input is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(r);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("evd_sym: kernel did not converge");
  return {solver.eigenvalues(), OrthonormalBasis(solver.eigenvectors())};
}

/// I - B B^T for an orthonormal B.
inline Matrix complement_projector(const OrthonormalBasis& basis) {
  return Matrix::Identity(basis.dim(), basis.dim()) - basis.projector();
}

/// Flip the column so that its largest-magnitude entry is positive.
inline void normalize_sign(Eigen::Ref<Vector> v) {
  Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  if (v(at) < 0.0) v = -v;
}

} // namespace ksca
