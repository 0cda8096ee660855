#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spahr/errors.hpp"

namespace spahr {

using Index = Eigen::Index;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using CMat = Mat<std::complex<T>>;

/// Ordered list of distinct row or column indices.
using IndexSet = std::vector<Index>;

/// Throws DimensionError unless `set` holds distinct entries in [0, bound).
void validate_index_set(const IndexSet& set, Index bound);

// ---------------------------------------------------------------------------
// Canonical symplectic matrix J_{2k} = [[0, I], [-I, 0]], never formed densely
// outside of small test helpers.

template <typename Derived>
Mat<typename Derived::Scalar> canonical_symplectic_apply(
    const Eigen::MatrixBase<Derived>& X) {
  if (X.rows() % 2 != 0)
    throw DimensionError("J application needs an even row count, got " +
                         std::to_string(X.rows()));
  const Index k = X.rows() / 2;
  Mat<typename Derived::Scalar> out(X.rows(), X.cols());
  out.topRows(k) = X.bottomRows(k);
  out.bottomRows(k) = -X.topRows(k);
  return out;
}

/// Jᵀ X = -J X.
template <typename Derived>
Mat<typename Derived::Scalar> canonical_symplectic_apply_transpose(
    const Eigen::MatrixBase<Derived>& X) {
  if (X.rows() % 2 != 0)
    throw DimensionError("J application needs an even row count, got " +
                         std::to_string(X.rows()));
  const Index k = X.rows() / 2;
  Mat<typename Derived::Scalar> out(X.rows(), X.cols());
  out.topRows(k) = -X.bottomRows(k);
  out.bottomRows(k) = X.topRows(k);
  return out;
}

/// X J_{2k} = [-X_right, X_left].
template <typename Derived>
Mat<typename Derived::Scalar> right_multiply_J(
    const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() % 2 != 0)
    throw DimensionError("right J product needs an even column count");
  const Index k = X.cols() / 2;
  Mat<typename Derived::Scalar> out(X.rows(), X.cols());
  out.leftCols(k) = -X.rightCols(k);
  out.rightCols(k) = X.leftCols(k);
  return out;
}

/// X J_{2k}ᵀ = [X_right, -X_left].
template <typename Derived>
Mat<typename Derived::Scalar> right_multiply_Jt(
    const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() % 2 != 0)
    throw DimensionError("right J product needs an even column count");
  const Index k = X.cols() / 2;
  Mat<typename Derived::Scalar> out(X.rows(), X.cols());
  out.leftCols(k) = X.rightCols(k);
  out.rightCols(k) = -X.leftCols(k);
  return out;
}

template <typename T = double>
Mat<T> canonical_symplectic_matrix(Index k) {
  Mat<T> J = Mat<T>::Zero(2 * k, 2 * k);
  J.topRightCorner(k, k).setIdentity();
  J.bottomLeftCorner(k, k) = -Mat<T>::Identity(k, k);
  return J;
}

// ---------------------------------------------------------------------------
// Complex Gram-Schmidt with one re-orthogonalization pass.

/// Orthonormalizes v against the columns of Q (assumed orthonormal). Returns
/// false, leaving v untouched, if v is dependent on Q at relative level tol.
template <typename Scalar, typename Real = typename Eigen::NumTraits<Scalar>::Real>
bool orthonormalize_against(const Mat<Scalar>& Q, Vec<Scalar>& v,
                            Real tol = Real(1e-10)) {
  const Real original = v.norm();
  if (original == Real(0)) return false;
  Vec<Scalar> w = v;
  for (int pass = 0; pass < 2; ++pass)
    if (Q.cols() > 0) w.noalias() -= Q * (Q.adjoint() * w);
  const Real r = w.norm();
  if (r <= tol * original) return false;
  v = w / r;
  return true;
}

/// Orthonormalizes columns [first, end) of U against the preceding ones.
template <typename Scalar>
void orthonormalize_columns(Mat<Scalar>& U, Index first = 0,
                            double tol = 1e-10) {
  for (Index j = first; j < U.cols(); ++j) {
    Vec<Scalar> v = U.col(j);
    const Mat<Scalar> Q = U.leftCols(j);
    if (!orthonormalize_against(Q, v, typename Eigen::NumTraits<Scalar>::Real(tol)))
      throw StructureError("column " + std::to_string(j) +
                           " is linearly dependent on the previous ones");
    U.col(j) = v;
  }
}

// ---------------------------------------------------------------------------

/// Real 2N x 2n matrix A = [E, JᵀE] with AᵀA = I and AᵀJA = J. Equivalent to
/// a complex N x n matrix U = Φ + iΨ with orthonormal columns, where
/// A = [[Φ, -Ψ], [Ψ, Φ]].
template <typename T = double>
class OrthoSymplecticBasis {
 public:
  OrthoSymplecticBasis() = default;

  static OrthoSymplecticBasis from_complex(const CMat<T>& U) {
    const Index N = U.rows(), n = U.cols();
    OrthoSymplecticBasis b;
    b.a_.resize(2 * N, 2 * n);
    b.a_.topLeftCorner(N, n) = U.real();
    b.a_.bottomLeftCorner(N, n) = U.imag();
    b.a_.topRightCorner(N, n) = -U.imag();
    b.a_.bottomRightCorner(N, n) = U.real();
#ifndef NDEBUG
    b.check(T(1e-8));
#endif
    return b;
  }

  /// Wraps existing columns, verifying both invariants at tolerance tol.
  static OrthoSymplecticBasis from_columns(Mat<T> A, T tol = T(1e-10)) {
    if (A.rows() % 2 != 0 || A.cols() % 2 != 0)
      throw DimensionError("ortho-symplectic basis needs even dimensions");
    OrthoSymplecticBasis b;
    b.a_ = std::move(A);
    b.check(tol);
    return b;
  }

  const Mat<T>& columns() const { return a_; }
  Index half_full_dim() const { return a_.rows() / 2; }
  Index half_rank() const { return a_.cols() / 2; }
  Index full_dim() const { return a_.rows(); }
  Index rank() const { return a_.cols(); }

  CMat<T> to_complex() const {
    const Index N = half_full_dim(), n = half_rank();
    CMat<T> U(N, n);
    U.real() = a_.topLeftCorner(N, n);
    U.imag() = a_.bottomLeftCorner(N, n);
    return U;
  }

  /// ‖AᵀA − I‖_F
  T orthogonality_residual() const {
    return (a_.transpose() * a_ - Mat<T>::Identity(rank(), rank())).norm();
  }

  /// ‖AᵀJA − J‖_F
  T symplecticity_residual() const {
    return (a_.transpose() * canonical_symplectic_apply(a_) -
            canonical_symplectic_matrix<T>(half_rank()))
        .norm();
  }

  void check(T tol) const {
    const T o = orthogonality_residual(), s = symplecticity_residual();
    if (!(o <= tol) || !(s <= tol))
      throw StructureError("basis violates ortho-symplectic invariants (" +
                           std::to_string(o) + ", " + std::to_string(s) + ")");
  }

 private:
  Mat<T> a_;
};

/// Projects a nearly structured real matrix onto the ortho-symplectic set by
/// averaging its two halves in complex form and orthonormalizing in complex
/// arithmetic.
template <typename Derived>
OrthoSymplecticBasis<typename Derived::Scalar> symplectify(
    const Eigen::MatrixBase<Derived>& A_raw) {
  using T = typename Derived::Scalar;
  if (A_raw.rows() % 2 != 0 || A_raw.cols() % 2 != 0 || A_raw.cols() == 0)
    throw DimensionError("symplectify needs a 2N x 2n input");
  if (A_raw.cols() > A_raw.rows())
    throw StructureError("symplectify: more columns than rows");
  Eigen::ColPivHouseholderQR<Mat<T>> qr(A_raw);
  qr.setThreshold(T(1e-10));
  if (qr.rank() < A_raw.cols())
    throw StructureError("symplectify: input is rank deficient");

  const Index N = A_raw.rows() / 2, n = A_raw.cols() / 2;
  CMat<T> U(N, n);
  // Left half encodes U directly; right half encodes Jᵀ of it, so J·right = U.
  U.real() = (A_raw.topLeftCorner(N, n) + A_raw.bottomRightCorner(N, n)) / T(2);
  U.imag() = (A_raw.bottomLeftCorner(N, n) - A_raw.topRightCorner(N, n)) / T(2);
  orthonormalize_columns(U);
  return OrthoSymplecticBasis<T>::from_complex(U);
}

// ---------------------------------------------------------------------------

struct SvdTruncation {
  enum class Kind { fixed_rank, relative };
  Kind kind = Kind::relative;
  Index rank = 0;
  double tol = 0.0;

  static SvdTruncation fixed(Index k) { return {Kind::fixed_rank, k, 0.0}; }
  static SvdTruncation relative(double tau) { return {Kind::relative, 0, tau}; }
};

template <typename Scalar>
struct SvdFactors {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  Mat<Scalar> U;
  Vec<Real> sigma;
  Mat<Scalar> V;
  /// Full singular spectrum of the input, before truncation.
  Vec<Real> spectrum;

  Index rank() const { return sigma.size(); }
};

/// Number of singular values with σ_i ≥ eps·σ_1 (0 for a zero spectrum).
template <typename Real>
Index epsilon_rank(const Vec<Real>& sigma, Real eps) {
  if (sigma.size() == 0 || sigma(0) <= Real(0)) return 0;
  Index k = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) >= eps * sigma(0)) ++k;
  return k;
}

template <typename Derived>
SvdFactors<typename Derived::Scalar> truncated_svd(
    const Eigen::MatrixBase<Derived>& M, SvdTruncation mode) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  const Index mn = std::min(M.rows(), M.cols());
  if (mode.kind == SvdTruncation::Kind::fixed_rank &&
      (mode.rank < 0 || mode.rank > mn))
    throw RankError("truncated_svd: rank " + std::to_string(mode.rank) +
                    " exceeds min dimension " + std::to_string(mn));
  Eigen::BDCSVD<Mat<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec<Real>& s = svd.singularValues();
  Index k = mode.rank;
  if (mode.kind == SvdTruncation::Kind::relative) {
    if (mn == 0 || s(0) == Real(0))
      throw RankError("truncated_svd: relative truncation of a zero matrix");
    k = 1;
    while (k < mn && s(k) > Real(mode.tol) * s(0)) ++k;
  }
  SvdFactors<Scalar> out;
  out.U = svd.matrixU().leftCols(k);
  out.sigma = s.head(k);
  out.V = svd.matrixV().leftCols(k);
  out.spectrum = s;
  return out;
}

/// Complex SVD initialization: the rank-n0 left factor of Q + iP gives A0, and
/// Z0 = A0ᵀ R0.
template <typename Derived>
std::pair<OrthoSymplecticBasis<typename Derived::Scalar>,
          Mat<typename Derived::Scalar>>
complex_svd_basis(const Eigen::MatrixBase<Derived>& R0, Index n0) {
  using T = typename Derived::Scalar;
  if (R0.rows() % 2 != 0)
    throw DimensionError("complex_svd_basis: odd state dimension");
  const Index N = R0.rows() / 2, p = R0.cols();
  if (n0 < 1 || n0 > std::min(N, p))
    throw RankError("complex_svd_basis: need 1 <= n0 <= min(N, p)");
  CMat<T> C(N, p);
  C.real() = R0.topRows(N);
  C.imag() = R0.bottomRows(N);
  Eigen::BDCSVD<CMat<T>> svd(C, Eigen::ComputeThinU);
  const Vec<T>& s = svd.singularValues();
  const T floor = T(std::max(N, p)) * std::numeric_limits<T>::epsilon() * s(0);
  if (s(0) == T(0) || s(n0 - 1) <= floor)
    throw RankError("complex_svd_basis: n0 = " + std::to_string(n0) +
                    " exceeds the numerical rank of the initial data");
  auto basis = OrthoSymplecticBasis<T>::from_complex(svd.matrixU().leftCols(n0));
  Mat<T> Z0 = basis.columns().transpose() * R0;
  return {std::move(basis), std::move(Z0)};
}

// ---------------------------------------------------------------------------
// Greedy column-pivoted QR, one pivot at a time.

/// Pivot selection for Businger-Golub column pivoting, advanced lazily.
/// Among columns whose residual norms agree to a relative 1e-12, the lowest
/// column index wins.
template <typename T = double>
class IncrementalPivotedQr {
 public:
  template <typename Derived>
  explicit IncrementalPivotedQr(const Eigen::MatrixBase<Derived>& M,
                                T rank_tol = T(1e-12))
      : w_(M), q_(M.rows(), 0), taken_(M.cols(), 0), tol_(rank_tol) {
    scale_ = w_.cols() > 0 ? w_.colwise().norm().maxCoeff() : T(0);
  }

  /// Next pivot, or nothing once the residual is exhausted.
  std::optional<Index> next() {
    if (static_cast<Index>(pivots_.size()) >= std::min(w_.rows(), w_.cols()))
      return std::nullopt;
    Index best = -1;
    T best_norm = T(0);
    for (Index j = 0; j < w_.cols(); ++j) {
      if (taken_[j]) continue;
      const T nj = w_.col(j).norm();
      if (best < 0 || nj > best_norm * (T(1) + T(1e-12))) {
        best = j;
        best_norm = nj;
      }
    }
    if (best < 0 || !(best_norm > tol_ * scale_)) return std::nullopt;
    Vec<T> q = w_.col(best) / best_norm;
    if (q_.cols() > 0) {
      q.noalias() -= q_ * (q_.transpose() * q);
      q.normalize();
    }
    w_.noalias() -= q * (q.transpose() * w_);
    q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
    q_.col(q_.cols() - 1) = q;
    taken_[best] = 1;
    pivots_.push_back(best);
    return best;
  }

  const IndexSet& pivots() const { return pivots_; }

 private:
  Mat<T> w_;
  Mat<T> q_;
  std::vector<char> taken_;
  IndexSet pivots_;
  T tol_;
  T scale_;
};

/// First k column pivots of the pivoted QR of Z.
template <typename Derived>
IndexSet pivoted_qr_select(const Eigen::MatrixBase<Derived>& Z, Index k) {
  if (k < 0 || k > std::min(Z.rows(), Z.cols()))
    throw SelectionError("pivoted_qr_select: k = " + std::to_string(k) +
                         " exceeds min dimension");
  IncrementalPivotedQr<typename Derived::Scalar> qr(Z);
  for (Index i = 0; i < k; ++i)
    if (!qr.next())
      throw SelectionError("pivoted_qr_select: k = " + std::to_string(k) +
                           " exceeds the numerical rank");
  return qr.pivots();
}

/// Pivoted-QR order of the columns of Z, extended past the numerical rank by
/// descending original column norm (lowest index first on ties), truncated to
/// k entries.
template <typename Derived>
IndexSet pivoted_qr_order(const Eigen::MatrixBase<Derived>& Z, Index k) {
  using T = typename Derived::Scalar;
  k = std::min<Index>(k, Z.cols());
  IncrementalPivotedQr<T> qr(Z);
  while (static_cast<Index>(qr.pivots().size()) < k && qr.next()) {
  }
  IndexSet order = qr.pivots();
  if (static_cast<Index>(order.size()) < k) {
    std::vector<char> used(Z.cols(), 0);
    for (Index i : order) used[i] = 1;
    IndexSet rest;
    for (Index j = 0; j < Z.cols(); ++j)
      if (!used[j]) rest.push_back(j);
    const Vec<T> norms = Z.colwise().norm().transpose();
    std::stable_sort(rest.begin(), rest.end(),
                     [&](Index a, Index b) { return norms(a) > norms(b); });
    for (Index j : rest) {
      if (static_cast<Index>(order.size()) >= k) break;
      order.push_back(j);
    }
  }
  return order;
}

/// QDEIM: the first m column pivots of the pivoted QR of Uᵀ.
template <typename Derived>
IndexSet qdeim_indices(const Eigen::MatrixBase<Derived>& U) {
  const Index m = U.cols();
  if (m > U.rows()) throw SelectionError("qdeim_indices: more columns than rows");
  IncrementalPivotedQr<typename Derived::Scalar> qr(U.transpose());
  for (Index i = 0; i < m; ++i)
    if (!qr.next()) throw SelectionError("qdeim_indices: basis is rank deficient");
  return qr.pivots();
}

/// Rows of M selected by `rows`, in order.
template <typename Derived>
Mat<typename Derived::Scalar> gather_rows(const Eigen::MatrixBase<Derived>& M,
                                          const IndexSet& rows) {
  Mat<typename Derived::Scalar> out(static_cast<Index>(rows.size()), M.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = M.row(rows[i]);
  return out;
}

/// Columns of M selected by `cols`, in order.
template <typename Derived>
Mat<typename Derived::Scalar> gather_cols(const Eigen::MatrixBase<Derived>& M,
                                          const IndexSet& cols) {
  Mat<typename Derived::Scalar> out(M.rows(), static_cast<Index>(cols.size()));
  for (Index j = 0; j < out.cols(); ++j) out.col(j) = M.col(cols[j]);
  return out;
}

}  // namespace spahr
