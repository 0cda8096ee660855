#pragma once

#include <Eigen/Eigenvalues>

#include "spahr/linalg.hpp"

namespace spahr {

template <typename T = double>
struct ReducedState {
  OrthoSymplecticBasis<T> basis;
  Mat<T> Z;

  Index rank() const { return basis.half_rank(); }
  const Mat<T>& A() const { return basis.columns(); }
  Mat<T> reconstruct() const { return basis.columns() * Z; }
};

// ---------------------------------------------------------------------------
// Tangent vectors at a basis A share its block structure, V = [[W_r, −W_i],
// [W_i, W_r]], and are identified with the complex N x n matrix W.

template <typename T>
CMat<T> complex_from_structured(const Mat<T>& V) {
  const Index N = V.rows() / 2, n = V.cols() / 2;
  CMat<T> W(N, n);
  W.real() = V.topLeftCorner(N, n);
  W.imag() = V.bottomLeftCorner(N, n);
  return W;
}

template <typename T>
Mat<T> structured_from_complex(const CMat<T>& W) {
  const Index N = W.rows(), n = W.cols();
  Mat<T> V(2 * N, 2 * n);
  V.topLeftCorner(N, n) = W.real();
  V.bottomLeftCorner(N, n) = W.imag();
  V.topRightCorner(N, n) = -W.imag();
  V.bottomRightCorner(N, n) = W.real();
  return V;
}

/// M(Z) = ZZᵀ + J_{2n}ᵀ ZZᵀ J_{2n}.
template <typename Derived>
Mat<typename Derived::Scalar> compute_M(const Eigen::MatrixBase<Derived>& Z) {
  using T = typename Derived::Scalar;
  Mat<T> S = Mat<T>::Zero(Z.rows(), Z.rows());
  S.template selfadjointView<Eigen::Lower>().rankUpdate(Z);
  S = S.template selfadjointView<Eigen::Lower>();
  Mat<T> M = S + canonical_symplectic_apply_transpose(right_multiply_J(S));
  return M;
}

/// Spectral inverse of a symmetric PSD matrix with eigenvalues floored at
/// eps_reg·λ_max.
template <typename T>
Mat<T> regularized_inverse_M(const Mat<T>& M, T eps_reg) {
  Eigen::SelfAdjointEigenSolver<Mat<T>> eig(M);
  const Vec<T>& lam = eig.eigenvalues();
  const T lmax = lam.size() > 0 ? lam.maxCoeff() : T(0);
  if (!(lmax > T(0))) throw SingularityError("M(Z) is zero");
  const Vec<T> inv = lam.cwiseMax(eps_reg * lmax).cwiseInverse();
  Mat<T> R = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return (R + R.transpose()) / T(2);
}

/// Complex form of the regularized M(Z)⁻¹. M(Z) is the real embedding of
/// ζζᴴ with ζ = Z_q + iZ_p, so working with ζ keeps everything commuting
/// with J exactly, even when zero coefficient rows make M singular.
template <typename T>
CMat<T> regularized_inverse_M_complex(const Mat<T>& Z, T eps_reg) {
  const Index n = Z.rows() / 2;
  CMat<T> zeta(n, Z.cols());
  zeta.real() = Z.topRows(n);
  zeta.imag() = Z.bottomRows(n);
  const CMat<T> G = zeta * zeta.adjoint();
  Eigen::SelfAdjointEigenSolver<CMat<T>> eig(G);
  const Vec<T>& lam = eig.eigenvalues();
  const T lmax = lam.size() > 0 ? lam.maxCoeff() : T(0);
  if (!(lmax > T(0))) throw SingularityError("M(Z) is zero");
  const Vec<T> inv = lam.cwiseMax(eps_reg * lmax).cwiseInverse();
  CMat<T> R = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
  return (R + R.adjoint().eval()) / T(2);
}

template <typename T>
Mat<T> regularized_inverse_M_of(const Mat<T>& Z, T eps_reg) {
  return structured_from_complex<T>(regularized_inverse_M_complex<T>(Z, eps_reg));
}

/// Horizontal basis velocity driven by a phase-space field X (2N x p*):
/// (I − AAᵀ)(XZᵀ + J X Zᵀ J_{2n}ᵀ) M(Z)⁻¹, evaluated in complex form.
template <typename T>
Mat<T> field_basis_velocity(const Mat<T>& A, const Mat<T>& Z, const Mat<T>& X,
                            T eps_reg = T(1e-12)) {
  const Index N = A.rows() / 2, n = A.cols() / 2;
  // Left half of F = XZᵀ + J X Zᵀ J_{2n}ᵀ; the right half follows from the
  // block structure.
  const Mat<T> B = X * Z.transpose();
  CMat<T> F(N, n);
  F.real() = B.topLeftCorner(N, n) + B.bottomRightCorner(N, n);
  F.imag() = B.bottomLeftCorner(N, n) - B.topRightCorner(N, n);
  const CMat<T> U = complex_from_structured<T>(A);
  F -= U * (U.adjoint() * F);
  CMat<T> Y = F * regularized_inverse_M_complex<T>(Z, eps_reg);
  Y -= U * (U.adjoint() * Y);
  return structured_from_complex<T>(Y);
}

/// Ȧ = (I − AAᵀ)(J G Z*ᵀ + G Z*ᵀ J_{2n}) M(Z*)⁻¹ with G = ∇H(AZ*).
template <typename T>
Mat<T> basis_velocity(const Mat<T>& A, const Mat<T>& Z_star, const Mat<T>& G,
                      T eps_reg = T(1e-12)) {
  return field_basis_velocity<T>(A, Z_star, canonical_symplectic_apply(G), eps_reg);
}

/// Π_T X = (I−AAᵀ)(XZᵀ + JXZᵀJ_{2n}ᵀ)M⁻¹Z + AAᵀX, materialized.
template <typename T>
Mat<T> tangent_project(const ReducedState<T>& s, const Mat<T>& X,
                       T eps_reg = T(1e-12)) {
  const Mat<T>& A = s.A();
  return field_basis_velocity<T>(A, s.Z, X, eps_reg) * s.Z +
         A * (A.transpose() * X);
}

template <typename T = double>
struct RetractionStep {
  OrthoSymplecticBasis<T> base;
  Mat<T> tangent;
};

/// Residuals of the tangent conditions at A: ‖AᵀV + VᵀA‖_F and ‖JV − VJ‖_F.
template <typename T>
std::pair<T, T> tangent_residuals(const Mat<T>& A, const Mat<T>& V) {
  const Mat<T> S = A.transpose() * V;
  return {(S + S.transpose()).norm(),
          (canonical_symplectic_apply(V) - right_multiply_J(V)).norm()};
}

/// Cayley retraction on the complex Stiefel manifold, which is the
/// ortho-symplectic set in complex form:
///   R_U(W) = (I − ½Ω)⁻¹(I + ½Ω)U,  Ω = P W Uᴴ − U (P W)ᴴ,  P = I − ½UUᴴ.
/// Ω = L Kᴴ has rank ≤ 2n, so every inverse goes through a 2n x 2n system.
/// An instance is bound to one base point and one tangent V, and also serves
/// the differential of R at V and its inverse.
template <typename T = double>
class CayleyRetraction {
 public:
  using C = std::complex<T>;

  CayleyRetraction(const OrthoSymplecticBasis<T>& base, const Mat<T>& V,
                   T tol = T(1e-10)) {
    if (V.rows() != base.full_dim() || V.cols() != base.rank())
      throw DimensionError("retraction: tangent shape does not match the basis");
    const auto [skew, sym] = tangent_residuals<T>(base.columns(), V);
    const T scale = std::max(T(1), V.norm());
    if (!(skew <= tol * scale) || !(sym <= tol * scale))
      throw ContractError("retraction: V is not a tangent vector at A");
    U_ = base.to_complex();
    const Index N = U_.rows(), n = U_.cols();
    const CMat<T> W = complex_from_structured<T>(V);
    const CMat<T> PW = W - T(0.5) * U_ * (U_.adjoint() * W);
    L_.resize(N, 2 * n);
    K_.resize(N, 2 * n);
    L_ << PW, U_;
    K_ << U_, -PW;
    const CMat<T> core = CMat<T>::Identity(2 * n, 2 * n) - T(0.5) * (K_.adjoint() * L_);
    core_lu_.compute(core);
    if (!(core_lu_.rcond() > T(1e-12)))
      throw StepSizeError("retraction: Cayley system is singular");
    X_ = apply_inverse(U_);
    point_ = OrthoSymplecticBasis<T>::from_complex(T(2) * X_ - U_);
  }

  const OrthoSymplecticBasis<T>& point() const { return point_; }

  /// dR at V applied to a tangent W: (I − ½Ω)⁻¹ Ω(W) X with X = (I − ½Ω)⁻¹U.
  Mat<T> differential(const Mat<T>& Wdot) const {
    const CMat<T> Wc = complex_from_structured<T>(Wdot);
    const CMat<T> PW = Wc - T(0.5) * U_ * (U_.adjoint() * Wc);
    const CMat<T> B = PW * (U_.adjoint() * X_) - U_ * (PW.adjoint() * X_);
    return structured_from_complex<T>(apply_inverse(B));
  }

  /// Solves dR_V[W] = Ẏ for the tangent W = U S + Q (S skew-Hermitian,
  /// UᴴQ = 0).
  Mat<T> inverse_differential(const Mat<T>& Ydot) const {
    const CMat<T> Yc = complex_from_structured<T>(Ydot);
    const CMat<T> B = Yc - T(0.5) * L_ * (K_.adjoint() * Yc);
    const CMat<T> G = U_.adjoint() * X_;
    Eigen::PartialPivLU<CMat<T>> glu(G);
    if (!(glu.rcond() > T(1e-12)))
      throw StepSizeError("inverse tangent map: step outside the injectivity region");
    const CMat<T> UB = U_.adjoint() * B;
    const CMat<T> Xperp = X_ - U_ * G;
    const CMat<T> Bperp = B - U_ * UB;
    // Q G = Bperp and S G = UᴴB + QᴴX⊥; G is only n x n.
    const CMat<T> Ginv = glu.inverse();
    const CMat<T> Q = Bperp * Ginv;
    CMat<T> S = (UB + Q.adjoint() * Xperp) * Ginv;
    S = (S - S.adjoint().eval()) / T(2);
    return structured_from_complex<T>(U_ * S + Q);
  }

 private:
  /// (I − ½LKᴴ)⁻¹B via Woodbury.
  CMat<T> apply_inverse(const CMat<T>& B) const {
    return B + T(0.5) * L_ * core_lu_.solve(K_.adjoint() * B);
  }

  CMat<T> U_, L_, K_, X_;
  Eigen::PartialPivLU<CMat<T>> core_lu_;
  OrthoSymplecticBasis<T> point_;
};

template <typename T>
OrthoSymplecticBasis<T> retraction(const RetractionStep<T>& step) {
  return CayleyRetraction<T>(step.base, step.tangent).point();
}

/// Tangent V̇ at V whose image under dR_A|_V is Ẏ.
template <typename T>
Mat<T> inverse_tangent_map(const OrthoSymplecticBasis<T>& base, const Mat<T>& V,
                           const Mat<T>& Ydot) {
  return CayleyRetraction<T>(base, V).inverse_differential(Ydot);
}

}  // namespace spahr
