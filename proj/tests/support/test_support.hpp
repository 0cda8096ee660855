#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "spahr/dlr.hpp"
#include "spahr/model.hpp"
#include "spahr/nls.hpp"

namespace spahr::testing {

using Rng = std::mt19937_64;

inline Mat<double> random_matrix(Index r, Index c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat<double> M(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) M(i, j) = n(rng);
  return M;
}

inline Vec<double> random_vector(Index r, Rng& rng, double scale = 1.0) {
  return random_matrix(r, 1, rng, scale).col(0);
}

inline CMat<double> random_complex(Index r, Index c, Rng& rng) {
  CMat<double> M(r, c);
  M.real() = random_matrix(r, c, rng);
  M.imag() = random_matrix(r, c, rng);
  return M;
}

/// Ortho-symplectic basis with 2n columns in R^{2N}.
inline OrthoSymplecticBasis<double> random_basis(Index N, Index n, Rng& rng) {
  const CMat<double> G = random_complex(N, n, rng);
  Eigen::HouseholderQR<CMat<double>> qr(G);
  const CMat<double> Q = qr.householderQ() * CMat<double>::Identity(N, n);
  return OrthoSymplecticBasis<double>::from_complex(Q);
}

/// Tangent vector at A: V = (I − AAᵀ)[W, JᵀW]-structured direction plus an
/// A·S part with S ∈ sp-skew, built from a complex direction.
inline Mat<double> random_tangent(const OrthoSymplecticBasis<double>& A, Rng& rng,
                                  double scale = 1.0) {
  const CMat<double> U = A.to_complex();
  const Index N = U.rows(), n = U.cols();
  CMat<double> W = random_complex(N, n, rng);
  W -= U * (U.adjoint() * W);
  CMat<double> S = random_complex(n, n, rng);
  S = (S - S.adjoint().eval()) / 2.0;
  CMat<double> T = U * S + W;
  T *= scale / T.norm();
  return structured_from_complex<double>(T);
}

/// Small generic Hamiltonian on R^{2N}: H = ½yᵀLy + Σ c_i h_i with
/// h_i(a, b) = (g/4)(a² + b²)² + (κ_i/3)a³b on the support (q_i, p_{i+s}).
/// The single parameter is g.
class TinyModel final : public HamiltonianModel {
 public:
  TinyModel(Index N, const std::vector<double>& g, std::uint64_t seed, Index shift = 1,
            double quad_scale = 1.0, double kappa_scale = 0.3) {
    Rng rng(seed);
    Mat<double> L = random_matrix(2 * N, 2 * N, rng, quad_scale);
    L = (0.5 * (L + L.transpose())).eval();
    SupportTable sup(N, 2);
    Vec<double> w(N);
    kappa_.resize(N);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (Index i = 0; i < N; ++i) {
      sup(i, 0) = i;
      sup(i, 1) = N + (i + shift) % N;
      w(i) = u(rng);
      kappa_(i) = kappa_scale * (u(rng) - 1.0);
    }
    Mat<double> P(1, static_cast<Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) P(0, static_cast<Index>(k)) = g[k];
    set_structure(N, L.sparseView(), sup, w, P);
  }

  double element_value(Index i, const double* s, const ConstVecRef& eta) const override {
    const double a = s[0], b = s[1], r = a * a + b * b;
    return 0.25 * eta(0) * r * r + kappa_(i) / 3.0 * a * a * a * b;
  }
  void element_gradient(Index i, const double* s, const ConstVecRef& eta,
                        double* g) const override {
    const double a = s[0], b = s[1], r = a * a + b * b, k = kappa_(i);
    g[0] = eta(0) * r * a + k * a * a * b;
    g[1] = eta(0) * r * b + k / 3.0 * a * a * a;
  }
  void element_hessian(Index i, const double* s, const ConstVecRef& eta,
                       double* h) const override {
    const double a = s[0], b = s[1], g = eta(0), k = kappa_(i);
    h[0] = g * (3 * a * a + b * b) + 2 * k * a * b;
    h[1] = h[2] = 2 * g * a * b + k * a * a;
    h[3] = g * (a * a + 3 * b * b);
  }

 private:
  Vec<double> kappa_;
};

/// Small localized NLS configuration.
inline NlsConfig small_nls(Index nx = 8, Index ny = 8, Index per_axis = 2) {
  NlsConfig c;
  c.nx = nx;
  c.ny = ny;
  c.test_case = NlsTestCase::localized;
  c.axes = {{0.8, 2.0, per_axis}, {0.8, 2.0, per_axis}, {-1.5, -0.5, per_axis}};
  return c;
}

inline double rel_diff(const Mat<double>& a, const Mat<double>& b) {
  const double s = std::max(a.norm(), b.norm());
  return s > 0.0 ? (a - b).norm() / s : 0.0;
}

}  // namespace spahr::testing
