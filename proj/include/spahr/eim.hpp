#pragma once

#include <limits>
#include <memory>
#include <optional>

#include "spahr/model.hpp"
#include "spahr/prk2.hpp"

namespace spahr {

/// EIM basis U (d x m, orthonormal columns) with interpolation indices P.
/// The LU factors of PᵀU and the weights w = (PᵀU)⁻ᵀUᵀc are computed once.
class EimPair {
 public:
  EimPair(Mat<double> U, IndexSet P, const Vec<double>& c);
  /// Interpolation indices chosen by QDEIM.
  static EimPair from_basis(Mat<double> U, const Vec<double>& c);

  const Mat<double>& basis() const { return U_; }
  const IndexSet& interp() const { return P_; }
  Index dim() const { return U_.cols(); }
  const Vec<double>& weights() const { return w_; }

  /// (PᵀU)⁻¹·PtN for rows PtN = PᵀN.
  Mat<double> interpolation_coefficients(const Mat<double>& PtN) const;
  double orthogonality_residual() const;

 private:
  Mat<double> U_;
  IndexSet P_;
  Eigen::PartialPivLU<Mat<double>> lu_;
  Vec<double> w_;
};

/// [J_h(A z_1)A, ..., J_h(A z_k)A] for coefficient columns Z (2n x k) whose
/// parameters are `params`; d x 2n·k.
Mat<double> assemble_reduced_jacobians(const HamiltonianModel& model,
                                       const Mat<double>& A, const Mat<double>& Z,
                                       const IndexSet& params);

/// The same matrix restricted to `rows`; touches only the state entries those
/// elements depend on.
Mat<double> reduced_jacobian_rows(const HamiltonianModel& model,
                                  const Mat<double>& A, const Mat<double>& Z,
                                  const IndexSet& params, const IndexSet& rows);

/// POD of the reduced Jacobians at relative tolerance τ_m plus QDEIM indices.
/// Empty when the Jacobians vanish, meaning hyper-reduction must wait.
std::optional<EimPair> eim_rebuild(const HamiltonianModel& model,
                                   const Mat<double>& A, const Mat<double>& Z,
                                   const IndexSet& params, double tau_m);

/// Initial pair from all parameter columns of Z0.
std::optional<EimPair> eim_init(const HamiltonianModel& model,
                                const Mat<double>& A0, const Mat<double>& Z0,
                                double tau_m);

/// Ĥ(z) = ½zᵀAᵀLAz + Σ_j w_j h_{P_j}(Az), evaluated from the rows of A that
/// the interpolation elements touch.
class HyperReducedHamiltonian final : public ReducedHamiltonian {
 public:
  HyperReducedHamiltonian(const HamiltonianModel& model,
                          std::shared_ptr<const EimPair> eim, const Mat<double>& A);

  double value(const ConstVecRef& z, Index param) const override;
  Vec<double> gradient(const ConstVecRef& z, Index param) const override;
  Mat<double> hessian(const ConstVecRef& z, Index param) const override;

 private:
  const HamiltonianModel& model_;
  std::shared_ptr<const EimPair> eim_;
  Mat<double> quad_;
  /// Row (j·n_J + l) holds A.row(support(P_j, l)).
  Mat<double> AP_;
};

ReducedHamiltonianFactory hyper_reduced_factory(const HamiltonianModel& model,
                                                std::shared_ptr<const EimPair> eim);

double hyper_reduced_hamiltonian(const EimPair& eim, const HamiltonianModel& model,
                                 const Mat<double>& A, const ConstVecRef& z,
                                 Index param);
Vec<double> hyper_reduced_gradient(const EimPair& eim, const HamiltonianModel& model,
                                   const Mat<double>& A, const ConstVecRef& z,
                                   Index param);
Mat<double> hyper_reduced_hessian(const EimPair& eim, const HamiltonianModel& model,
                                  const Mat<double>& A, const ConstVecRef& z,
                                  Index param);

/// Best rank-r correction X (m_s x m) minimizing ‖SᵀR* + X C*‖_F:
/// X = −(SᵀR*V*)_r Σ*⁻¹ U*ᵀ, where C* = U*Σ*V*ᵀ is compact.
Mat<double> optimal_rank_update(const Mat<double>& StRstar,
                                const SvdFactors<double>& cstar, Index r);

/// ‖SᵀR*‖²_F − Σ_{i≤r} σ̄_i², σ̄ the singular values of SᵀR*V*.
double optimal_update_objective(const Mat<double>& StRstar,
                                const SvdFactors<double>& cstar, Index r);

/// δ = ‖SᵀR‖² − ‖SᵀR − SᵀR*(C*)†C‖².
double gain_delta(const Mat<double>& StR, const Mat<double>& StRstar,
                  const SvdFactors<double>& cstar, const Mat<double>& C);

/// Compact SVD of C*, dropping singular values below 1e-12·σ_1.
SvdFactors<double> compact_svd(const Mat<double>& M);

enum class EimParameterPolicy { greedy, full };

struct EimUpdateOptions {
  double tau_ms = 1e-4;
  /// Upper bound on p_U*; 0 means p.
  Index p_cap = 0;
  EimParameterPolicy policy = EimParameterPolicy::greedy;
  /// Recompute the full residual before and after to check the δ identity.
  bool validate = false;
};

struct EimUpdateResult {
  std::shared_ptr<const EimPair> pair;
  bool updated = false;
  /// δ stayed ≤ 0 up to the parameter cap; the update was applied anyway.
  bool delta_nonpositive = false;
  double delta = 0.0;
  Index m_s = 0;
  Index p_u_star = 0;
  /// U after the row update, before orthonormalization.
  Mat<double> raw_basis;
  double residual_before = std::numeric_limits<double>::quiet_NaN();
  double residual_after = std::numeric_limits<double>::quiet_NaN();
  /// |‖U_raw C − N‖² − (‖UC − N‖² − δ)| / ‖UC − N‖².
  double identity_error = std::numeric_limits<double>::quiet_NaN();
  /// Wall-clock spent on the validation residuals.
  double validation_seconds = 0.0;
};

/// Greedy sample-parameter and sample-index selection followed by the
/// closed-form row update of the EIM basis and QDEIM reselection.
EimUpdateResult eim_update(const HamiltonianModel& model, const Mat<double>& A,
                           const Mat<double>& Z,
                           const std::shared_ptr<const EimPair>& eim,
                           const EimUpdateOptions& opts);

}  // namespace spahr
