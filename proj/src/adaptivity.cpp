#include "spahr/adaptivity.hpp"

#include <algorithm>
#include <numeric>

#include "spahr/prk2.hpp"

namespace spahr {

ProjectionAnalysis analyze_projection(const HamiltonianModel& model,
                                      const ReducedState<double>& state,
                                      const IndexSet& sample, double eps_reg) {
  const Mat<double>& A = state.A();
  const Mat<double> Zs = gather_cols(state.Z, sample);
  const Mat<double> X =
      canonical_symplectic_apply(full_gradients(model, A, state.Z, sample));
  ProjectionAnalysis out;
  out.basis_velocity = field_basis_velocity<double>(A, Zs, X, eps_reg);
  const Mat<double> normal = out.basis_velocity * Zs;
  const Mat<double> AtX = A.transpose() * X;
  out.defect = X - normal;
  out.defect.noalias() -= A * AtX;

  auto& s = out.sample;
  s.grad_norm = X.norm();
  s.projected_norm = std::sqrt(normal.squaredNorm() + AtX.squaredNorm());
  if (s.grad_norm > 0.0) {
    s.r_tilde = out.defect.norm();
    s.theta = std::atan2(s.r_tilde, s.projected_norm);
  }
  return out;
}

ErrorIndicatorSample indicator_theta(const ReducedState<double>& state,
                                     const HamiltonianModel& model,
                                     const IndexSet& sample, double eps_reg) {
  return analyze_projection(model, state, sample, eps_reg).sample;
}

double accumulate_residual(AdaptivityState& state, double r_tilde, double dt) {
  state.accumulator += dt * r_tilde;
  return state.accumulator;
}

double indicator_projection_residual(const ReducedState<double>& state,
                                     const HamiltonianModel& model,
                                     const IndexSet& sample, AdaptivityState& adapt,
                                     double dt, double eps_reg) {
  return accumulate_residual(adapt, indicator_theta(state, model, sample, eps_reg).r_tilde,
                             dt);
}

bool should_update(const AdaptivityState& state, double e) {
  return e >= state.threshold();
}

void register_update(AdaptivityState& state, double e, Index step) {
  state.e_bar = e;
  state.l += 1;
  state.accumulator = 0.0;
  state.last_update_step = step;
}

RankChange rank_increase(const ReducedState<double>& state, const Mat<double>& defect,
                         const GrowthPolicy& growth) {
  RankChange out{state, 0};
  const Index N = state.basis.half_full_dim(), n = state.rank();
  if (defect.size() == 0 || defect.cwiseAbs().maxCoeff() == 0.0 || n >= N) return out;

  const auto svd = truncated_svd(defect, SvdTruncation::fixed(std::min(defect.rows(), defect.cols())));
  Index want = growth.pairs;
  if (growth.kind == GrowthPolicy::Kind::tol)
    want = epsilon_rank<double>(svd.sigma, growth.tol);
  want = std::min(want, N - n);

  CMat<double> U = state.basis.to_complex();
  Index added = 0;
  for (Index i = 0; i < svd.U.cols() && added < want; ++i) {
    if (!(svd.sigma(i) > 1e-14 * svd.sigma(0))) break;
    Vec<std::complex<double>> u(N);
    u.real() = svd.U.col(i).head(N);
    u.imag() = svd.U.col(i).tail(N);
    if (!orthonormalize_against(U, u, 1e-8)) continue;
    U.conservativeResize(Eigen::NoChange, U.cols() + 1);
    U.col(U.cols() - 1) = u;
    ++added;
  }
  if (added == 0) return out;

  out.state.basis = OrthoSymplecticBasis<double>::from_complex(U);
  const Index p = state.Z.cols(), n_new = n + added;
  out.state.Z = Mat<double>::Zero(2 * n_new, p);
  out.state.Z.topRows(n) = state.Z.topRows(n);
  out.state.Z.middleRows(n_new, n) = state.Z.bottomRows(n);
  out.pairs_changed = added;
  return out;
}

RankChange rank_decrease(const ReducedState<double>& state, double tau_shrink,
                         Index min_dwell, Index steps_since_change) {
  RankChange out{state, 0};
  const Index n = state.rank(), p = state.Z.cols();
  if (!(tau_shrink > 0.0) || steps_since_change < min_dwell || n <= 1) return out;

  CMat<double> zeta(n, p);
  zeta.real() = state.Z.topRows(n);
  zeta.imag() = state.Z.bottomRows(n);
  Eigen::JacobiSVD<CMat<double>> svd(zeta, Eigen::ComputeFullU);
  Vec<double> sigma = Vec<double>::Zero(n);
  sigma.head(svd.singularValues().size()) = svd.singularValues();
  if (!(sigma(0) > 0.0)) return out;
  Index keep = 0;
  while (keep < n && sigma(keep) >= tau_shrink * sigma(0)) ++keep;
  keep = std::max<Index>(keep, 1);
  if (keep == n) return out;

  const CMat<double> W = svd.matrixU().leftCols(keep);
  CMat<double> U = state.basis.to_complex() * W;
  orthonormalize_columns(U);
  const CMat<double> zk = W.adjoint() * zeta;
  out.state.basis = OrthoSymplecticBasis<double>::from_complex(U);
  out.state.Z.resize(2 * keep, p);
  out.state.Z.topRows(keep) = zk.real();
  out.state.Z.bottomRows(keep) = zk.imag();
  out.pairs_changed = n - keep;
  return out;
}

SampleSelection select_sample_parameters(const Mat<double>& Z,
                                         const SamplingPolicy& policy) {
  const Index p = Z.cols(), two_n = Z.rows();
  SampleSelection out;
  if (policy.fraction >= 1.0 || p <= two_n) {
    out.sampling_disabled = p < two_n;
    out.indices.resize(static_cast<std::size_t>(p));
    std::iota(out.indices.begin(), out.indices.end(), Index(0));
    return out;
  }
  const Index want = std::min<Index>(
      p, std::max<Index>(two_n, static_cast<Index>(std::ceil(policy.fraction * static_cast<double>(p) - 1e-9))));
  out.indices = pivoted_qr_order(Z, want);
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

}  // namespace spahr
