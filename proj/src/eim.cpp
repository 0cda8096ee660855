#include "spahr/eim.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace spahr {

EimPair::EimPair(Mat<double> U, IndexSet P, const Vec<double>& c)
    : U_(std::move(U)), P_(std::move(P)) {
  const Index m = U_.cols();
  if (static_cast<Index>(P_.size()) != m || m < 1)
    throw HyperReductionError("EIM pair needs one interpolation index per basis vector");
  if (c.size() != U_.rows()) throw DimensionError("EIM weights have the wrong length");
  validate_index_set(P_, U_.rows());
  const Mat<double> PtU = gather_rows(U_, P_);
  lu_.compute(PtU);
  if (!(lu_.rcond() > 1e-14)) throw HyperReductionError("PᵀU is singular");
  w_ = lu_.transpose().solve(U_.transpose() * c);
}

EimPair EimPair::from_basis(Mat<double> U, const Vec<double>& c) {
  IndexSet P;
  try {
    P = qdeim_indices(U);
  } catch (const SelectionError& e) {
    throw HyperReductionError(std::string("QDEIM failed: ") + e.what());
  }
  return EimPair(std::move(U), std::move(P), c);
}

Mat<double> EimPair::interpolation_coefficients(const Mat<double>& PtN) const {
  return lu_.solve(PtN);
}

double EimPair::orthogonality_residual() const {
  return (U_.transpose() * U_ - Mat<double>::Identity(dim(), dim())).norm();
}

// ---------------------------------------------------------------------------

Mat<double> reduced_jacobian_rows(const HamiltonianModel& model,
                                  const Mat<double>& A, const Mat<double>& Z,
                                  const IndexSet& params, const IndexSet& rows) {
  if (static_cast<Index>(params.size()) != Z.cols())
    throw DimensionError("one parameter index per coefficient column required");
  const Index r2 = A.cols(), k = Z.cols(), nj = model.support_size();
  const Index ms = static_cast<Index>(rows.size());
  const auto& sup = model.supports();
  // Rows of A touched by the selected elements, then every support value of
  // every column with one product.
  Mat<double> As(ms * nj, r2);
  for (Index i = 0; i < ms; ++i)
    for (Index l = 0; l < nj; ++l) As.row(i * nj + l) = A.row(sup(rows[i], l));
  const Mat<double> local = As * Z;
  Mat<double> grads(ms * nj, k);
  for (Index c = 0; c < k; ++c) {
    const auto eta = model.parameters().col(params[c]);
    for (Index i = 0; i < ms; ++i)
      model.element_gradient(rows[i], local.col(c).data() + i * nj, eta,
                             grads.col(c).data() + i * nj);
  }
  Mat<double> out = Mat<double>::Zero(ms, r2 * k);
  for (Index c = 0; c < k; ++c)
    for (Index j = 0; j < r2; ++j) {
      double* o = out.col(c * r2 + j).data();
      const double* g = grads.col(c).data();
      const double* a = As.col(j).data();
      for (Index i = 0; i < ms; ++i) {
        double v = 0.0;
        for (Index l = 0; l < nj; ++l) v += g[i * nj + l] * a[i * nj + l];
        o[i] = v;
      }
    }
  return out;
}

Mat<double> assemble_reduced_jacobians(const HamiltonianModel& model,
                                       const Mat<double>& A, const Mat<double>& Z,
                                       const IndexSet& params) {
  IndexSet all(static_cast<std::size_t>(model.num_elements()));
  std::iota(all.begin(), all.end(), Index(0));
  return reduced_jacobian_rows(model, A, Z, params, all);
}

std::optional<EimPair> eim_rebuild(const HamiltonianModel& model,
                                   const Mat<double>& A, const Mat<double>& Z,
                                   const IndexSet& params, double tau_m) {
  const Mat<double> N = assemble_reduced_jacobians(model, A, Z, params);
  if (N.size() == 0 || N.cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
  auto svd = truncated_svd(N, SvdTruncation::relative(tau_m));
  return EimPair::from_basis(std::move(svd.U), model.weights());
}

std::optional<EimPair> eim_init(const HamiltonianModel& model,
                                const Mat<double>& A0, const Mat<double>& Z0,
                                double tau_m) {
  IndexSet all(static_cast<std::size_t>(Z0.cols()));
  std::iota(all.begin(), all.end(), Index(0));
  return eim_rebuild(model, A0, Z0, all, tau_m);
}

// ---------------------------------------------------------------------------

HyperReducedHamiltonian::HyperReducedHamiltonian(const HamiltonianModel& model,
                                                 std::shared_ptr<const EimPair> eim,
                                                 const Mat<double>& A)
    : model_(model), eim_(std::move(eim)) {
  const Mat<double> LA = model_.quadratic_operator() * A;
  quad_ = A.transpose() * LA;
  quad_ = (0.5 * (quad_ + quad_.transpose())).eval();
  const Index nj = model_.support_size();
  const auto& P = eim_->interp();
  AP_.resize(static_cast<Index>(P.size()) * nj, A.cols());
  for (std::size_t j = 0; j < P.size(); ++j)
    for (Index l = 0; l < nj; ++l)
      AP_.row(static_cast<Index>(j) * nj + l) = A.row(model_.supports()(P[j], l));
}

double HyperReducedHamiltonian::value(const ConstVecRef& z, Index param) const {
  const Index nj = model_.support_size();
  const auto eta = model_.parameters().col(param);
  const Vec<double> y = AP_ * z;
  const auto& P = eim_->interp();
  const auto& w = eim_->weights();
  double h = 0.0;
  for (std::size_t j = 0; j < P.size(); ++j)
    h += w(static_cast<Index>(j)) *
         model_.element_value(P[j], y.data() + static_cast<Index>(j) * nj, eta);
  return 0.5 * z.dot(quad_ * z) + h;
}

Vec<double> HyperReducedHamiltonian::gradient(const ConstVecRef& z,
                                              Index param) const {
  const Index nj = model_.support_size();
  const auto eta = model_.parameters().col(param);
  const Vec<double> y = AP_ * z;
  const auto& P = eim_->interp();
  const auto& w = eim_->weights();
  Vec<double> g(y.size());
  for (std::size_t j = 0; j < P.size(); ++j) {
    const Index off = static_cast<Index>(j) * nj;
    model_.element_gradient(P[j], y.data() + off, eta, g.data() + off);
    g.segment(off, nj) *= w(static_cast<Index>(j));
  }
  Vec<double> out = quad_ * z;
  out.noalias() += AP_.transpose() * g;
  return out;
}

Mat<double> HyperReducedHamiltonian::hessian(const ConstVecRef& z,
                                             Index param) const {
  const Index nj = model_.support_size();
  const auto eta = model_.parameters().col(param);
  const Vec<double> y = AP_ * z;
  const auto& P = eim_->interp();
  const auto& w = eim_->weights();
  Mat<double> HA(AP_.rows(), AP_.cols());
  Mat<double> h(nj, nj);
  for (std::size_t j = 0; j < P.size(); ++j) {
    const Index off = static_cast<Index>(j) * nj;
    model_.element_hessian(P[j], y.data() + off, eta, h.data());
    HA.middleRows(off, nj).noalias() =
        w(static_cast<Index>(j)) * h * AP_.middleRows(off, nj);
  }
  Mat<double> H = quad_;
  H.noalias() += AP_.transpose() * HA;
  return 0.5 * (H + H.transpose());
}

ReducedHamiltonianFactory hyper_reduced_factory(const HamiltonianModel& model,
                                                std::shared_ptr<const EimPair> eim) {
  return [&model, eim](const Mat<double>& A) -> std::unique_ptr<ReducedHamiltonian> {
    return std::make_unique<HyperReducedHamiltonian>(model, eim, A);
  };
}

namespace {
std::shared_ptr<const EimPair> share(const EimPair& eim) {
  return std::shared_ptr<const EimPair>(&eim, [](const EimPair*) {});
}
}  // namespace

double hyper_reduced_hamiltonian(const EimPair& eim, const HamiltonianModel& model,
                                 const Mat<double>& A, const ConstVecRef& z,
                                 Index param) {
  return HyperReducedHamiltonian(model, share(eim), A).value(z, param);
}

Vec<double> hyper_reduced_gradient(const EimPair& eim, const HamiltonianModel& model,
                                   const Mat<double>& A, const ConstVecRef& z,
                                   Index param) {
  return HyperReducedHamiltonian(model, share(eim), A).gradient(z, param);
}

Mat<double> hyper_reduced_hessian(const EimPair& eim, const HamiltonianModel& model,
                                  const Mat<double>& A, const ConstVecRef& z,
                                  Index param) {
  return HyperReducedHamiltonian(model, share(eim), A).hessian(z, param);
}

// ---------------------------------------------------------------------------

SvdFactors<double> compact_svd(const Mat<double>& M) {
  SvdFactors<double> out;
  if (M.size() == 0) {
    out.U.resize(M.rows(), 0);
    out.V.resize(M.cols(), 0);
    return out;
  }
  Eigen::BDCSVD<Mat<double>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec<double>& s = svd.singularValues();
  Index k = 0;
  if (s(0) > 0.0)
    while (k < s.size() && s(k) > 1e-12 * s(0)) ++k;
  out.U = svd.matrixU().leftCols(k);
  out.sigma = s.head(k);
  out.V = svd.matrixV().leftCols(k);
  out.spectrum = s;
  return out;
}

namespace {

/// −(SᵀR*V*)_r Σ*⁻¹U*ᵀ from the projected residual SᵀR*V*.
Mat<double> update_from_projected(const Mat<double>& StRV,
                                  const SvdFactors<double>& cstar, Index r) {
  const Index full = std::min(StRV.rows(), StRV.cols());
  Mat<double> T;
  if (r >= full) {
    T = StRV;
  } else {
    const auto svd = truncated_svd(StRV, SvdTruncation::fixed(r));
    T = svd.U * svd.sigma.asDiagonal() * svd.V.transpose();
  }
  return -(T * cstar.sigma.cwiseInverse().asDiagonal()) * cstar.U.transpose();
}

}  // namespace

Mat<double> optimal_rank_update(const Mat<double>& StRstar,
                                const SvdFactors<double>& cstar, Index r) {
  const Index m = cstar.U.rows();
  if (cstar.rank() == 0 || StRstar.cwiseAbs().maxCoeff() == 0.0)
    return Mat<double>::Zero(StRstar.rows(), m);
  const Mat<double> StRV = StRstar * cstar.V;
  const Index full = std::min(StRV.rows(), StRV.cols());
  if (r < 1 || r > full)
    throw RankError("optimal_rank_update: r = " + std::to_string(r) +
                    " outside [1, " + std::to_string(full) + "]");
  return update_from_projected(StRV, cstar, r);
}

double optimal_update_objective(const Mat<double>& StRstar,
                                const SvdFactors<double>& cstar, Index r) {
  const Mat<double> StRV = StRstar * cstar.V;
  double total = StRstar.squaredNorm();
  if (StRV.size() == 0) return total;
  Eigen::BDCSVD<Mat<double>> svd(StRV);
  const Vec<double>& s = svd.singularValues();
  for (Index i = 0; i < std::min<Index>(r, s.size()); ++i) total -= s(i) * s(i);
  return total;
}

double gain_delta(const Mat<double>& StR, const Mat<double>& StRstar,
                  const SvdFactors<double>& cstar, const Mat<double>& C) {
  if (cstar.rank() == 0) return 0.0;
  const Mat<double> X = -(StRstar * cstar.V * cstar.sigma.cwiseInverse().asDiagonal()) *
                        cstar.U.transpose();
  return StR.squaredNorm() - (StR + X * C).squaredNorm();
}

// ---------------------------------------------------------------------------

namespace {

/// Rows with norm above tau, padded to at least `floor` rows by taking the
/// largest norms (lowest index first on ties); returned in ascending order.
IndexSet sample_rows(const Vec<double>& norms, double tau, Index floor) {
  IndexSet order(static_cast<std::size_t>(norms.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms(a) > norms(b); });
  Index count = 0;
  while (count < norms.size() && norms(order[count]) > tau) ++count;
  count = std::max(count, std::min(floor, norms.size()));
  IndexSet S(order.begin(), order.begin() + count);
  std::sort(S.begin(), S.end());
  return S;
}

}  // namespace

EimUpdateResult eim_update(const HamiltonianModel& model, const Mat<double>& A,
                           const Mat<double>& Z,
                           const std::shared_ptr<const EimPair>& eim,
                           const EimUpdateOptions& opts) {
  const Index p = Z.cols(), r2 = A.cols(), m = eim->dim();
  const Mat<double>& U = eim->basis();
  IndexSet all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), Index(0));

  const Mat<double> C = eim->interpolation_coefficients(
      reduced_jacobian_rows(model, A, Z, all, eim->interp()));

  const Index limit = std::min(p, opts.p_cap > 0 ? opts.p_cap : p);
  IndexSet order;
  if (opts.policy == EimParameterPolicy::full) {
    order = all;
  } else {
    order = pivoted_qr_order(Z, limit);
  }

  EimUpdateResult res;
  res.pair = eim;
  Mat<double> Nstar(U.rows(), 0);
  IndexSet chosen;
  Mat<double> X;   // m_s x m row correction
  IndexSet S;
  double delta = 0.0;
  const Index first = opts.policy == EimParameterPolicy::full ? limit : 1;
  for (Index count = first; count <= limit; ++count) {
    const IndexSet add(order.begin() + static_cast<Index>(chosen.size()),
                       order.begin() + count);
    const Mat<double> Nadd =
        assemble_reduced_jacobians(model, A, gather_cols(Z, add), add);
    Mat<double> grown(U.rows(), Nstar.cols() + Nadd.cols());
    grown << Nstar, Nadd;
    Nstar.swap(grown);
    chosen.insert(chosen.end(), add.begin(), add.end());

    Mat<double> Cstar(m, r2 * static_cast<Index>(chosen.size()));
    for (std::size_t j = 0; j < chosen.size(); ++j)
      Cstar.middleCols(static_cast<Index>(j) * r2, r2) = C.middleCols(chosen[j] * r2, r2);
    const SvdFactors<double> cs = compact_svd(Cstar);

    Mat<double> RV = U * (cs.U * cs.sigma.asDiagonal());
    RV.noalias() -= Nstar * cs.V;
    S = sample_rows(RV.rowwise().norm(), opts.tau_ms, m);

    const Mat<double> StR =
        gather_rows(U, S) * C - reduced_jacobian_rows(model, A, Z, all, S);
    X = cs.rank() == 0 ? Mat<double>::Zero(static_cast<Index>(S.size()), m)
                       : update_from_projected(gather_rows(RV, S), cs, cs.rank());
    delta = StR.squaredNorm() - (StR + X * C).squaredNorm();
    if (delta > 0.0) break;
  }

  res.delta = delta;
  res.m_s = static_cast<Index>(S.size());
  res.p_u_star = static_cast<Index>(chosen.size());
  if (X.size() == 0 || X.cwiseAbs().maxCoeff() == 0.0) return res;
  res.delta_nonpositive = !(delta > 0.0);

  Mat<double> Unew = U;
  for (std::size_t i = 0; i < S.size(); ++i)
    Unew.row(S[i]) += X.row(static_cast<Index>(i));

  if (opts.validate) {
    const auto t_validate = std::chrono::steady_clock::now();
    const Mat<double> N = assemble_reduced_jacobians(model, A, Z, all);
    res.residual_before = (U * C - N).squaredNorm();
    res.residual_after = (Unew * C - N).squaredNorm();
    res.identity_error = std::abs(res.residual_after - (res.residual_before - delta)) /
                         std::max(res.residual_before, 1e-300);
    res.validation_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_validate).count();
  }
  res.raw_basis = Unew;
  try {
    orthonormalize_columns(Unew, 0, 1e-12);
  } catch (const StructureError&) {
    throw HyperReductionError("updated EIM basis lost full column rank");
  }
  res.pair = std::make_shared<const EimPair>(EimPair::from_basis(std::move(Unew), model.weights()));
  res.updated = true;
  return res;
}

}  // namespace spahr
