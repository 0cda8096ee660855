#include "spahr/prk2.hpp"

#include <chrono>

#include "spahr/parallel.hpp"

namespace spahr {

ExactReducedHamiltonian::ExactReducedHamiltonian(const HamiltonianModel& model,
                                                 Mat<double> A)
    : model_(model), A_(std::move(A)) {
  const Mat<double> LA = model_.quadratic_operator() * A_;
  quad_ = A_.transpose() * LA;
  quad_ = (0.5 * (quad_ + quad_.transpose())).eval();
}

double ExactReducedHamiltonian::value(const ConstVecRef& z, Index param) const {
  return 0.5 * z.dot(quad_ * z) +
         model_.nonquadratic(A_ * z, model_.parameters().col(param));
}

Vec<double> ExactReducedHamiltonian::gradient(const ConstVecRef& z,
                                              Index param) const {
  Vec<double> g = Vec<double>::Zero(A_.rows());
  model_.add_nonquadratic_gradient(A_ * z, model_.parameters().col(param), g);
  Vec<double> out = quad_ * z;
  out.noalias() += A_.transpose() * g;
  return out;
}

Mat<double> ExactReducedHamiltonian::hessian(const ConstVecRef& z,
                                             Index param) const {
  const Vec<double> y = A_ * z;
  const auto eta = model_.parameters().col(param);
  const Index d = model_.num_elements(), nj = model_.support_size();
  const auto& sup = model_.supports();
  const auto& c = model_.weights();
  Mat<double> HA = Mat<double>::Zero(A_.rows(), A_.cols());
  std::vector<double> local(nj), hess(nj * nj);
  for (Index i = 0; i < d; ++i) {
    for (Index l = 0; l < nj; ++l) local[l] = y(sup(i, l));
    model_.element_hessian(i, local.data(), eta, hess.data());
    for (Index b = 0; b < nj; ++b)
      for (Index a = 0; a < nj; ++a) {
        const double h = c(i) * hess[a + nj * b];
        if (h != 0.0) HA.row(sup(i, a)) += h * A_.row(sup(i, b));
      }
  }
  Mat<double> H = quad_;
  H.noalias() += A_.transpose() * HA;
  return 0.5 * (H + H.transpose());
}

ReducedHamiltonianFactory exact_reduced_factory(const HamiltonianModel& model) {
  return [&model](const Mat<double>& A) -> std::unique_ptr<ReducedHamiltonian> {
    return std::make_unique<ExactReducedHamiltonian>(model, A);
  };
}

Mat<double> full_gradients(const HamiltonianModel& model, const Mat<double>& A,
                           const Mat<double>& Z, const IndexSet& sample) {
  const Mat<double> Zs = gather_cols(Z, sample);
  return model.gradients(A * Zs, sample);
}

int solve_coefficient_stage(const ReducedHamiltonian& H, const ConstVecRef& z,
                            Index param, double dt, const Prk2Options& opts,
                            Index step, VecRef k) {
  const Index r = z.size();
  k.setZero();
  for (int it = 0; it <= opts.max_iter; ++it) {
    const Vec<double> w = z + 0.5 * dt * k;
    const Vec<double> F = k - canonical_symplectic_apply(H.gradient(w, param));
    if (!F.allFinite()) break;
    if (dt * F.lpNorm<Eigen::Infinity>() <= opts.newton_tol) return it;
    if (it == opts.max_iter) break;
    const Mat<double> Jac = Mat<double>::Identity(r, r) -
                            0.5 * dt * canonical_symplectic_apply(H.hessian(w, param));
    k -= Jac.partialPivLu().solve(F);
  }
  throw IntegrationError("reduced stage Newton did not converge", step, param);
}

Prk2Result prk2_step(const HamiltonianModel& model,
                     const ReducedState<double>& state, const IndexSet& sample,
                     const ReducedHamiltonianFactory& factory, double dt,
                     Index step, const Prk2Options& opts, const Mat<double>* h1) {
  const Mat<double>& A = state.A();
  const Index p = state.Z.cols();
  const Mat<double> Zs = gather_cols(state.Z, sample);

  Mat<double> h1_local;
  if (!h1) {
    h1_local = basis_velocity<double>(A, Zs, full_gradients(model, A, state.Z, sample),
                                      opts.eps_reg);
    h1 = &h1_local;
  }
  const Mat<double> V_half = 0.5 * dt * *h1;
  const CayleyRetraction<double> half(state.basis, V_half);
  const Mat<double>& A_half = half.point().columns();

  const auto H = factory(A_half);
  Prk2Result out;
  out.k2.resize(state.Z.rows(), p);
  std::vector<int> iters(static_cast<std::size_t>(p), 0);
  const auto t_newton = std::chrono::steady_clock::now();
  parallel_for(p, [&](Index k) {
    iters[k] = solve_coefficient_stage(*H, state.Z.col(k), k, dt, opts, step,
                                       out.k2.col(k));
  });
  out.max_newton_iterations = *std::max_element(iters.begin(), iters.end());

  Mat<double> k2s = gather_cols(out.k2, sample);
  if (opts.restage_sampled) {
    for (Index j = 0; j < k2s.cols(); ++j)
      solve_coefficient_stage(*H, Zs.col(j), sample[j], dt, opts, step, k2s.col(j));
  }
  out.newton_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_newton).count();

  const Mat<double> Zmid = Zs + 0.5 * dt * k2s;
  const Mat<double> G2 = model.gradients(A_half * Zmid, sample);
  const Mat<double> Adot = basis_velocity<double>(A_half, Zmid, G2, opts.eps_reg);
  const Mat<double> h2 = half.inverse_differential(Adot);

  const CayleyRetraction<double> full(state.basis, dt * h2);
  out.next.basis = full.point();
  out.next.Z = state.Z + dt * out.k2;
  return out;
}

}  // namespace spahr
