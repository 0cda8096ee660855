#include "spahr/fom.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <memory>

#include "spahr/parallel.hpp"

namespace spahr {

namespace {

/// Newton for one column: solves k = J∇H(y + Δt/2·k) starting from k = 0.
class MidpointNewton {
 public:
  MidpointNewton(const HamiltonianModel& model, const FomOptions& opts)
      : model_(model), opts_(opts) {}

  Vec<double> solve(const Vec<double>& y, const ConstVecRef& eta, double dt,
                    Index step, Index param) {
    const Index n2 = model_.full_dim();
    Vec<double> k = Vec<double>::Zero(n2);
    for (int it = 0; it <= opts_.max_iter; ++it) {
      const Vec<double> w = y + 0.5 * dt * k;
      const Vec<double> F = k - canonical_symplectic_apply(model_.gradient(w, eta));
      if (!F.allFinite()) break;
      if (dt * F.lpNorm<Eigen::Infinity>() <= opts_.newton_tol) return k;
      if (it == opts_.max_iter) break;
      const SparseMat Jac = jacobian(w, eta, dt);
      Vec<double> dk;
      if (opts_.solver == FomLinearSolver::sparse_lu) {
        if (!lu_) {
          lu_ = std::make_unique<Eigen::SparseLU<SparseMat>>();
          lu_->analyzePattern(Jac);
        }
        lu_->factorize(Jac);
        if (lu_->info() != Eigen::Success)
          throw IntegrationError("singular midpoint Jacobian", step, param);
        dk = lu_->solve(-F);
      } else {
        Eigen::BiCGSTAB<SparseMat, Eigen::DiagonalPreconditioner<double>> solver;
        solver.setTolerance(1e-14);
        solver.setMaxIterations(200);
        solver.compute(Jac);
        dk = solver.solve(-F);
        if (solver.info() != Eigen::Success)
          throw IntegrationError("inner linear solve failed", step, param);
      }
      k += dk;
    }
    throw IntegrationError("midpoint Newton did not converge", step, param);
  }

 private:
  /// I − (Δt/2)·J·∇²H(w), with J applied as a row swap and sign flip.
  SparseMat jacobian(const Vec<double>& w, const ConstVecRef& eta, double dt) const {
    const Index N = model_.half_dim();
    const SparseMat H = model_.hessian(w, eta);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(H.nonZeros() + 2 * N));
    for (Index i = 0; i < 2 * N; ++i) t.emplace_back(i, i, 1.0);
    for (Index c = 0; c < H.outerSize(); ++c)
      for (SparseMat::InnerIterator it(H, c); it; ++it) {
        const Index r = it.row();
        if (r < N)
          t.emplace_back(r + N, it.col(), 0.5 * dt * it.value());
        else
          t.emplace_back(r - N, it.col(), -0.5 * dt * it.value());
      }
    SparseMat Jac(2 * N, 2 * N);
    Jac.setFromTriplets(t.begin(), t.end());
    Jac.makeCompressed();
    return Jac;
  }

  const HamiltonianModel& model_;
  FomOptions opts_;
  std::unique_ptr<Eigen::SparseLU<SparseMat>> lu_;
};

}  // namespace

Mat<double> fom_solve(const HamiltonianModel& model, const Mat<double>& R0,
                      const TimeGrid& grid, const FomOptions& opts,
                      const SnapshotObserver& observer) {
  if (R0.rows() != model.full_dim() || R0.cols() != model.num_params())
    throw DimensionError("fom_solve: initial state must be 2N x p");
  if (!(opts.newton_tol > 0.0)) throw ConfigError("newton_tol must be positive");
  const Index p = R0.cols(), nt = grid.steps();
  const Index stride = std::max<Index>(opts.stride, 1);
  Mat<double> R = R0;
  if (observer) observer(0, grid.time(0), R);
  std::vector<std::unique_ptr<MidpointNewton>> solvers(static_cast<std::size_t>(p));
  for (Index k = 0; k < p; ++k) solvers[k] = std::make_unique<MidpointNewton>(model, opts);
  for (Index j = 0; j < nt; ++j) {
    const double dt = grid.step(j);
    parallel_for(p, [&](Index k) {
      const Vec<double> y = R.col(k);
      R.col(k) = y + dt * solvers[k]->solve(y, model.parameters().col(k), dt, j, k);
    });
    if (observer && ((j + 1) % stride == 0 || j + 1 == nt))
      observer(j + 1, grid.time(j + 1), R);
  }
  return R;
}

Trajectory fom_solve(const HamiltonianModel& model, const Mat<double>& R0,
                     const TimeGrid& grid, const FomOptions& opts) {
  Trajectory traj;
  fom_solve(model, R0, grid, opts, [&](Index step, double t, const Mat<double>& s) {
    traj.steps.push_back(step);
    traj.times.push_back(t);
    traj.states.push_back(s);
  });
  return traj;
}

}  // namespace spahr
