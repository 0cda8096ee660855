#pragma once

#include <functional>
#include <memory>

#include "spahr/dlr.hpp"
#include "spahr/model.hpp"

namespace spahr {

/// Hamiltonian restricted to span(A) for a frozen basis A, as a function of
/// the coefficient vector z of one parameter column.
class ReducedHamiltonian {
 public:
  virtual ~ReducedHamiltonian() = default;
  virtual double value(const ConstVecRef& z, Index param) const = 0;
  virtual Vec<double> gradient(const ConstVecRef& z, Index param) const = 0;
  virtual Mat<double> hessian(const ConstVecRef& z, Index param) const = 0;
};

/// H(Az) evaluated through the full model, with AᵀLA cached.
class ExactReducedHamiltonian final : public ReducedHamiltonian {
 public:
  ExactReducedHamiltonian(const HamiltonianModel& model, Mat<double> A);

  double value(const ConstVecRef& z, Index param) const override;
  Vec<double> gradient(const ConstVecRef& z, Index param) const override;
  Mat<double> hessian(const ConstVecRef& z, Index param) const override;

 private:
  const HamiltonianModel& model_;
  Mat<double> A_;
  Mat<double> quad_;
};

using ReducedHamiltonianFactory =
    std::function<std::unique_ptr<ReducedHamiltonian>(const Mat<double>& A)>;

ReducedHamiltonianFactory exact_reduced_factory(const HamiltonianModel& model);

struct Prk2Options {
  double newton_tol = 1e-10;
  int max_iter = 50;
  double eps_reg = 1e-12;
  /// Re-solve the stage for the sampled columns instead of reusing them.
  bool restage_sampled = false;
};

struct Prk2Result {
  ReducedState<double> next;
  Mat<double> k2;
  int max_newton_iterations = 0;
  /// Wall-clock spent in the coefficient stage solves.
  double newton_seconds = 0.0;
};

/// Gradients ∇H(A Z_S) for the parameter columns S, 2N x |S|.
Mat<double> full_gradients(const HamiltonianModel& model, const Mat<double>& A,
                           const Mat<double>& Z, const IndexSet& sample);

/// Newton for k = J_{2n}∇Ĥ(z + Δt/2·k) from k = 0; returns iterations used.
int solve_coefficient_stage(const ReducedHamiltonian& H, const ConstVecRef& z,
                            Index param, double dt, const Prk2Options& opts,
                            Index step, VecRef k);

/// One partitioned RK2 step: explicit midpoint for the basis in retraction
/// coordinates, implicit midpoint for the coefficients. `sample` lists the
/// parameter columns driving the basis velocity. If h1 is given it must equal
/// the basis velocity at (A_j, Z_j restricted to sample).
Prk2Result prk2_step(const HamiltonianModel& model,
                     const ReducedState<double>& state, const IndexSet& sample,
                     const ReducedHamiltonianFactory& factory, double dt,
                     Index step, const Prk2Options& opts,
                     const Mat<double>* h1 = nullptr);

}  // namespace spahr
