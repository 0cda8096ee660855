#include <gtest/gtest.h>

#include <numeric>

#include "spahr/fom.hpp"
#include "spahr/prk2.hpp"
#include "support/test_support.hpp"

using namespace spahr;
using namespace spahr::testing;

namespace {

IndexSet all_columns(Index p) {
  IndexSet s(static_cast<std::size_t>(p));
  std::iota(s.begin(), s.end(), Index(0));
  return s;
}

ReducedState<double> initial_state(const Mat<double>& R0, Index n) {
  auto [B, Z] = complex_svd_basis(R0, n);
  return {B, Z};
}

/// Straightforward version of one step: Newton on the full model with dense
/// Hessians, everything recomputed from scratch.
ReducedState<double> reference_step(const HamiltonianModel& m, const ReducedState<double>& s,
                                    double dt) {
  const Mat<double>& A = s.A();
  const Index p = s.Z.cols(), r = s.Z.rows();
  const Mat<double> G1 = m.gradients(A * s.Z, all_columns(p));
  const Mat<double> h1 = basis_velocity<double>(A, s.Z, G1);
  const Mat<double> Ah = retraction<double>({s.basis, 0.5 * dt * h1}).columns();
  Mat<double> K(r, p);
  for (Index k = 0; k < p; ++k) {
    const auto eta = m.parameters().col(k);
    Vec<double> kk = Vec<double>::Zero(r);
    for (int it = 0; it < 60; ++it) {
      const Vec<double> y = Ah * (s.Z.col(k) + 0.5 * dt * kk);
      const Vec<double> F = kk - canonical_symplectic_apply(Vec<double>(Ah.transpose() * m.gradient(y, eta)));
      const Mat<double> H = Ah.transpose() * Mat<double>(m.hessian(y, eta)) * Ah;
      const Mat<double> Jac =
          Mat<double>::Identity(r, r) - 0.5 * dt * canonical_symplectic_apply(H);
      kk -= Jac.fullPivLu().solve(F);
    }
    K.col(k) = kk;
  }
  const Mat<double> Zm = s.Z + 0.5 * dt * K;
  const Mat<double> G2 = m.gradients(Ah * Zm, all_columns(p));
  const Mat<double> Adot = basis_velocity<double>(Ah, Zm, G2);
  const Mat<double> h2 = inverse_tangent_map<double>(s.basis, 0.5 * dt * h1, Adot);
  return {retraction<double>({s.basis, dt * h2}), s.Z + dt * K};
}

}  // namespace

TEST(Prk2, ZeroFieldLeavesStateUnchanged) {
  TinyModel m(6, {0.0, 0.0}, 61, 1, 0.0, 0.0);
  Rng rng(62);
  ReducedState<double> s{random_basis(6, 2, rng), random_matrix(4, 2, rng)};
  const auto out =
      prk2_step(m, s, all_columns(2), exact_reduced_factory(m), 0.1, 0, Prk2Options{});
  EXPECT_LE((out.next.A() - s.A()).norm(), 1e-14);
  EXPECT_EQ(out.next.Z, s.Z);
  EXPECT_EQ(out.max_newton_iterations, 0);
}

TEST(Prk2, OneStepMatchesDirectImplementation) {
  const auto m = nls_build(small_nls(6, 6, 2));
  const auto s = initial_state(m->initial_states(), 3);
  Prk2Options o;
  o.newton_tol = 1e-15;
  const double dt = 1e-3;
  const auto out = prk2_step(*m, s, all_columns(s.Z.cols()), exact_reduced_factory(*m), dt,
                             0, o);
  const auto ref = reference_step(*m, s, dt);
  EXPECT_LE(rel_diff(out.next.A(), ref.A()), 1e-12);
  EXPECT_LE(rel_diff(out.next.Z, ref.Z), 1e-12);
}

TEST(Prk2, FullRankReproducesFullModel) {
  TinyModel m(2, {0.5, 1.0, 1.5}, 63);
  Rng rng(64);
  const Mat<double> R0 = random_matrix(4, 3, rng, 0.5);
  auto s = initial_state(R0, 2);
  const auto grid = TimeGrid::uniform(0.0, 0.5, 100);
  FomOptions fo;
  fo.newton_tol = 1e-14;
  const auto traj = fom_solve(m, R0, grid, fo);
  Prk2Options o;
  o.newton_tol = 1e-14;
  const auto f = exact_reduced_factory(m);
  for (Index j = 0; j < grid.steps(); ++j)
    s = prk2_step(m, s, all_columns(3), f, grid.step(j), j, o).next;
  EXPECT_LE(rel_diff(s.reconstruct(), traj.states.back()), 1e-9);
}

TEST(Prk2, CoefficientStageConservesQuadraticHamiltonian) {
  NlsConfig c = small_nls(5, 5, 1);
  c.axes[2] = {0.0, 0.0, 1};
  const auto m = nls_build(c);
  Rng rng(66);
  const auto B = random_basis(25, 2, rng);
  const ExactReducedHamiltonian H(*m, B.columns());
  Vec<double> z = random_vector(4, rng);
  const double h0 = H.value(z, 0);
  Prk2Options o;
  o.newton_tol = 1e-13;
  Vec<double> k(4);
  for (int step = 0; step < 200; ++step) {
    solve_coefficient_stage(H, z, 0, 0.01, o, step, k);
    z += 0.01 * k;
  }
  EXPECT_NEAR(H.value(z, 0), h0, 1e-12 * std::abs(h0));
}

TEST(Prk2, LongRunKeepsBasisStructure) {
  const auto m = nls_build(small_nls(8, 8, 2));
  auto s = initial_state(m->initial_states(), 2);
  const auto f = exact_reduced_factory(*m);
  const IndexSet all = all_columns(s.Z.cols());
  for (Index j = 0; j < 100; ++j) s = prk2_step(*m, s, all, f, 1e-3, j, Prk2Options{}).next;
  EXPECT_LE(s.basis.orthogonality_residual(), 1e-10);
  EXPECT_LE(s.basis.symplecticity_residual(), 1e-10);
}

TEST(Prk2, SampledStepUsesSubsetForBasisOnly) {
  const auto m = nls_build(small_nls(6, 6, 2));
  const auto s = initial_state(m->initial_states(), 2);
  const IndexSet sample{0, 2, 4, 5, 7};
  const auto out = prk2_step(*m, s, sample, exact_reduced_factory(*m), 1e-3, 0, Prk2Options{});
  const auto full =
      prk2_step(*m, s, all_columns(8), exact_reduced_factory(*m), 1e-3, 0, Prk2Options{});
  EXPECT_EQ(out.next.Z.cols(), 8);
  EXPECT_LE(out.next.basis.orthogonality_residual(), 1e-12);
  // Both runs share A_{1/2} only through the sampled velocity, so they differ.
  EXPECT_GT((out.next.A() - full.next.A()).norm(), 0.0);
}

TEST(Prk2, NewtonFailureRaisesIntegrationError) {
  const auto m = nls_build(small_nls(6, 6, 1));
  const auto s = initial_state(m->initial_states(), 1);
  Prk2Options o;
  o.max_iter = 0;
  o.newton_tol = 1e-16;
  try {
    prk2_step(*m, s, {0}, exact_reduced_factory(*m), 1e-2, 7, o);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.step(), 7);
  }
}
