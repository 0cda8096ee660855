#include <gtest/gtest.h>

#include "spahr/fom.hpp"
#include "spahr/metrics.hpp"
#include "support/test_support.hpp"

using namespace spahr;
using namespace spahr::testing;

TEST(Fom, LinearCaseConservesQuadraticHamiltonian) {
  NlsConfig c = small_nls(10, 10, 2);
  c.axes[2] = {0.0, 0.0, 1};
  const auto m = nls_build(c);
  const auto traj = fom_solve(*m, m->initial_states(), TimeGrid::uniform(0.0, 0.2, 200));
  ASSERT_EQ(traj.states.size(), 201u);
  for (double e : hamiltonian_error(*m, traj)) EXPECT_LE(e, 1e-8);
}

TEST(Fom, StepSatisfiesMidpointRelation) {
  const auto m = nls_build(small_nls(6, 6, 2));
  const Mat<double> R0 = m->initial_states();
  const double dt = 0.01;
  const auto traj = fom_solve(*m, R0, TimeGrid::uniform(0.0, dt, 1));
  const Mat<double>& R1 = traj.states.back();
  for (Index k = 0; k < R0.cols(); ++k) {
    const Vec<double> mid = 0.5 * (R0.col(k) + R1.col(k));
    const Vec<double> rhs =
        R0.col(k) + dt * canonical_symplectic_apply(m->gradient(mid, m->parameters().col(k)));
    EXPECT_LE((R1.col(k) - rhs).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(Fom, SecondOrderInTime) {
  const auto m = nls_build(small_nls(6, 6, 1));
  const Mat<double> R0 = m->initial_states();
  const auto ref = fom_solve(*m, R0, TimeGrid::uniform(0.0, 0.2, 400)).states.back();
  const auto a = fom_solve(*m, R0, TimeGrid::uniform(0.0, 0.2, 20)).states.back();
  const auto b = fom_solve(*m, R0, TimeGrid::uniform(0.0, 0.2, 40)).states.back();
  const double ratio = (a - ref).norm() / (b - ref).norm();
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Fom, KrylovAndDirectSolversAgree) {
  const auto m = nls_build(small_nls(6, 6, 2));
  const Mat<double> R0 = m->initial_states();
  FomOptions lu, kr;
  kr.solver = FomLinearSolver::bicgstab;
  const auto grid = TimeGrid::uniform(0.0, 0.05, 10);
  const auto a = fom_solve(*m, R0, grid, lu).states.back();
  const auto b = fom_solve(*m, R0, grid, kr).states.back();
  EXPECT_LE((a - b).norm(), 1e-8 * a.norm());
}

TEST(Fom, ObserverStrideIncludesEndpoints) {
  TinyModel m(3, {0.5, 1.0}, 31);
  Rng rng(32);
  FomOptions o;
  o.stride = 4;
  std::vector<Index> seen;
  fom_solve(m, random_matrix(6, 2, rng, 0.3), TimeGrid::uniform(0.0, 0.1, 10), o,
            [&](Index s, double, const Mat<double>&) { seen.push_back(s); });
  EXPECT_EQ(seen, (std::vector<Index>{0, 4, 8, 10}));
}

TEST(Fom, NewtonFailureReportsStepAndParameter) {
  TinyModel m(3, {0.5, 50.0}, 33);
  Rng rng(34);
  FomOptions o;
  o.max_iter = 1;
  o.newton_tol = 1e-14;
  try {
    fom_solve(m, random_matrix(6, 2, rng, 2.0), TimeGrid::uniform(0.0, 0.5, 2), o);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.step(), 0);
    EXPECT_GE(e.param(), 0);
  }
}

TEST(Fom, RejectsBadInput) {
  TinyModel m(3, {0.5}, 35);
  EXPECT_THROW(fom_solve(m, Mat<double>::Zero(5, 1), TimeGrid::uniform(0.0, 1.0, 2)),
               DimensionError);
}
