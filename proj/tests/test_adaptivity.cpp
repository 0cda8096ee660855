#include <gtest/gtest.h>

#include <numeric>

#include "spahr/adaptivity.hpp"
#include "support/test_support.hpp"

using namespace spahr;
using namespace spahr::testing;

namespace {

IndexSet iota_set(Index n) {
  IndexSet s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), Index(0));
  return s;
}

}  // namespace

TEST(Threshold, GrowsGeometrically) {
  AdaptivityState a;
  a.e_bar = 1.0;
  EXPECT_FALSE(should_update(a, 1.05));
  EXPECT_TRUE(should_update(a, 1.2));
  a.l = 2;
  EXPECT_NEAR(a.threshold(), 1.331, 1e-12);
  register_update(a, 2.0, 5);
  EXPECT_EQ(a.l, 3);
  EXPECT_EQ(a.e_bar, 2.0);
  EXPECT_EQ(a.last_update_step, 5);
}

TEST(Accumulator, SumsAndResets) {
  AdaptivityState a;
  accumulate_residual(a, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(accumulate_residual(a, 1.0, 0.5), 1.0);
  register_update(a, 1.0, 2);
  EXPECT_EQ(a.accumulator, 0.0);
}

TEST(Indicator, SplitNormMatchesProjection) {
  const auto m = nls_build(small_nls(6, 6, 2));
  auto [B, Z] = complex_svd_basis(m->initial_states(), 2);
  const ReducedState<double> s{B, Z};
  const IndexSet all = iota_set(Z.cols());
  const auto pa = analyze_projection(*m, s, all);
  const Mat<double> X = canonical_symplectic_apply(m->gradients(s.reconstruct(), all));
  const Mat<double> P = tangent_project(s, X);
  EXPECT_NEAR(pa.sample.projected_norm, P.norm(), 1e-10 * X.norm());
  EXPECT_LE((pa.defect - (X - P)).norm(), 1e-10 * X.norm());
  EXPECT_NEAR(pa.sample.grad_norm, X.norm(), 1e-12 * X.norm());
  const auto& e = pa.sample;
  EXPECT_NEAR(e.r_tilde, e.grad_norm * std::sin(e.theta), 1e-10 * e.grad_norm);
  EXPECT_NEAR(e.grad_norm * e.grad_norm,
              e.r_tilde * e.r_tilde + e.projected_norm * e.projected_norm,
              1e-10 * e.grad_norm * e.grad_norm);
}

TEST(Indicator, ZeroFieldGivesZeroAngle) {
  TinyModel m(4, {0.0}, 81, 1, 0.0, 0.0);
  Rng rng(82);
  const ReducedState<double> s{random_basis(4, 1, rng), random_matrix(2, 1, rng)};
  const auto e = indicator_theta(s, m, {0});
  EXPECT_EQ(e.theta, 0.0);
  EXPECT_EQ(e.r_tilde, 0.0);
}

TEST(RankIncrease, AddsDefectDirectionsWithZeroCoefficients) {
  const auto m = nls_build(small_nls(6, 6, 2));
  auto [B, Z] = complex_svd_basis(m->initial_states(), 2);
  const ReducedState<double> s{B, Z};
  const auto pa = analyze_projection(*m, s, iota_set(Z.cols()));
  const auto r = rank_increase(s, pa.defect, GrowthPolicy{});
  ASSERT_EQ(r.pairs_changed, 1);
  EXPECT_EQ(r.state.rank(), 3);
  EXPECT_LE(r.state.basis.orthogonality_residual(), 1e-12);
  EXPECT_LE(r.state.basis.symplecticity_residual(), 1e-12);
  EXPECT_LE((r.state.reconstruct() - s.reconstruct()).norm(), 1e-12 * s.Z.norm());
  EXPECT_EQ(r.state.Z.row(2).norm(), 0.0);
  EXPECT_EQ(r.state.Z.row(5).norm(), 0.0);
  // The leading defect direction now lies in the span.
  const Mat<double>& A = r.state.A();
  const Vec<double> v = truncated_svd(pa.defect, SvdTruncation::fixed(1)).U.col(0);
  EXPECT_LE((v - A * (A.transpose() * v)).norm(), 1e-10);
}

TEST(RankIncrease, ZeroDefectIsNoOp) {
  Rng rng(83);
  const ReducedState<double> s{random_basis(8, 2, rng), random_matrix(4, 3, rng)};
  const auto r = rank_increase(s, Mat<double>::Zero(16, 3), GrowthPolicy{});
  EXPECT_EQ(r.pairs_changed, 0);
  EXPECT_EQ(r.state.A(), s.A());
}

TEST(RankIncrease, ClampedAtFullDimension) {
  Rng rng(84);
  const ReducedState<double> s{random_basis(3, 2, rng), random_matrix(4, 3, rng)};
  GrowthPolicy g;
  g.pairs = 5;
  const auto r = rank_increase(s, random_matrix(6, 3, rng), g);
  EXPECT_EQ(r.state.rank(), 3);
}

TEST(RankDecrease, DropsNegligiblePairs) {
  Rng rng(85);
  const auto B = random_basis(10, 3, rng);
  Mat<double> Z = random_matrix(6, 5, rng);
  Z.row(2).setZero();
  Z.row(5).setZero();
  const ReducedState<double> s{B, Z};
  EXPECT_EQ(rank_decrease(s, 0.0, 0, 100).pairs_changed, 0);
  EXPECT_EQ(rank_decrease(s, 1e-8, 10, 3).pairs_changed, 0);
  const auto r = rank_decrease(s, 1e-8, 10, 10);
  ASSERT_EQ(r.pairs_changed, 1);
  EXPECT_EQ(r.state.rank(), 2);
  EXPECT_LE(r.state.basis.orthogonality_residual(), 1e-12);
  EXPECT_LE(r.state.basis.symplecticity_residual(), 1e-12);
  EXPECT_LE((r.state.reconstruct() - s.reconstruct()).norm(), 1e-12 * Z.norm());
  // Never below one pair.
  EXPECT_EQ(rank_decrease(s, 10.0, 0, 0).state.rank(), 1);
}

TEST(Sampling, FractionAndSpan) {
  Rng rng(86);
  const Mat<double> Z = random_matrix(8, 100, rng);
  SamplingPolicy all;
  all.fraction = 1.0;
  EXPECT_EQ(select_sample_parameters(Z, all).indices.size(), 100u);
  SamplingPolicy small;
  small.fraction = 0.05;
  const auto sel = select_sample_parameters(Z, small);
  ASSERT_EQ(sel.indices.size(), 8u);
  EXPECT_TRUE(std::is_sorted(sel.indices.begin(), sel.indices.end()));
  Eigen::FullPivLU<Mat<double>> lu(gather_cols(Z, sel.indices));
  EXPECT_EQ(lu.rank(), 8);
  small.fraction = 0.2;
  EXPECT_EQ(select_sample_parameters(Z, small).indices.size(), 20u);
  const auto few = select_sample_parameters(random_matrix(8, 5, rng), small);
  EXPECT_TRUE(few.sampling_disabled);
  EXPECT_EQ(few.indices.size(), 5u);
}
