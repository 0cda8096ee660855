#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "spahr/linalg.hpp"
#include "support/test_support.hpp"

using namespace spahr;
using namespace spahr::testing;

TEST(CanonicalSymplectic, DoubleApplicationNegates) {
  Rng rng(1);
  const Mat<double> X = random_matrix(6, 3, rng);
  EXPECT_EQ(canonical_symplectic_apply(canonical_symplectic_apply(X)), Mat<double>(-X));
  EXPECT_EQ(canonical_symplectic_apply_transpose(canonical_symplectic_apply(X)), X);
}

TEST(CanonicalSymplectic, MatchesDenseMatrix) {
  Rng rng(2);
  const Mat<double> X = random_matrix(8, 6, rng);
  const Mat<double> J8 = canonical_symplectic_matrix<double>(4);
  const Mat<double> J6 = canonical_symplectic_matrix<double>(3);
  EXPECT_LE((canonical_symplectic_apply(X) - J8 * X).norm(), 1e-15);
  EXPECT_LE((right_multiply_J(X) - X * J6).norm(), 1e-15);
  EXPECT_LE((right_multiply_Jt(X) - X * J6.transpose()).norm(), 1e-15);
  EXPECT_LE((J8 * J8.transpose() - Mat<double>::Identity(8, 8)).norm(), 0.0);
}

TEST(OrthoSymplecticBasis, ComplexConstructionSatisfiesInvariants) {
  Rng rng(3);
  const auto B = random_basis(20, 4, rng);
  EXPECT_EQ(B.rank(), 8);
  EXPECT_EQ(B.full_dim(), 40);
  EXPECT_LE(B.orthogonality_residual(), 1e-13);
  EXPECT_LE(B.symplecticity_residual(), 1e-13);
  const auto U = B.to_complex();
  EXPECT_LE((OrthoSymplecticBasis<double>::from_complex(U).columns() - B.columns()).norm(), 0.0);
}

TEST(OrthoSymplecticBasis, FromColumnsRejectsBrokenStructure) {
  Rng rng(4);
  Mat<double> A = random_basis(10, 2, rng).columns();
  EXPECT_NO_THROW(OrthoSymplecticBasis<double>::from_columns(A));
  A(0, 0) += 1e-3;
  EXPECT_THROW(OrthoSymplecticBasis<double>::from_columns(A), StructureError);
  EXPECT_THROW(OrthoSymplecticBasis<double>::from_columns(Mat<double>::Zero(5, 2)),
               DimensionError);
}

TEST(Symplectify, RepairsSmallPerturbation) {
  Rng rng(5);
  const auto B = random_basis(30, 3, rng);
  const Mat<double> E = random_matrix(60, 6, rng, 1e-6);
  const auto S = symplectify(B.columns() + E);
  EXPECT_LE(S.orthogonality_residual(), 1e-10);
  EXPECT_LE(S.symplecticity_residual(), 1e-10);
  EXPECT_LE((S.columns() - B.columns()).norm(), E.norm());
}

TEST(Symplectify, RejectsRankDeficientInput) {
  Rng rng(6);
  Mat<double> raw = random_matrix(12, 4, rng);
  raw.col(3) = raw.col(0);
  EXPECT_THROW(symplectify(raw), StructureError);
}

TEST(ComplexSvdBasis, InvariantsAndExactRankReconstruction) {
  Rng rng(7);
  const Index N = 25, p = 9;
  const CMat<double> C = random_complex(N, 2, rng) * random_complex(2, p, rng);
  Mat<double> R0(2 * N, p);
  R0.topRows(N) = C.real();
  R0.bottomRows(N) = C.imag();
  const auto [B, Z0] = complex_svd_basis(R0, 2);
  EXPECT_LE(B.symplecticity_residual(), 1e-12);
  EXPECT_LE(B.orthogonality_residual(), 1e-12);
  EXPECT_LE((R0 - B.columns() * Z0).norm(), 1e-10 * R0.norm());
  EXPECT_LE((Z0 - B.columns().transpose() * R0).norm(), 1e-12 * R0.norm());
  EXPECT_THROW(complex_svd_basis(R0, 3), RankError);
  EXPECT_THROW(complex_svd_basis(R0, 0), RankError);
}

TEST(TruncatedSvd, EckartYoungResidual) {
  Rng rng(8);
  const Mat<double> M = random_matrix(8, 5, rng);
  const auto f = truncated_svd(M, SvdTruncation::fixed(2));
  ASSERT_EQ(f.rank(), 2);
  const Mat<double> E = M - f.U * f.sigma.asDiagonal() * f.V.transpose();
  Eigen::JacobiSVD<Mat<double>> full(M);
  Eigen::JacobiSVD<Mat<double>> res(E);
  EXPECT_NEAR(res.singularValues()(0), full.singularValues()(2), 1e-12);
}

TEST(TruncatedSvd, RelativeModeAndErrors) {
  Mat<double> D = Mat<double>::Zero(4, 4);
  D.diagonal() << 1.0, 0.5, 1e-3, 1e-9;
  EXPECT_EQ(truncated_svd(D, SvdTruncation::relative(1e-6)).rank(), 3);
  EXPECT_EQ(truncated_svd(D, SvdTruncation::relative(0.9)).rank(), 1);
  EXPECT_THROW(truncated_svd(Mat<double>::Zero(3, 3), SvdTruncation::relative(1e-3)),
               RankError);
  EXPECT_THROW(truncated_svd(D, SvdTruncation::fixed(5)), RankError);
}

TEST(EpsilonRank, SpectrumCounts) {
  Vec<double> s(3);
  s << 1.0, 0.5, 1e-4;
  EXPECT_EQ(epsilon_rank<double>(s, 1e-3), 2);
  EXPECT_EQ(epsilon_rank<double>(Vec<double>::Zero(3), 1e-3), 0);
}

TEST(PivotedQr, HandWorkedExample) {
  Mat<double> Z(2, 3);
  Z << 2, 1, 0, 0, 0, 1;
  EXPECT_EQ(pivoted_qr_select(Z, 2), (IndexSet{0, 2}));
}

TEST(PivotedQr, RandomSelectionHasFullRank) {
  Rng rng(9);
  const Mat<double> Z = random_matrix(6, 20, rng);
  const IndexSet s = pivoted_qr_select(Z, 6);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), 6u);
  Eigen::FullPivLU<Mat<double>> lu(gather_cols(Z, s));
  EXPECT_EQ(lu.rank(), 6);
}

TEST(PivotedQr, RankDeficientSelectionThrowsAndOrderPads) {
  Rng rng(10);
  const Mat<double> Z = random_matrix(5, 2, rng) * random_matrix(2, 7, rng);
  EXPECT_THROW(pivoted_qr_select(Z, 3), SelectionError);
  const IndexSet order = pivoted_qr_order(Z, 7);
  EXPECT_EQ(std::set<Index>(order.begin(), order.end()).size(), 7u);
}

TEST(PivotedQr, TiesGoToLowestIndex) {
  Mat<double> Z = Mat<double>::Identity(3, 3);
  EXPECT_EQ(pivoted_qr_select(Z, 3), (IndexSet{0, 1, 2}));
}

TEST(Qdeim, InterpolationMatrixWellConditioned) {
  Rng rng(11);
  Eigen::HouseholderQR<Mat<double>> qr(random_matrix(30, 4, rng));
  const Mat<double> U = qr.householderQ() * Mat<double>::Identity(30, 4);
  const IndexSet P = qdeim_indices(U);
  ASSERT_EQ(P.size(), 4u);
  const double d = std::abs(gather_rows(U, P).determinant());
  EXPECT_GT(d, 0.0);
  double best = 0.0;
  std::vector<Index> idx(30);
  std::iota(idx.begin(), idx.end(), Index(0));
  for (int t = 0; t < 200; ++t) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const IndexSet sub(idx.begin(), idx.begin() + 4);
    best = std::max(best, std::abs(gather_rows(U, sub).determinant()));
  }
  EXPECT_GE(d, 1e-6 * best);
}

TEST(Orthonormalize, AgainstBasisAndDependentVectors) {
  Rng rng(12);
  Eigen::HouseholderQR<Mat<double>> qr(random_matrix(10, 3, rng));
  const Mat<double> Q = qr.householderQ() * Mat<double>::Identity(10, 3);
  Vec<double> v = random_vector(10, rng);
  ASSERT_TRUE(orthonormalize_against(Q, v, 1e-8));
  EXPECT_LE((Q.transpose() * v).norm(), 1e-14);
  EXPECT_NEAR(v.norm(), 1.0, 1e-14);
  Vec<double> dep = Q * Vec<double>::Ones(3);
  const Vec<double> before = dep;
  EXPECT_FALSE(orthonormalize_against(Q, dep, 1e-8));
  EXPECT_EQ(dep, before);
}

TEST(IndexSets, ValidationAndGather) {
  EXPECT_NO_THROW(validate_index_set({0, 2, 1}, 3));
  EXPECT_THROW(validate_index_set({0, 0}, 3), DimensionError);
  EXPECT_THROW(validate_index_set({3}, 3), DimensionError);
  Mat<double> M(2, 3);
  M << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(gather_cols(M, {2, 0}), (Mat<double>(2, 2) << 3, 1, 6, 4).finished());
  EXPECT_EQ(gather_rows(M, {1}), (Mat<double>(1, 3) << 4, 5, 6).finished());
}
