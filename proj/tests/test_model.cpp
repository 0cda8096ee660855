#include <gtest/gtest.h>

#include "spahr/nls.hpp"
#include "support/test_support.hpp"

using namespace spahr;
using namespace spahr::testing;

namespace {

void expect_derivatives_match(const HamiltonianModel& m, const Vec<double>& y,
                              const Vec<double>& eta) {
  const Vec<double> g = m.gradient(y, eta);
  const double h = 1e-6;
  Vec<double> fd(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    Vec<double> yp = y, ym = y;
    yp(i) += h;
    ym(i) -= h;
    fd(i) = (m.hamiltonian(yp, eta) - m.hamiltonian(ym, eta)) / (2 * h);
  }
  EXPECT_LE((g - fd).norm(), 1e-6 * g.norm());

  const Mat<double> H = Mat<double>(m.hessian(y, eta));
  EXPECT_LE((H - H.transpose()).norm(), 1e-12 * H.norm());
  Mat<double> fdh(y.size(), y.size());
  for (Index i = 0; i < y.size(); ++i) {
    Vec<double> yp = y, ym = y;
    yp(i) += h;
    ym(i) -= h;
    fdh.col(i) = (m.gradient(yp, eta) - m.gradient(ym, eta)) / (2 * h);
  }
  EXPECT_LE((H - fdh).norm(), 1e-6 * H.norm());

  const Mat<double> Jh = Mat<double>(m.element_jacobian(y, eta));
  Mat<double> fdj(m.num_elements(), y.size());
  for (Index i = 0; i < y.size(); ++i) {
    Vec<double> yp = y, ym = y;
    yp(i) += h;
    ym(i) -= h;
    fdj.col(i) = (m.element_values(yp, eta) - m.element_values(ym, eta)) / (2 * h);
  }
  EXPECT_LE((Jh - fdj).norm(), 1e-6 * Jh.norm());
}

}  // namespace

TEST(NlsModel, ConstantStateHamiltonianAndGradient) {
  NlsConfig c = small_nls(6, 5);
  const auto m = nls_build(c);
  const Index N = m->half_dim();
  Vec<double> y = Vec<double>::Zero(2 * N);
  y.head(N).setOnes();
  Vec<double> eta(3);
  eta << 1.0, 1.0, -1.0;
  EXPECT_NEAR(m->hamiltonian(y, eta), N / 4.0, 1e-12);
  const Vec<double> g = m->gradient(y, eta);
  EXPECT_LE((g.head(N) - Vec<double>::Ones(N)).norm(), 1e-12);
  EXPECT_LE(g.tail(N).norm(), 1e-12);
}

TEST(NlsModel, FullScaleDimension) {
  NlsConfig c = small_nls(100, 100, 1);
  EXPECT_EQ(nls_build(c)->full_dim(), 20000);
}

TEST(NlsModel, LocalizedInitialConditionAtOrigin) {
  NlsConfig c = small_nls(32, 32, 1);
  const auto m = nls_build(c);
  ASSERT_DOUBLE_EQ(m->x(16), 0.0);
  ASSERT_DOUBLE_EQ(m->y(16), 0.0);
  Vec<double> eta(3);
  eta << 1.0, 1.0, -1.0;
  const Vec<double> u = m->initial_state(eta);
  const Index i = 16 + 32 * 16, N = m->half_dim();
  EXPECT_NEAR(std::hypot(u(i), u(N + i)), std::sqrt(2.0), 1e-15);
}

TEST(NlsModel, NonlocalizedInitialConditionIsReal) {
  NlsConfig c;
  c.nx = c.ny = 8;
  c.test_case = NlsTestCase::nonlocalized;
  c.axes = {{0.97, 1.03, 2}, {0.97, 1.03, 2}};
  const auto m = nls_build(c);
  const Mat<double> R = m->initial_states();
  EXPECT_EQ(R.cols(), 4);
  EXPECT_EQ(R.bottomRows(m->half_dim()).norm(), 0.0);
  const Index i = 3 + 8 * 5;
  EXPECT_NEAR(R(i, 0), (1 + 0.97 * std::sin(m->x(3))) * (2 + 0.97 * std::sin(m->y(5))), 1e-14);
  EXPECT_DOUBLE_EQ(m->epsilon(m->parameters().col(0)), -1.0);
}

TEST(ParameterGrid, TestOneBoxHas125Columns) {
  const Mat<double> P = parameter_grid({{0.8, 2.0, 5}, {0.8, 2.0, 5}, {-1.5, -0.5, 5}});
  EXPECT_EQ(P.cols(), 125);
  EXPECT_DOUBLE_EQ(P(0, 1), 1.1);
  EXPECT_DOUBLE_EQ(P(1, 1), 0.8);
  EXPECT_DOUBLE_EQ(P(1, 5), 1.1);
  EXPECT_DOUBLE_EQ(P(2, 124), -0.5);
}

TEST(NlsModel, LaplacianIsSymmetricPeriodicAndAnnihilatesConstants) {
  const auto m = nls_build(small_nls(7, 6));
  const Mat<double> D = Mat<double>(m->laplacian());
  EXPECT_LE((D - D.transpose()).norm(), 0.0);
  EXPECT_LE((D * Vec<double>::Ones(D.rows())).norm(), 1e-12);
  const double dx2 = m->dx() * m->dx();
  EXPECT_NEAR(D(0, 6), 1.0 / dx2, 1e-12);  // wrap-around neighbour in x
  const Mat<double> L = Mat<double>(m->quadratic_operator());
  EXPECT_LE((L.topLeftCorner(42, 42) + D).norm(), 0.0);
}

TEST(NlsModel, DerivativesMatchFiniteDifferences) {
  const auto m = nls_build(small_nls(5, 4));
  Rng rng(21);
  for (Index k = 0; k < m->num_params(); k += 3)
    expect_derivatives_match(*m, random_vector(m->full_dim(), rng),
                             m->parameters().col(k));
}

TEST(TinyModel, DerivativesMatchFiniteDifferences) {
  TinyModel m(5, {0.7, -0.4}, 22, 2);
  Rng rng(23);
  for (Index k = 0; k < 2; ++k)
    expect_derivatives_match(m, random_vector(10, rng), m.parameters().col(k));
}

TEST(HamiltonianModel, ColumnGradientsUseOwnParameter) {
  const auto m = nls_build(small_nls(4, 4));
  Rng rng(24);
  const Mat<double> Y = random_matrix(m->full_dim(), 2, rng);
  const Mat<double> G = m->gradients(Y, {5, 2});
  EXPECT_LE((G.col(0) - m->gradient(Y.col(0), m->parameters().col(5))).norm(), 1e-14);
  EXPECT_LE((G.col(1) - m->gradient(Y.col(1), m->parameters().col(2))).norm(), 1e-14);
}

TEST(TimeGrid, UniformAndValidation) {
  const auto g = TimeGrid::uniform(0.0, 0.5, 500);
  EXPECT_EQ(g.steps(), 500);
  EXPECT_DOUBLE_EQ(g.final_time(), 0.5);
  EXPECT_NEAR(g.step(10), 1e-3, 1e-15);
  EXPECT_THROW(TimeGrid::uniform(0.0, 0.0, 5), ConfigError);
  EXPECT_THROW(TimeGrid({0.0, 1.0, 0.5}), ConfigError);
}

TEST(NlsConfig, Validation) {
  NlsConfig c = small_nls();
  EXPECT_NO_THROW(c.validate());
  c.axes.pop_back();
  c.axes.pop_back();
  EXPECT_THROW(c.validate(), ConfigError);
}
