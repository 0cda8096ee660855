#include "spahr/nls.hpp"

#include <cmath>

namespace spahr {

std::vector<double> ParameterAxis::values() const {
  if (count < 1) throw ConfigError("parameter axis needs at least one sample");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i)
    v[i] = count == 1 ? lo
                      : lo + (hi - lo) * static_cast<double>(i) /
                                 static_cast<double>(count - 1);
  return v;
}

Mat<double> parameter_grid(const std::vector<ParameterAxis>& axes) {
  Index p = 1;
  std::vector<std::vector<double>> vals;
  for (const auto& a : axes) {
    vals.push_back(a.values());
    p *= a.count;
  }
  Mat<double> eta(static_cast<Index>(axes.size()), p);
  for (Index k = 0; k < p; ++k) {
    Index rem = k;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      eta(static_cast<Index>(a), k) = vals[a][rem % axes[a].count];
      rem /= axes[a].count;
    }
  }
  return eta;
}

void NlsConfig::validate() const {
  if (nx < 4 || ny < 4) throw ConfigError("NLS grid needs at least 4 intervals per direction");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("NLS half-lengths must be positive");
  const std::size_t want = test_case == NlsTestCase::localized ? 3 : 2;
  if (axes.size() != want && !(test_case == NlsTestCase::localized && axes.size() == 2))
    throw ConfigError("NLS parameter grid has the wrong number of axes");
  for (const auto& a : axes)
    if (a.count < 1) throw ConfigError("parameter axis needs at least one sample");
}

namespace {

SparseMat periodic_laplacian(Index nx, Index ny, double dx, double dy) {
  const Index N = nx * ny;
  const double cx = 1.0 / (dx * dx), cy = 1.0 / (dy * dy);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(5 * N));
  for (Index iy = 0; iy < ny; ++iy)
    for (Index ix = 0; ix < nx; ++ix) {
      const Index i = ix + nx * iy;
      t.emplace_back(i, i, -2.0 * cx - 2.0 * cy);
      t.emplace_back(i, (ix + 1) % nx + nx * iy, cx);
      t.emplace_back(i, (ix + nx - 1) % nx + nx * iy, cx);
      t.emplace_back(i, ix + nx * ((iy + 1) % ny), cy);
      t.emplace_back(i, ix + nx * ((iy + ny - 1) % ny), cy);
    }
  SparseMat D(N, N);
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

}  // namespace

NlsModel::NlsModel(NlsConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const Index N = cfg_.nx * cfg_.ny;
  lap_ = periodic_laplacian(cfg_.nx, cfg_.ny, dx(), dy());

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(2 * lap_.nonZeros()));
  for (Index k = 0; k < lap_.outerSize(); ++k)
    for (SparseMat::InnerIterator it(lap_, k); it; ++it) {
      t.emplace_back(it.row(), it.col(), -it.value());
      t.emplace_back(N + it.row(), N + it.col(), -it.value());
    }
  SparseMat L(2 * N, 2 * N);
  L.setFromTriplets(t.begin(), t.end());

  SupportTable sup(N, 2);
  for (Index i = 0; i < N; ++i) {
    sup(i, 0) = i;
    sup(i, 1) = N + i;
  }
  set_structure(N, std::move(L), std::move(sup), Vec<double>::Ones(N),
                parameter_grid(cfg_.axes));
}

double NlsModel::element_value(Index, const double* local,
                               const ConstVecRef& eta) const {
  const double s = local[0] * local[0] + local[1] * local[1];
  return -0.25 * epsilon(eta) * s * s;
}

void NlsModel::element_gradient(Index, const double* local,
                                const ConstVecRef& eta, double* grad) const {
  const double e = epsilon(eta);
  const double s = local[0] * local[0] + local[1] * local[1];
  grad[0] = -e * s * local[0];
  grad[1] = -e * s * local[1];
}

void NlsModel::element_hessian(Index, const double* local,
                               const ConstVecRef& eta, double* hess) const {
  const double e = epsilon(eta);
  const double q = local[0], p = local[1];
  hess[0] = -e * (3.0 * q * q + p * p);
  hess[1] = -e * 2.0 * q * p;
  hess[2] = hess[1];
  hess[3] = -e * (q * q + 3.0 * p * p);
}

double NlsModel::nonquadratic(const ConstVecRef& y, const ConstVecRef& eta) const {
  const Index N = half_dim();
  const auto s = (y.head(N).array().square() + y.tail(N).array().square()).eval();
  return -0.25 * epsilon(eta) * s.square().sum();
}

void NlsModel::add_nonquadratic_gradient(const ConstVecRef& y,
                                         const ConstVecRef& eta,
                                         VecRef out) const {
  const Index N = half_dim();
  const double e = epsilon(eta);
  const auto s = (y.head(N).array().square() + y.tail(N).array().square()).eval();
  out.head(N).array() -= e * s * y.head(N).array();
  out.tail(N).array() -= e * s * y.tail(N).array();
}

Vec<double> NlsModel::initial_state(const ConstVecRef& eta) const {
  const Index N = half_dim();
  Vec<double> out(2 * N);
  const double a = eta(0), b = eta(1);
  for (Index iy = 0; iy < cfg_.ny; ++iy)
    for (Index ix = 0; ix < cfg_.nx; ++ix) {
      const Index i = ix + cfg_.nx * iy;
      const double xx = x(ix), yy = y(iy);
      if (cfg_.test_case == NlsTestCase::localized) {
        const double amp = std::sqrt(2.0) / (std::cosh(a * xx) * std::cosh(b * yy));
        const double phase = 0.5 * xx + 0.5 * yy;
        out(i) = amp * std::cos(phase);
        out(N + i) = amp * std::sin(phase);
      } else {
        out(i) = (1.0 + a * std::sin(xx)) * (2.0 + b * std::sin(yy));
        out(N + i) = 0.0;
      }
    }
  return out;
}

Mat<double> NlsModel::initial_states() const {
  Mat<double> R(full_dim(), num_params());
  for (Index k = 0; k < num_params(); ++k) R.col(k) = initial_state(parameters().col(k));
  return R;
}

std::unique_ptr<NlsModel> nls_build(const NlsConfig& cfg) {
  return std::make_unique<NlsModel>(cfg);
}

Vec<double> initial_condition(const NlsConfig& cfg, const ConstVecRef& eta) {
  NlsConfig c = cfg;
  if (c.axes.empty())
    for (Index a = 0; a < eta.size(); ++a) c.axes.push_back({eta(a), eta(a), 1});
  return NlsModel(c).initial_state(eta);
}

}  // namespace spahr
