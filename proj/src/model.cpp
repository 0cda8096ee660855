#include "spahr/model.hpp"

#include <cmath>

namespace spahr {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ConfigError("time grid needs at least one step");
  for (std::size_t j = 1; j < times_.size(); ++j)
    if (!(times_[j] > times_[j - 1]))
      throw ConfigError("time grid must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double t0, double T, Index nt) {
  if (nt < 1 || !(T > t0)) throw ConfigError("invalid uniform time grid");
  std::vector<double> t(static_cast<std::size_t>(nt) + 1);
  const double dt = (T - t0) / static_cast<double>(nt);
  for (Index j = 0; j <= nt; ++j) t[j] = t0 + static_cast<double>(j) * dt;
  t.back() = T;
  return TimeGrid(std::move(t));
}

void HamiltonianModel::set_structure(Index half_dim, SparseMat quad,
                                     SupportTable supports, Vec<double> weights,
                                     Mat<double> params) {
  if (quad.rows() != 2 * half_dim || quad.cols() != 2 * half_dim)
    throw DimensionError("quadratic operator must be 2N x 2N");
  if (weights.size() != supports.rows())
    throw DimensionError("weights must have one entry per element");
  half_dim_ = half_dim;
  quad_ = std::move(quad);
  supports_ = std::move(supports);
  weights_ = std::move(weights);
  params_ = std::move(params);
}

double HamiltonianModel::quadratic_part(const ConstVecRef& y) const {
  return 0.5 * y.dot(quad_ * y);
}

double HamiltonianModel::hamiltonian(const ConstVecRef& y,
                                     const ConstVecRef& eta) const {
  return quadratic_part(y) + nonquadratic(y, eta);
}

double HamiltonianModel::nonquadratic(const ConstVecRef& y,
                                      const ConstVecRef& eta) const {
  return weights_.dot(element_values(y, eta));
}

Vec<double> HamiltonianModel::element_values(const ConstVecRef& y,
                                             const ConstVecRef& eta) const {
  const Index d = num_elements(), nj = support_size();
  Vec<double> h(d);
  std::vector<double> local(nj);
  for (Index i = 0; i < d; ++i) {
    for (Index l = 0; l < nj; ++l) local[l] = y(supports_(i, l));
    h(i) = element_value(i, local.data(), eta);
  }
  return h;
}

Vec<double> HamiltonianModel::gradient(const ConstVecRef& y,
                                       const ConstVecRef& eta) const {
  Vec<double> g = quad_ * y;
  add_nonquadratic_gradient(y, eta, g);
  return g;
}

void HamiltonianModel::add_nonquadratic_gradient(const ConstVecRef& y,
                                                 const ConstVecRef& eta,
                                                 VecRef out) const {
  const Index d = num_elements(), nj = support_size();
  std::vector<double> local(nj), grad(nj);
  for (Index i = 0; i < d; ++i) {
    for (Index l = 0; l < nj; ++l) local[l] = y(supports_(i, l));
    element_gradient(i, local.data(), eta, grad.data());
    for (Index l = 0; l < nj; ++l) out(supports_(i, l)) += weights_(i) * grad[l];
  }
}

void HamiltonianModel::nonquadratic_hessian_triplets(
    const ConstVecRef& y, const ConstVecRef& eta,
    std::vector<Eigen::Triplet<double>>& out) const {
  const Index d = num_elements(), nj = support_size();
  std::vector<double> local(nj), hess(nj * nj);
  for (Index i = 0; i < d; ++i) {
    for (Index l = 0; l < nj; ++l) local[l] = y(supports_(i, l));
    element_hessian(i, local.data(), eta, hess.data());
    for (Index b = 0; b < nj; ++b)
      for (Index a = 0; a < nj; ++a)
        out.emplace_back(supports_(i, a), supports_(i, b),
                         weights_(i) * hess[a + nj * b]);
  }
}

SparseMat HamiltonianModel::hessian(const ConstVecRef& y,
                                    const ConstVecRef& eta) const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(quad_.nonZeros() +
                                        num_elements() * support_size() *
                                            support_size()));
  for (Index k = 0; k < quad_.outerSize(); ++k)
    for (SparseMat::InnerIterator it(quad_, k); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  nonquadratic_hessian_triplets(y, eta, trip);
  SparseMat H(full_dim(), full_dim());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

SparseMat HamiltonianModel::element_jacobian(const ConstVecRef& y,
                                             const ConstVecRef& eta) const {
  const Index d = num_elements(), nj = support_size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(d * nj));
  std::vector<double> local(nj), grad(nj);
  for (Index i = 0; i < d; ++i) {
    for (Index l = 0; l < nj; ++l) local[l] = y(supports_(i, l));
    element_gradient(i, local.data(), eta, grad.data());
    for (Index l = 0; l < nj; ++l) trip.emplace_back(i, supports_(i, l), grad[l]);
  }
  SparseMat Jh(d, full_dim());
  Jh.setFromTriplets(trip.begin(), trip.end());
  return Jh;
}

Mat<double> HamiltonianModel::gradients(const Mat<double>& Y,
                                        const IndexSet& params) const {
  if (static_cast<Index>(params.size()) != Y.cols())
    throw DimensionError("one parameter index per state column required");
  Mat<double> G = quad_ * Y;
  for (Index k = 0; k < Y.cols(); ++k)
    add_nonquadratic_gradient(Y.col(k), params_.col(params[k]), G.col(k));
  return G;
}

}  // namespace spahr
