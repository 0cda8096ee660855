#pragma once

#include <Eigen/Sparse>

#include <vector>

#include "spahr/linalg.hpp"

namespace spahr {

using SparseMat = Eigen::SparseMatrix<double>;
using ConstVecRef = Eigen::Ref<const Vec<double>>;
using VecRef = Eigen::Ref<Vec<double>>;
/// Row i lists the state entries element i depends on.
using SupportTable =
    Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> times);
  static TimeGrid uniform(double t0, double T, Index nt);

  Index steps() const { return static_cast<Index>(times_.size()) - 1; }
  double t0() const { return times_.front(); }
  double final_time() const { return times_.back(); }
  double time(Index j) const { return times_[j]; }
  double step(Index j) const { return times_[j + 1] - times_[j]; }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<double> times_{0.0, 1.0};
};

/// Parametric Hamiltonian H(y; η) = ½ yᵀ L y + Σ_i c_i h_i(y; η) on R^{2N},
/// where each h_i depends only on the few entries listed in its support row.
/// Parameters η_1..η_p are the columns of parameters().
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  Index half_dim() const { return half_dim_; }
  Index full_dim() const { return 2 * half_dim_; }
  Index param_dim() const { return params_.rows(); }
  Index num_params() const { return params_.cols(); }
  const Mat<double>& parameters() const { return params_; }
  /// Symmetric quadratic operator L.
  const SparseMat& quadratic_operator() const { return quad_; }

  Index num_elements() const { return supports_.rows(); }
  Index support_size() const { return supports_.cols(); }
  const SupportTable& supports() const { return supports_; }
  const Vec<double>& weights() const { return weights_; }

  /// h_i evaluated on the gathered support values `local`.
  virtual double element_value(Index i, const double* local,
                               const ConstVecRef& eta) const = 0;
  /// ∂h_i/∂local, written to grad[0..support_size).
  virtual void element_gradient(Index i, const double* local,
                                const ConstVecRef& eta, double* grad) const = 0;
  /// ∂²h_i/∂local², column-major support_size x support_size.
  virtual void element_hessian(Index i, const double* local,
                               const ConstVecRef& eta, double* hess) const = 0;

  double hamiltonian(const ConstVecRef& y, const ConstVecRef& eta) const;
  double quadratic_part(const ConstVecRef& y) const;
  /// cᵀ h(y).
  virtual double nonquadratic(const ConstVecRef& y, const ConstVecRef& eta) const;
  Vec<double> element_values(const ConstVecRef& y, const ConstVecRef& eta) const;

  Vec<double> gradient(const ConstVecRef& y, const ConstVecRef& eta) const;
  /// out += ∇(cᵀh)(y).
  virtual void add_nonquadratic_gradient(const ConstVecRef& y,
                                         const ConstVecRef& eta,
                                         VecRef out) const;
  SparseMat hessian(const ConstVecRef& y, const ConstVecRef& eta) const;
  /// Triplets of ∇²(cᵀh)(y).
  virtual void nonquadratic_hessian_triplets(
      const ConstVecRef& y, const ConstVecRef& eta,
      std::vector<Eigen::Triplet<double>>& out) const;
  /// Sparse Jacobian of h, d x 2N.
  SparseMat element_jacobian(const ConstVecRef& y, const ConstVecRef& eta) const;

  /// Gradient of the Hamiltonian for every column of Y (one parameter each).
  Mat<double> gradients(const Mat<double>& Y, const IndexSet& params) const;

 protected:
  HamiltonianModel() = default;
  void set_structure(Index half_dim, SparseMat quad, SupportTable supports,
                     Vec<double> weights, Mat<double> params);

 private:
  Index half_dim_ = 0;
  SparseMat quad_;
  SupportTable supports_;
  Vec<double> weights_;
  Mat<double> params_;
};

}  // namespace spahr
