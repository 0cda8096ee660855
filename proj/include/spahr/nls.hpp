#pragma once

#include <memory>
#include <numbers>
#include <vector>

#include "spahr/model.hpp"

namespace spahr {

enum class NlsTestCase { localized, nonlocalized };

/// Uniform samples lo, ..., hi (a single sample sits at lo).
struct ParameterAxis {
  double lo = 0.0;
  double hi = 0.0;
  Index count = 1;

  std::vector<double> values() const;
};

/// Tensor-product grid, first axis varying fastest; one column per parameter.
Mat<double> parameter_grid(const std::vector<ParameterAxis>& axes);

struct NlsConfig {
  double lx = 2.0 * std::numbers::pi;
  double ly = 2.0 * std::numbers::pi;
  Index nx = 32;
  Index ny = 32;
  NlsTestCase test_case = NlsTestCase::localized;
  /// (α, β, ε) for the localized case, (α, β) for the nonlocalized one.
  std::vector<ParameterAxis> axes;
  /// Nonlinearity strength when ε is not a grid axis.
  double epsilon = -1.0;

  void validate() const;
};

/// 2D periodic cubic Schrödinger equation in real form y = (q; p), with
/// H = ½(−qᵀDq − pᵀDp) − (ε/4)Σ_i (q_i² + p_i²)² and D the 5-point Laplacian.
/// Node (ix, iy) has index ix + N_x·iy; element i couples q_i and p_i.
class NlsModel final : public HamiltonianModel {
 public:
  explicit NlsModel(NlsConfig cfg);

  const NlsConfig& config() const { return cfg_; }
  double epsilon(const ConstVecRef& eta) const {
    return eta.size() >= 3 ? eta(2) : cfg_.epsilon;
  }
  double dx() const { return 2.0 * cfg_.lx / static_cast<double>(cfg_.nx); }
  double dy() const { return 2.0 * cfg_.ly / static_cast<double>(cfg_.ny); }
  double x(Index ix) const { return -cfg_.lx + static_cast<double>(ix) * dx(); }
  double y(Index iy) const { return -cfg_.ly + static_cast<double>(iy) * dy(); }

  Vec<double> initial_state(const ConstVecRef& eta) const;
  /// Initial states of all parameters, 2N x p.
  Mat<double> initial_states() const;

  double element_value(Index i, const double* local,
                       const ConstVecRef& eta) const override;
  void element_gradient(Index i, const double* local, const ConstVecRef& eta,
                        double* grad) const override;
  void element_hessian(Index i, const double* local, const ConstVecRef& eta,
                       double* hess) const override;

  double nonquadratic(const ConstVecRef& y, const ConstVecRef& eta) const override;
  void add_nonquadratic_gradient(const ConstVecRef& y, const ConstVecRef& eta,
                                 VecRef out) const override;

  /// The periodic Laplacian D (N x N).
  const SparseMat& laplacian() const { return lap_; }

 private:
  NlsConfig cfg_;
  SparseMat lap_;
};

std::unique_ptr<NlsModel> nls_build(const NlsConfig& cfg);
Vec<double> initial_condition(const NlsConfig& cfg, const ConstVecRef& eta);

}  // namespace spahr
