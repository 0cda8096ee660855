#pragma once

#include <cmath>

#include "spahr/dlr.hpp"
#include "spahr/model.hpp"

namespace spahr {

enum class IndicatorKind { theta, projection_residual };

struct AdaptivityState {
  double r_hat = 1.1;
  double c_hat = 1.1;
  int l = 0;
  /// Indicator value at the last update (or at the first step).
  double e_bar = 0.0;
  bool initialized = false;
  /// Σ Δt_ℓ r̃_ℓ since the last update.
  double accumulator = 0.0;
  IndicatorKind kind = IndicatorKind::projection_residual;
  Index last_update_step = 0;

  double threshold() const { return e_bar * r_hat * std::pow(c_hat, l); }
};

struct ErrorIndicatorSample {
  double theta = 0.0;
  double r_tilde = 0.0;
  double grad_norm = 0.0;
  /// ‖Π_T X‖_F from the split-norm formula.
  double projected_norm = 0.0;
};

/// Everything derived from the vector field X = J∇H(AZ*) at the sampled
/// columns; shared by the indicators, the rank update and the integrator.
struct ProjectionAnalysis {
  Mat<double> basis_velocity;  ///< Ȧ(A, Z*)
  Mat<double> defect;          ///< X − Π_T X
  ErrorIndicatorSample sample;
};

ProjectionAnalysis analyze_projection(const HamiltonianModel& model,
                                      const ReducedState<double>& state,
                                      const IndexSet& sample, double eps_reg = 1e-12);

/// θ = angle between X and its tangent projection, via
/// ‖Π_T X‖² = ‖ȦZ*‖² + ‖AᵀX‖²; θ = 0 when X = 0.
ErrorIndicatorSample indicator_theta(const ReducedState<double>& state,
                                     const HamiltonianModel& model,
                                     const IndexSet& sample, double eps_reg = 1e-12);

/// Adds Δt·r̃ to the accumulator and returns it.
double accumulate_residual(AdaptivityState& state, double r_tilde, double dt);

double indicator_projection_residual(const ReducedState<double>& state,
                                     const HamiltonianModel& model,
                                     const IndexSet& sample, AdaptivityState& adapt,
                                     double dt, double eps_reg = 1e-12);

/// e ≥ ē·r̂·ĉ^l.
bool should_update(const AdaptivityState& state, double e);

/// ē ← e, l ← l + 1, accumulator reset.
void register_update(AdaptivityState& state, double e, Index step);

struct GrowthPolicy {
  enum class Kind { fixed, tol };
  Kind kind = Kind::fixed;
  Index pairs = 1;
  double tol = 0.5;
};

struct RankChange {
  ReducedState<double> state;
  Index pairs_changed = 0;
};

/// Augments the basis with dominant left singular vectors v of the projection
/// defect, each with its dual Jᵀv, and pads Z with zero rows.
RankChange rank_increase(const ReducedState<double>& state, const Mat<double>& defect,
                         const GrowthPolicy& growth);

/// Rotates the basis onto the singular vectors of the complex coefficients
/// Z_top + iZ_bottom and drops the pairs with σ_i < τ_shrink·σ_max.
RankChange rank_decrease(const ReducedState<double>& state, double tau_shrink,
                         Index min_dwell, Index steps_since_change);

struct SamplingPolicy {
  /// φ; 1 selects every parameter.
  double fraction = 0.2;
};

struct SampleSelection {
  IndexSet indices;
  /// p < 2n, so every parameter is used.
  bool sampling_disabled = false;
};

/// p_A* = max(2n, ceil(φp)) pivoted-QR-selected columns of Z, ascending.
SampleSelection select_sample_parameters(const Mat<double>& Z,
                                         const SamplingPolicy& policy);

}  // namespace spahr
