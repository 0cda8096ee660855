#pragma once

#include <functional>
#include <vector>

#include "spahr/model.hpp"

namespace spahr {

enum class FomLinearSolver { sparse_lu, bicgstab };

struct FomOptions {
  double newton_tol = 1e-10;
  int max_iter = 50;
  /// Snapshots are taken every `stride` steps, plus the initial and final ones.
  Index stride = 1;
  FomLinearSolver solver = FomLinearSolver::sparse_lu;
};

/// Snapshots of a full-order trajectory; states[i] is 2N x p at steps[i].
struct Trajectory {
  std::vector<Index> steps;
  std::vector<double> times;
  std::vector<Mat<double>> states;
};

using SnapshotObserver =
    std::function<void(Index step, double t, const Mat<double>& state)>;

/// Implicit midpoint rule y⁺ = y + Δt·J∇H((y + y⁺)/2) for every column of R0
/// (column k uses parameter k), with Newton on the stage slope. The observer
/// receives each snapshot. Returns the final state.
Mat<double> fom_solve(const HamiltonianModel& model, const Mat<double>& R0,
                      const TimeGrid& grid, const FomOptions& opts,
                      const SnapshotObserver& observer);

/// In-memory convenience variant.
Trajectory fom_solve(const HamiltonianModel& model, const Mat<double>& R0,
                     const TimeGrid& grid, const FomOptions& opts = {});

}  // namespace spahr
