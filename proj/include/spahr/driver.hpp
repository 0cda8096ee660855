#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spahr/config.hpp"
#include "spahr/dlr.hpp"
#include "spahr/fom.hpp"
#include "spahr/io.hpp"

namespace spahr {

struct PhaseTimes {
  double basis = 0.0;
  double newton = 0.0;
  double eim = 0.0;
  double indicator = 0.0;
  double rank_update = 0.0;
  double total = 0.0;
};

struct RunDiagnostics {
  /// Largest ‖AᵀA − I‖_F and ‖AᵀJA − J‖_F over all accepted steps.
  double max_orthogonality = 0.0;
  double max_symplecticity = 0.0;
  /// Largest relative δ-identity error over EIM updates (validate mode).
  double max_delta_identity_error = 0.0;
  /// Largest |r̃ − ‖∇H‖ sin θ| / ‖∇H‖ over indicator evaluations (validate mode).
  double max_indicator_identity_error = 0.0;
  Index rank_updates = 0;
  Index rank_decreases = 0;
  Index eim_updates = 0;
  Index eim_rebuilds = 0;
  Index delta_flags = 0;
  /// EIM updates with δ ≤ 0 but a nonzero residual, i.e. the update made the
  /// sampled fit worse (validate mode: residual_after > residual_before).
  Index residual_increases = 0;
  int max_newton_iterations = 0;
  IndexSet excluded_hamiltonian_columns;
  Index final_two_n = 0;
  Index final_m = 0;
  double final_error = kNaN;
  double max_ham_error = 0.0;
};

struct RunOptions {
  /// FOM snapshots for E(t); a run.reference file is read when null.
  const Trajectory* reference = nullptr;
  /// Keep the reconstructed snapshots in RunResult::snapshots.
  bool keep_snapshots = false;
  /// Progress lines on stderr.
  bool verbose = false;
};

struct RunResult {
  std::vector<MetricsRow> metrics;
  Trajectory snapshots;
  Mat<double> final_state;
  std::optional<ReducedState<double>> final_reduced;
  PhaseTimes time;
  RunDiagnostics diag;
};

/// Runs the configured FOM, ROM or hROM simulation. When cfg.output_dir is
/// set, writes metrics.csv, timing.csv, summary.json, config.ini and, for FOM
/// runs or with save_trajectory, trajectory.bin; reduced runs also store
/// final_basis.bin and final_coefficients.bin.
RunResult run(const RunConfig& cfg, const RunOptions& opts = {});

/// Grid hash written into trajectory headers: FNV-1a over the model and time
/// grid settings that determine the snapshot layout.
std::string grid_hash(const RunConfig& cfg);

}  // namespace spahr
