#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spahr/adaptivity.hpp"
#include "spahr/eim.hpp"
#include "spahr/fom.hpp"
#include "spahr/nls.hpp"

namespace spahr {

enum class RunMode { fom, rom, hrom };

struct RunConfig {
  std::string name = "run";
  RunMode mode = RunMode::hrom;
  NlsConfig model;
  double t0 = 0.0;
  double final_time = 0.5;
  Index steps = 500;

  /// 2n₀, the initial number of basis columns.
  Index initial_rank = 12;
  bool adaptive = false;
  double r_hat = 1.1;
  double c_hat = 1.1;
  GrowthPolicy growth;
  IndicatorKind indicator = IndicatorKind::projection_residual;
  double shrink_tol = 0.0;
  Index min_dwell = 10;
  double eps_reg = 1e-12;

  double tau_m = 1e-8;
  double tau_ms = 1e-4;
  /// EIM update every `eim_frequency` steps.
  Index eim_frequency = 1;
  Index p_cap = 0;
  /// (time, τ_m) pairs; from each listed time on, rebuilds use that τ_m.
  std::vector<std::pair<double, double>> tau_m_schedule;

  /// Sample fraction φ for the basis evolution; 1 uses every parameter.
  double sample_fraction = 0.2;
  EimParameterPolicy eim_params = EimParameterPolicy::greedy;

  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  FomLinearSolver fom_solver = FomLinearSolver::sparse_lu;
  bool restage_sampled = false;

  std::uint64_t seed = 0;
  std::string output_dir;
  Index snapshot_stride = 1;
  std::string reference_path;
  bool save_trajectory = false;
  /// Extra consistency checks whose cost is excluded from timings.
  bool validate = false;

  TimeGrid time_grid() const { return TimeGrid::uniform(t0, final_time, steps); }
  double tau_m_at(double t) const;
  void check() const;
};

std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);
std::string preset_description(const std::string& name);

/// Sets one "section.key" entry from its text form.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// INI file with [run], [model], [time], [rank], [eim], [sampling]; an
/// optional run.preset supplies defaults that the remaining keys override.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in);

/// Resolved configuration in the same INI layout.
void write_config(std::ostream& out, const RunConfig& cfg);

std::string to_string(RunMode m);

}  // namespace spahr
