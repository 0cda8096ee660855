#include "spahr/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "spahr/adaptivity.hpp"
#include "spahr/eim.hpp"
#include "spahr/metrics.hpp"
#include "spahr/nls.hpp"
#include "spahr/prk2.hpp"

namespace spahr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Accumulates wall-clock into one phase while in scope.
class PhaseTimer {
 public:
  explicit PhaseTimer(double& slot) : slot_(slot), t0_(Clock::now()) {}
  ~PhaseTimer() { slot_ += seconds_since(t0_); }
  PhaseTimer(const PhaseTimer&) = delete;
  PhaseTimer& operator=(const PhaseTimer&) = delete;

 private:
  double& slot_;
  Clock::time_point t0_;
};

/// Turns states into metric rows and optional snapshot records.
class Recorder {
 public:
  Recorder(const RunConfig& cfg, const HamiltonianModel& model, const Mat<double>& W0,
           const Trajectory* reference, bool keep, RunResult& result)
      : cfg_(cfg), ham_(model, W0), ref_(reference), keep_(keep), result_(result) {
    result_.diag.excluded_hamiltonian_columns = ham_.excluded();
    if (ref_)
      for (std::size_t i = 0; i < ref_->steps.size(); ++i) by_step_[ref_->steps[i]] = i;
    if (!cfg.output_dir.empty()) {
      metrics_ = std::make_unique<MetricsWriter>(cfg.output_dir + "/metrics.csv");
      timing_ = std::make_unique<TimingWriter>(cfg.output_dir + "/timing.csv");
      if (cfg.mode == RunMode::fom || cfg.save_trajectory)
        traj_ = std::make_unique<TrajectoryWriter>(cfg.output_dir + "/trajectory.bin",
                                                   W0.rows(), W0.cols(), grid_hash(cfg));
    }
  }

  bool due(Index step) const {
    return step % cfg_.snapshot_stride == 0 || step == cfg_.steps;
  }

  void record(MetricsRow row, const Mat<double>& W, const PhaseTimes& time) {
    row.ham_error = ham_(W);
    result_.diag.max_ham_error = std::max(result_.diag.max_ham_error, row.ham_error);
    if (auto it = by_step_.find(row.step); it != by_step_.end())
      row.error = relative_error(ref_->states[it->second], W);
    if (row.step == cfg_.steps) result_.diag.final_error = row.error;
    result_.metrics.push_back(row);
    if (metrics_) metrics_->write(row);
    if (timing_) {
      TimingRow tr;
      tr.step = row.step;
      tr.t = row.t;
      tr.basis = time.basis;
      tr.newton = time.newton;
      tr.eim = time.eim;
      tr.indicator = time.indicator;
      tr.rank_update = time.rank_update;
      tr.total = time.total;
      timing_->write(tr);
    }
    if (traj_) traj_->write(row.step, row.t, W);
    if (keep_) {
      result_.snapshots.steps.push_back(row.step);
      result_.snapshots.times.push_back(row.t);
      result_.snapshots.states.push_back(W);
    }
  }

 private:
  const RunConfig& cfg_;
  HamiltonianErrorTracker ham_;
  const Trajectory* ref_;
  bool keep_;
  RunResult& result_;
  std::map<Index, std::size_t> by_step_;
  std::unique_ptr<MetricsWriter> metrics_;
  std::unique_ptr<TimingWriter> timing_;
  std::unique_ptr<TrajectoryWriter> traj_;
};

void track_structure(const ReducedState<double>& s, RunDiagnostics& d) {
  d.max_orthogonality = std::max(d.max_orthogonality, s.basis.orthogonality_residual());
  d.max_symplecticity = std::max(d.max_symplecticity, s.basis.symplecticity_residual());
}

double indicator_identity_error(const ErrorIndicatorSample& s) {
  if (!(s.grad_norm > 0.0)) return 0.0;
  return std::abs(s.r_tilde - s.grad_norm * std::sin(s.theta)) / s.grad_norm;
}

std::string fom_solver_name(FomLinearSolver s) {
  return s == FomLinearSolver::sparse_lu ? "sparse_lu" : "bicgstab";
}

void write_summary(const RunConfig& cfg, const RunResult& r, const std::string& path) {
  nlohmann::ordered_json j;
  j["name"] = cfg.name;
  j["mode"] = to_string(cfg.mode);
  j["steps"] = cfg.steps;
  j["final_time"] = cfg.final_time;
  j["final_error"] = std::isnan(r.diag.final_error) ? nlohmann::ordered_json() : nlohmann::ordered_json(r.diag.final_error);
  j["max_ham_error"] = r.diag.max_ham_error;
  j["final_two_n"] = r.diag.final_two_n;
  j["final_m"] = r.diag.final_m;
  j["wall_seconds"] = r.time.total;
  j["phase_seconds"] = {{"basis", r.time.basis},
                        {"newton", r.time.newton},
                        {"eim", r.time.eim},
                        {"indicator", r.time.indicator},
                        {"rank_update", r.time.rank_update}};
  j["max_orthogonality_residual"] = r.diag.max_orthogonality;
  j["max_symplecticity_residual"] = r.diag.max_symplecticity;
  j["max_delta_identity_error"] = r.diag.max_delta_identity_error;
  j["max_indicator_identity_error"] = r.diag.max_indicator_identity_error;
  j["rank_updates"] = r.diag.rank_updates;
  j["rank_decreases"] = r.diag.rank_decreases;
  j["eim_updates"] = r.diag.eim_updates;
  j["eim_rebuilds"] = r.diag.eim_rebuilds;
  j["delta_flags"] = r.diag.delta_flags;
  j["residual_increases"] = r.diag.residual_increases;
  j["max_newton_iterations"] = r.diag.max_newton_iterations;
  j["excluded_hamiltonian_columns"] = r.diag.excluded_hamiltonian_columns;
  if (cfg.mode == RunMode::fom) j["fom_solver"] = fom_solver_name(cfg.fom_solver);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

void run_fom(const RunConfig& cfg, const NlsModel& model, const Trajectory* ref,
             const RunOptions& opts, RunResult& result) {
  const Mat<double> W0 = model.initial_states();
  Recorder rec(cfg, model, W0, ref, opts.keep_snapshots, result);
  FomOptions fo;
  fo.newton_tol = cfg.newton_tol;
  fo.max_iter = cfg.newton_max_iter;
  fo.stride = cfg.snapshot_stride;
  fo.solver = cfg.fom_solver;
  const auto start = Clock::now();
  double solve_seconds = 0.0;
  auto last = start;
  const TimeGrid grid = cfg.time_grid();
  result.final_state = fom_solve(model, W0, grid, fo, [&](Index step, double t,
                                                          const Mat<double>& W) {
    solve_seconds += seconds_since(last);
    result.time.newton = solve_seconds;
    result.time.total = solve_seconds;
    MetricsRow row;
    row.step = step;
    row.t = t;
    row.two_n = W.rows();
    rec.record(row, W, result.time);
    if (opts.verbose && step % (10 * cfg.snapshot_stride) == 0)
      std::cerr << "[fom] step " << step << "/" << cfg.steps << "\n";
    last = Clock::now();
  });
  result.diag.final_two_n = model.full_dim();
}

void run_reduced(const RunConfig& cfg, const NlsModel& model, const Trajectory* ref,
                 const RunOptions& opts, RunResult& result) {
  const bool hyper = cfg.mode == RunMode::hrom;
  const TimeGrid grid = cfg.time_grid();
  auto& time = result.time;
  auto& diag = result.diag;
  const auto start = Clock::now();

  const Mat<double> R0 = model.initial_states();
  ReducedState<double> state;
  {
    auto [basis, Z0] = complex_svd_basis(R0, cfg.initial_rank / 2);
    state.basis = std::move(basis);
    state.Z = std::move(Z0);
  }
  track_structure(state, diag);

  std::shared_ptr<const EimPair> eim;
  const auto rebuild_eim = [&](const IndexSet& params, double t) {
    PhaseTimer pt(time.eim);
    auto pair = eim_rebuild(model, state.A(), gather_cols(state.Z, params), params,
                              cfg.tau_m_at(t));
    eim = pair ? std::make_shared<const EimPair>(std::move(*pair)) : nullptr;
    ++diag.eim_rebuilds;
  };
  if (hyper) {
    PhaseTimer pt(time.eim);
    auto pair = eim_init(model, state.A(), state.Z, cfg.tau_m_at(grid.t0()));
    if (pair) eim = std::make_shared<const EimPair>(std::move(*pair));
  }

  const SamplingPolicy sampling{cfg.sample_fraction};
  AdaptivityState adapt;
  adapt.r_hat = cfg.r_hat;
  adapt.c_hat = cfg.c_hat;
  adapt.kind = cfg.indicator;

  Prk2Options po;
  po.newton_tol = cfg.newton_tol;
  po.max_iter = cfg.newton_max_iter;
  po.eps_reg = cfg.eps_reg;
  po.restage_sampled = cfg.restage_sampled;

  EimUpdateOptions eo;
  eo.tau_ms = cfg.tau_ms;
  eo.p_cap = cfg.p_cap;
  eo.policy = cfg.eim_params;
  eo.validate = cfg.validate;

  // E_H is measured against the reconstructed initial state.
  Recorder rec(cfg, model, state.reconstruct(), ref, opts.keep_snapshots, result);
  MetricsRow row;
  row.step = 0;
  row.t = grid.t0();
  row.two_n = state.basis.rank();
  row.m = eim ? eim->dim() : 0;
  time.total = seconds_since(start);
  rec.record(row, state.reconstruct(), time);

  Index last_change = 0;
  for (Index j = 0; j < grid.steps(); ++j) {
    const auto step_start = Clock::now();
    const double t = grid.time(j), dt = grid.step(j);
    row = MetricsRow{};
    double excluded = 0.0;
    try {
      SampleSelection sel;
      {
        PhaseTimer pt(time.basis);
        sel = select_sample_parameters(state.Z, sampling);
      }
      ProjectionAnalysis pa;
      double e = 0.0;
      {
        PhaseTimer pt(time.indicator);
        pa = analyze_projection(model, state, sel.indices, cfg.eps_reg);
        e = cfg.indicator == IndicatorKind::theta
                ? pa.sample.theta
                : accumulate_residual(adapt, pa.sample.r_tilde, dt);
      }
      if (cfg.validate)
        diag.max_indicator_identity_error =
            std::max(diag.max_indicator_identity_error, indicator_identity_error(pa.sample));
      row.indicator = e;

      const auto refresh = [&] {
        sel = select_sample_parameters(state.Z, sampling);
        if (hyper) rebuild_eim(sel.indices, t);
        PhaseTimer pt(time.indicator);
        pa = analyze_projection(model, state, sel.indices, cfg.eps_reg);
      };

      if (!adapt.initialized) {
        adapt.e_bar = e;
        adapt.initialized = true;
      } else if (cfg.adaptive && should_update(adapt, e)) {
        PhaseTimer pt(time.rank_update);
        RankChange ch = rank_increase(state, pa.defect, cfg.growth);
        if (ch.pairs_changed > 0) {
          state = std::move(ch.state);
          track_structure(state, diag);
          register_update(adapt, e, j);
          ++diag.rank_updates;
          row.rank_update = 1;
          last_change = j;
          refresh();
          // The accumulated sum restarts at the update step itself.
          if (cfg.indicator == IndicatorKind::projection_residual)
            accumulate_residual(adapt, pa.sample.r_tilde, dt);
        } else {
          std::cerr << "warning: rank update requested at step " << j
                    << " but the projection defect is numerically zero\n";
        }
      }
      if (cfg.adaptive && cfg.shrink_tol > 0.0) {
        PhaseTimer pt(time.rank_update);
        RankChange ch = rank_decrease(state, cfg.shrink_tol, cfg.min_dwell, j - last_change);
        if (ch.pairs_changed > 0) {
          state = std::move(ch.state);
          track_structure(state, diag);
          ++diag.rank_decreases;
          row.rank_update = -1;
          last_change = j;
          refresh();
          adapt.e_bar = cfg.indicator == IndicatorKind::theta ? pa.sample.theta
                                                               : dt * pa.sample.r_tilde;
          adapt.accumulator = cfg.indicator == IndicatorKind::theta ? 0.0 : adapt.e_bar;
        }
      }
      row.p_a_star = static_cast<Index>(sel.indices.size());

      const ReducedHamiltonianFactory factory =
          hyper && eim ? hyper_reduced_factory(model, eim) : exact_reduced_factory(model);
      const auto t_step = Clock::now();
      Prk2Result res =
          prk2_step(model, state, sel.indices, factory, dt, j, po, &pa.basis_velocity);
      const double step_seconds = seconds_since(t_step);
      time.newton += res.newton_seconds;
      time.basis += step_seconds - res.newton_seconds;
      diag.max_newton_iterations = std::max(diag.max_newton_iterations, res.max_newton_iterations);
      state = std::move(res.next);

      if (hyper && (j + 1) % cfg.eim_frequency == 0) {
        PhaseTimer pt(time.eim);
        if (eim) {
          EimUpdateResult up = eim_update(model, state.A(), state.Z, eim, eo);
          time.eim -= up.validation_seconds;
          excluded += up.validation_seconds;
          if (up.updated) {
            eim = up.pair;
            ++diag.eim_updates;
          }
          row.delta = up.delta;
          row.m_s = up.m_s;
          row.p_u_star = up.p_u_star;
          row.delta_flag = up.delta_nonpositive ? 1 : 0;
          if (up.delta_nonpositive) ++diag.delta_flags;
          if (cfg.validate && !std::isnan(up.identity_error))
            diag.max_delta_identity_error =
                std::max(diag.max_delta_identity_error, up.identity_error);
          if (cfg.validate && up.residual_after > up.residual_before)
            ++diag.residual_increases;
        } else {
          auto pair = eim_init(model, state.A(), state.Z, cfg.tau_m_at(grid.time(j + 1)));
          if (pair) eim = std::make_shared<const EimPair>(std::move(*pair));
        }
      }
    } catch (const IntegrationError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw IntegrationError(err.what(), static_cast<long>(j), -1);
    }
    time.total += seconds_since(step_start) - excluded;
    {
      // Validation work is kept out of the timings.
      track_structure(state, diag);
    }

    const Index step = j + 1;
    if (rec.due(step)) {
      row.step = step;
      row.t = grid.time(step);
      row.two_n = state.basis.rank();
      row.m = eim ? eim->dim() : 0;
      rec.record(row, state.reconstruct(), time);
    }
    if (opts.verbose && step % 50 == 0)
      std::cerr << "[" << to_string(cfg.mode) << "] step " << step << "/" << grid.steps()
                << " 2n=" << state.basis.rank() << " m=" << (eim ? eim->dim() : 0) << "\n";
  }

  diag.final_two_n = state.basis.rank();
  diag.final_m = eim ? eim->dim() : 0;
  result.final_state = state.reconstruct();
  if (!cfg.output_dir.empty()) {
    write_matrix(cfg.output_dir + "/final_basis.bin", state.A(), grid_hash(cfg));
    write_matrix(cfg.output_dir + "/final_coefficients.bin", state.Z, grid_hash(cfg));
  }
  result.final_reduced = std::move(state);
}

}  // namespace

std::string grid_hash(const RunConfig& cfg) {
  std::ostringstream s;
  s << (cfg.model.test_case == NlsTestCase::localized ? "localized" : "nonlocalized") << ';'
    << format_double(cfg.model.lx) << ';' << format_double(cfg.model.ly) << ';'
    << cfg.model.nx << ';' << cfg.model.ny << ';';
  for (const auto& a : cfg.model.axes)
    s << format_double(a.lo) << ',' << format_double(a.hi) << ',' << a.count << ';';
  if (cfg.model.axes.size() < 3) s << format_double(cfg.model.epsilon) << ';';
  s << format_double(cfg.t0) << ';' << format_double(cfg.final_time) << ';' << cfg.steps;
  const std::string text = s.str();
  return hex64(fnv1a(text.data(), text.size()));
}

RunResult run(const RunConfig& cfg, const RunOptions& opts) {
  cfg.check();
  const auto model = nls_build(cfg.model);

  Trajectory loaded;
  const Trajectory* ref = opts.reference;
  if (!ref && !cfg.reference_path.empty()) {
    TrajectoryHeader h;
    loaded = read_trajectory(cfg.reference_path, &h);
    if (h.grid_hash != grid_hash(cfg))
      throw ConfigError("reference " + cfg.reference_path +
                        " was computed on a different grid (hash " + h.grid_hash + ")");
    if (h.rows != model->full_dim() || h.cols != model->num_params())
      throw ConfigError("reference trajectory has the wrong shape");
    ref = &loaded;
  }

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream ini(cfg.output_dir + "/config.ini");
    write_config(ini, cfg);
  }

  RunResult result;
  if (cfg.mode == RunMode::fom)
    run_fom(cfg, *model, ref, opts, result);
  else
    run_reduced(cfg, *model, ref, opts, result);

  if (!cfg.output_dir.empty()) write_summary(cfg, result, cfg.output_dir + "/summary.json");
  return result;
}

}  // namespace spahr
