#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "spahr/config.hpp"
#include "spahr/driver.hpp"
#include "spahr/metrics.hpp"
#include "spahr/parallel.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;
constexpr int kRegression = 3;

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw spahr::ConfigError("bad tolerance '" + item + "' in --eps");
    }
  }
  if (out.empty()) throw spahr::ConfigError("--eps needs at least one value");
  return out;
}

int cmd_run(const std::string& config_path, const std::string& preset_name,
            const std::vector<std::string>& sets, const std::string& output,
            bool deterministic, bool verbose) {
  spahr::RunConfig cfg;
  if (!config_path.empty()) cfg = spahr::load_config(config_path);
  else if (!preset_name.empty()) cfg = spahr::preset(preset_name);
  else throw spahr::ConfigError("run needs a configuration file or --preset");
  if (!config_path.empty() && !preset_name.empty())
    throw spahr::ConfigError("give either a configuration file or --preset, not both");
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw spahr::ConfigError("--set expects key=value, got " + kv);
    spahr::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!output.empty()) cfg.output_dir = output;
  if (cfg.output_dir.empty()) cfg.output_dir = "runs/" + cfg.name;
  cfg.check();
  if (deterministic) spahr::set_thread_count(1);

  spahr::RunOptions opts;
  opts.verbose = verbose;
  const auto r = spahr::run(cfg, opts);
  std::cout << cfg.name << " (" << spahr::to_string(cfg.mode) << "): "
            << "final E = " << spahr::format_double(r.diag.final_error)
            << ", max E_H = " << spahr::format_double(r.diag.max_ham_error)
            << ", 2n = " << r.diag.final_two_n << ", m = " << r.diag.final_m
            << ", wall = " << spahr::format_double(r.time.total) << " s\n"
            << "outputs in " << cfg.output_dir << "\n";
  return kOk;
}

int cmd_epsilon_rank(const std::string& path, const std::string& eps, const std::string& output) {
  const auto traj = spahr::read_trajectory(path);
  const auto table = spahr::epsilon_rank(traj, parse_eps_list(eps));
  if (output.empty()) {
    spahr::write_epsilon_rank(std::cout, table);
  } else {
    std::ofstream out(output);
    if (!out) throw spahr::IoError("cannot write " + output);
    spahr::write_epsilon_rank(out, table);
  }
  return kOk;
}

std::string metrics_path(const std::string& p) {
  std::ifstream probe(p + "/metrics.csv");
  return probe ? p + "/metrics.csv" : p;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& tol_path,
                const std::string& output) {
  const auto ma = spahr::read_metrics(metrics_path(a));
  const auto mb = spahr::read_metrics(metrics_path(b));
  const spahr::CompareTolerances tol =
      tol_path.empty() ? spahr::CompareTolerances{} : spahr::load_tolerances(tol_path);
  const auto report = spahr::compare_metrics(ma, mb, tol);
  if (output.empty()) {
    spahr::write_compare(std::cout, report);
  } else {
    std::ofstream out(output);
    if (!out) throw spahr::IoError("cannot write " + output);
    spahr::write_compare(out, report);
  }
  if (report.regression) {
    std::cerr << "regression: " << report.message << "\n";
    return kRegression;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving adaptive hyper-reduction of parametric Hamiltonian systems"};
  app.require_subcommand(1);

  std::string config_path, preset_name, output;
  std::vector<std::string> sets;
  bool deterministic = false, verbose = false;
  auto* run = app.add_subcommand("run", "Run a FOM, ROM or hROM simulation");
  run->add_option("config", config_path, "INI configuration file");
  run->add_option("--preset", preset_name, "Start from a built-in preset instead of a file");
  run->add_option("--set", sets, "Override a setting, e.g. --set eim.tau_m=1e-6");
  run->add_option("-o,--output", output, "Output directory (default runs/<name>)");
  run->add_flag("--deterministic", deterministic, "Force single-threaded execution");
  run->add_flag("-v,--verbose", verbose, "Print progress to stderr");

  std::string traj_path, eps_list = "1e-1,1e-2,1e-3,1e-4,1e-5", rank_out;
  auto* er = app.add_subcommand("epsilon-rank", "Epsilon-rank of stored snapshots");
  er->add_option("trajectory", traj_path, "Trajectory file")->required();
  er->add_option("--eps", eps_list, "Comma-separated relative tolerances");
  er->add_option("-o,--output", rank_out, "CSV output file (default stdout)");

  std::string run_a, run_b, tol_path, cmp_out;
  auto* cmp = app.add_subcommand("compare", "Align two metric files and check tolerances");
  cmp->add_option("a", run_a, "Baseline metrics file or run directory")->required();
  cmp->add_option("b", run_b, "Candidate metrics file or run directory")->required();
  cmp->add_option("--tolerances", tol_path, "INI file with a [compare] section");
  cmp->add_option("-o,--output", cmp_out, "CSV output file (default stdout)");

  std::string show_name;
  auto* presets = app.add_subcommand("presets", "Built-in configurations");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "List preset names");
  auto* show = presets->add_subcommand("show", "Print a preset as INI");
  show->add_option("name", show_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(config_path, preset_name, sets, output, deterministic, verbose);
    if (*er) return cmd_epsilon_rank(traj_path, eps_list, rank_out);
    if (*cmp) return cmd_compare(run_a, run_b, tol_path, cmp_out);
    if (*presets) {
      if (*show) {
        spahr::write_config(std::cout, spahr::preset(show_name));
      } else {
        for (const auto& n : spahr::preset_names())
          std::cout << n << "\t" << spahr::preset_description(n) << "\n";
      }
      return kOk;
    }
  } catch (const spahr::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const spahr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
