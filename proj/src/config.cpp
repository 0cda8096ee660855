#include "spahr/config.hpp"

#include "spahr/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace spahr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(trim(v), &pos);
    if (pos != trim(v).size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

Index to_index(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError("'" + key + "' expects an integer");
  return static_cast<Index>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("'" + key + "' expects true or false");
}

ParameterAxis to_axis(const std::string& key, const std::string& v) {
  const auto f = split(v, ',');
  if (f.size() == 1) {
    const double x = to_double(key, f[0]);
    return {x, x, 1};
  }
  if (f.size() != 3) throw ConfigError("'" + key + "' expects 'lo, hi, count'");
  return {to_double(key, f[0]), to_double(key, f[1]), to_index(key, f[2])};
}

std::string axis_text(const ParameterAxis& a) {
  return format_double(a.lo) + ", " + format_double(a.hi) + ", " + std::to_string(a.count);
}

void ensure_axes(NlsConfig& m) {
  const std::size_t want = m.test_case == NlsTestCase::localized ? 3 : 2;
  if (m.axes.size() < want) m.axes.resize(want);
}

}  // namespace

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::fom: return "fom";
    case RunMode::rom: return "rom";
    case RunMode::hrom: return "hrom";
  }
  return "?";
}

double RunConfig::tau_m_at(double t) const {
  double tau = tau_m;
  for (const auto& [start, value] : tau_m_schedule)
    if (t >= start) tau = value;
  return tau;
}

void RunConfig::check() const {
  model.validate();
  if (steps < 1 || !(final_time > t0)) throw ConfigError("invalid time grid");
  if (mode != RunMode::fom) {
    const Index N = model.nx * model.ny;
    Index p = 1;
    for (const auto& a : model.axes) p *= a.count;
    if (initial_rank < 2 || initial_rank % 2 != 0)
      throw ConfigError("rank.initial must be a positive even number");
    if (initial_rank > 2 * std::min(N, p))
      throw ConfigError("rank.initial exceeds min(2N, 2p)");
  }
  if (!(newton_tol > 0.0)) throw ConfigError("run.newton_tol must be positive");
  if (newton_max_iter < 1) throw ConfigError("run.newton_max_iter must be positive");
  if (!(tau_m > 0.0) || !(tau_ms >= 0.0)) throw ConfigError("EIM tolerances must be positive");
  if (eim_frequency < 1) throw ConfigError("eim.frequency must be at least 1");
  if (!(sample_fraction > 0.0) || sample_fraction > 1.0)
    throw ConfigError("sampling.fraction must lie in (0, 1]");
  if (!(r_hat > 0.0) || !(c_hat > 0.0)) throw ConfigError("r_hat and c_hat must be positive");
  if (snapshot_stride < 1) throw ConfigError("run.snapshot_stride must be at least 1");
  if (growth.pairs < 1) throw ConfigError("rank.growth_pairs must be at least 1");
  if (!(eps_reg > 0.0)) throw ConfigError("rank.eps_reg must be positive");
}

std::vector<std::string> preset_names() { return {"test1-desk", "test2-desk"}; }

std::string preset_description(const std::string& name) {
  if (name == "test1-desk")
    return "localized hump, 32x32 grid, p=27 over (alpha,beta,eps) in "
           "[0.8,2]x[0.8,2]x[-1.5,-0.5], T=0.5, dt=1e-3, 2n0=12";
  if (name == "test2-desk")
    return "nonlocalized product state, 32x32 grid, p=25 over (alpha,beta) in "
           "[0.97,1.03]^2, eps=-1, T=0.5, dt=1e-3, 2n0=8";
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  c.model.nx = c.model.ny = 32;
  c.t0 = 0.0;
  c.final_time = 0.5;
  c.steps = 500;
  c.snapshot_stride = 10;
  c.tau_ms = 1e-4;
  if (name == "test1-desk") {
    c.model.test_case = NlsTestCase::localized;
    c.model.axes = {{0.8, 2.0, 3}, {0.8, 2.0, 3}, {-1.5, -0.5, 3}};
    c.initial_rank = 12;
    c.tau_m = 1e-8;
  } else if (name == "test2-desk") {
    c.model.test_case = NlsTestCase::nonlocalized;
    c.model.axes = {{0.97, 1.03, 5}, {0.97, 1.03, 5}};
    c.model.epsilon = -1.0;
    c.initial_rank = 8;
    c.tau_m = 1e-10;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  // [run]
  if (key == "run.name") c.name = v;
  else if (key == "run.mode") {
    if (v == "fom") c.mode = RunMode::fom;
    else if (v == "rom") c.mode = RunMode::rom;
    else if (v == "hrom") c.mode = RunMode::hrom;
    else throw ConfigError("run.mode must be fom, rom or hrom");
  } else if (key == "run.output") c.output_dir = v;
  else if (key == "run.reference") c.reference_path = v;
  else if (key == "run.snapshot_stride") c.snapshot_stride = to_index(key, v);
  else if (key == "run.seed") c.seed = static_cast<std::uint64_t>(to_index(key, v));
  else if (key == "run.save_trajectory") c.save_trajectory = to_bool(key, v);
  else if (key == "run.validate") c.validate = to_bool(key, v);
  else if (key == "run.newton_tol") c.newton_tol = to_double(key, v);
  else if (key == "run.newton_max_iter") c.newton_max_iter = static_cast<int>(to_index(key, v));
  else if (key == "run.restage_sampled") c.restage_sampled = to_bool(key, v);
  else if (key == "run.fom_solver") {
    if (v == "sparse_lu") c.fom_solver = FomLinearSolver::sparse_lu;
    else if (v == "bicgstab") c.fom_solver = FomLinearSolver::bicgstab;
    else throw ConfigError("run.fom_solver must be sparse_lu or bicgstab");
  }
  // [model]
  else if (key == "model.test_case") {
    if (v == "localized") c.model.test_case = NlsTestCase::localized;
    else if (v == "nonlocalized") c.model.test_case = NlsTestCase::nonlocalized;
    else throw ConfigError("model.test_case must be localized or nonlocalized");
    const std::size_t want = c.model.test_case == NlsTestCase::localized ? 3 : 2;
    if (c.model.axes.size() > want) c.model.axes.resize(want);
  } else if (key == "model.lx") c.model.lx = to_double(key, v);
  else if (key == "model.ly") c.model.ly = to_double(key, v);
  else if (key == "model.nx") c.model.nx = to_index(key, v);
  else if (key == "model.ny") c.model.ny = to_index(key, v);
  else if (key == "model.alpha") {
    ensure_axes(c.model);
    c.model.axes[0] = to_axis(key, v);
  } else if (key == "model.beta") {
    ensure_axes(c.model);
    c.model.axes[1] = to_axis(key, v);
  } else if (key == "model.epsilon") {
    if (c.model.test_case == NlsTestCase::localized) {
      ensure_axes(c.model);
      c.model.axes[2] = to_axis(key, v);
    } else {
      c.model.epsilon = to_double(key, v);
    }
  }
  // [time]
  else if (key == "time.t0") c.t0 = to_double(key, v);
  else if (key == "time.final_time") c.final_time = to_double(key, v);
  else if (key == "time.steps") c.steps = to_index(key, v);
  // [rank]
  else if (key == "rank.initial") c.initial_rank = to_index(key, v);
  else if (key == "rank.adaptive") c.adaptive = to_bool(key, v);
  else if (key == "rank.r_hat") c.r_hat = to_double(key, v);
  else if (key == "rank.c_hat") c.c_hat = to_double(key, v);
  else if (key == "rank.growth") {
    if (v == "fixed") c.growth.kind = GrowthPolicy::Kind::fixed;
    else if (v == "tol") c.growth.kind = GrowthPolicy::Kind::tol;
    else throw ConfigError("rank.growth must be fixed or tol");
  } else if (key == "rank.growth_pairs") c.growth.pairs = to_index(key, v);
  else if (key == "rank.growth_tol") c.growth.tol = to_double(key, v);
  else if (key == "rank.indicator") {
    if (v == "theta") c.indicator = IndicatorKind::theta;
    else if (v == "projection_residual") c.indicator = IndicatorKind::projection_residual;
    else throw ConfigError("rank.indicator must be theta or projection_residual");
  } else if (key == "rank.shrink_tol") c.shrink_tol = to_double(key, v);
  else if (key == "rank.min_dwell") c.min_dwell = to_index(key, v);
  else if (key == "rank.eps_reg") c.eps_reg = to_double(key, v);
  // [eim]
  else if (key == "eim.tau_m") c.tau_m = to_double(key, v);
  else if (key == "eim.tau_ms") c.tau_ms = to_double(key, v);
  else if (key == "eim.frequency") c.eim_frequency = to_index(key, v);
  else if (key == "eim.p_cap") c.p_cap = to_index(key, v);
  else if (key == "eim.tau_m_schedule") {
    c.tau_m_schedule.clear();
    if (!v.empty())
      for (const auto& item : split(v, ',')) {
        const auto kv = split(item, ':');
        if (kv.size() != 2) throw ConfigError("eim.tau_m_schedule expects 'time:tau, ...'");
        c.tau_m_schedule.emplace_back(to_double(key, kv[0]), to_double(key, kv[1]));
      }
  }
  // [sampling]
  else if (key == "sampling.basis") {
    if (v == "full") c.sample_fraction = 1.0;
    else if (v != "subsample") throw ConfigError("sampling.basis must be full or subsample");
    else if (c.sample_fraction >= 1.0) c.sample_fraction = 0.2;
  } else if (key == "sampling.fraction") c.sample_fraction = to_double(key, v);
  else if (key == "sampling.eim") {
    if (v == "full") c.eim_params = EimParameterPolicy::full;
    else if (v == "greedy") c.eim_params = EimParameterPolicy::greedy;
    else throw ConfigError("sampling.eim must be full or greedy");
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ptree_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  RunConfig cfg;
  if (auto p = pt.get_optional<std::string>("run.preset")) cfg = preset(trim(*p));
  // test_case first so that axis keys land in the right slots
  if (auto tc = pt.get_optional<std::string>("model.test_case"))
    apply_setting(cfg, "model.test_case", *tc);
  for (const auto& [section, body] : pt) {
    if (!body.data().empty() && body.empty())
      throw ConfigError("configuration key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (full == "run.preset" || full == "model.test_case") continue;
      apply_setting(cfg, full, value.data());
    }
  }
  cfg.check();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  return parse_config(in);
}

void write_config(std::ostream& out, const RunConfig& c) {
  const auto b = [](bool v) { return v ? "true" : "false"; };
  out << "[run]\n"
      << "name = " << c.name << "\n"
      << "mode = " << to_string(c.mode) << "\n"
      << "seed = " << c.seed << "\n"
      << "snapshot_stride = " << c.snapshot_stride << "\n"
      << "newton_tol = " << format_double(c.newton_tol) << "\n"
      << "newton_max_iter = " << c.newton_max_iter << "\n"
      << "fom_solver = " << (c.fom_solver == FomLinearSolver::sparse_lu ? "sparse_lu" : "bicgstab") << "\n"
      << "restage_sampled = " << b(c.restage_sampled) << "\n"
      << "save_trajectory = " << b(c.save_trajectory) << "\n"
      << "validate = " << b(c.validate) << "\n";
  if (!c.reference_path.empty()) out << "reference = " << c.reference_path << "\n";
  out << "\n[model]\n"
      << "test_case = " << (c.model.test_case == NlsTestCase::localized ? "localized" : "nonlocalized") << "\n"
      << "lx = " << format_double(c.model.lx) << "\n"
      << "ly = " << format_double(c.model.ly) << "\n"
      << "nx = " << c.model.nx << "\n"
      << "ny = " << c.model.ny << "\n";
  if (c.model.axes.size() >= 1) out << "alpha = " << axis_text(c.model.axes[0]) << "\n";
  if (c.model.axes.size() >= 2) out << "beta = " << axis_text(c.model.axes[1]) << "\n";
  if (c.model.axes.size() >= 3) out << "epsilon = " << axis_text(c.model.axes[2]) << "\n";
  else out << "epsilon = " << format_double(c.model.epsilon) << "\n";
  out << "\n[time]\n"
      << "t0 = " << format_double(c.t0) << "\n"
      << "final_time = " << format_double(c.final_time) << "\n"
      << "steps = " << c.steps << "\n"
      << "\n[rank]\n"
      << "initial = " << c.initial_rank << "\n"
      << "adaptive = " << b(c.adaptive) << "\n"
      << "r_hat = " << format_double(c.r_hat) << "\n"
      << "c_hat = " << format_double(c.c_hat) << "\n"
      << "growth = " << (c.growth.kind == GrowthPolicy::Kind::fixed ? "fixed" : "tol") << "\n"
      << "growth_pairs = " << c.growth.pairs << "\n"
      << "growth_tol = " << format_double(c.growth.tol) << "\n"
      << "indicator = " << (c.indicator == IndicatorKind::theta ? "theta" : "projection_residual") << "\n"
      << "shrink_tol = " << format_double(c.shrink_tol) << "\n"
      << "min_dwell = " << c.min_dwell << "\n"
      << "eps_reg = " << format_double(c.eps_reg) << "\n"
      << "\n[eim]\n"
      << "tau_m = " << format_double(c.tau_m) << "\n"
      << "tau_ms = " << format_double(c.tau_ms) << "\n"
      << "frequency = " << c.eim_frequency << "\n"
      << "p_cap = " << c.p_cap << "\n";
  if (!c.tau_m_schedule.empty()) {
    out << "tau_m_schedule = ";
    for (std::size_t i = 0; i < c.tau_m_schedule.size(); ++i)
      out << (i ? ", " : "") << format_double(c.tau_m_schedule[i].first) << ":"
          << format_double(c.tau_m_schedule[i].second);
    out << "\n";
  }
  out << "\n[sampling]\n"
      << "fraction = " << format_double(c.sample_fraction) << "\n"
      << "eim = " << (c.eim_params == EimParameterPolicy::full ? "full" : "greedy") << "\n";
}

}  // namespace spahr
