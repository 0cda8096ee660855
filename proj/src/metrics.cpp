#include "spahr/metrics.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <ostream>

namespace spahr {

double relative_error(const Mat<double>& reference, const Mat<double>& approx) {
  if (reference.rows() != approx.rows() || reference.cols() != approx.cols())
    throw DimensionError("relative_error: shape mismatch");
  const double den = reference.norm();
  return den > 0.0 ? (reference - approx).norm() / den : (reference - approx).norm();
}

HamiltonianErrorTracker::HamiltonianErrorTracker(const HamiltonianModel& model,
                                                 const Mat<double>& W0)
    : model_(model), h0_(W0.cols()) {
  for (Index i = 0; i < W0.cols(); ++i) {
    h0_(i) = model_.hamiltonian(W0.col(i), model_.parameters().col(i));
    if (h0_(i) == 0.0) excluded_.push_back(i);
  }
}

double HamiltonianErrorTracker::operator()(const Mat<double>& W) const {
  double sum = 0.0;
  Index used = 0;
  for (Index i = 0; i < W.cols(); ++i) {
    if (h0_(i) == 0.0) continue;
    const double h = model_.hamiltonian(W.col(i), model_.parameters().col(i));
    sum += std::abs((h - h0_(i)) / h0_(i));
    ++used;
  }
  return used > 0 ? sum / static_cast<double>(used) : 0.0;
}

std::vector<double> hamiltonian_error(const HamiltonianModel& model,
                                      const Trajectory& traj, IndexSet* excluded) {
  std::vector<double> out;
  if (traj.states.empty()) return out;
  HamiltonianErrorTracker tracker(model, traj.states.front());
  if (excluded) *excluded = tracker.excluded();
  for (const auto& W : traj.states) out.push_back(tracker(W));
  return out;
}

Index epsilon_rank(const Mat<double>& M, double eps) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<Mat<double>> svd(M);
  return epsilon_rank<double>(svd.singularValues(), eps);
}

EpsilonRankTable epsilon_rank(const Trajectory& traj, const std::vector<double>& eps) {
  EpsilonRankTable t;
  t.times = traj.times;
  t.eps = eps;
  for (const auto& M : traj.states) {
    Eigen::BDCSVD<Mat<double>> svd(M);
    std::vector<Index> row;
    for (double e : eps) row.push_back(epsilon_rank<double>(svd.singularValues(), e));
    t.ranks.push_back(std::move(row));
  }
  return t;
}

void write_epsilon_rank(std::ostream& out, const EpsilonRankTable& table) {
  out << "t,eps,rank\n";
  for (std::size_t i = 0; i < table.times.size(); ++i)
    for (std::size_t k = 0; k < table.eps.size(); ++k)
      out << format_double(table.times[i]) << ',' << format_double(table.eps[k]) << ','
          << table.ranks[i][k] << '\n';
}

CompareTolerances load_tolerances(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ptree_error& e) {
    throw ConfigError(std::string("cannot read tolerances: ") + e.what());
  }
  CompareTolerances tol;
  for (const auto& [section, body] : pt) {
    if (section != "compare") throw ConfigError("unknown tolerance section [" + section + "]");
    for (const auto& [key, value] : body) {
      try {
        const double v = std::stod(value.data());
        if (key == "max_error_ratio") tol.max_error_ratio = v;
        else if (key == "max_ham_error") tol.max_ham_error = v;
        else throw ConfigError("unknown tolerance key " + key);
      } catch (const std::logic_error&) {
        throw ConfigError("bad tolerance value for " + key);
      }
    }
  }
  return tol;
}

CompareReport compare_metrics(const std::vector<MetricsRow>& a,
                              const std::vector<MetricsRow>& b,
                              const CompareTolerances& tol) {
  if (a.size() != b.size()) throw ConfigError("compare: metric files cover different grids");
  CompareReport rep;
  double max_ham_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].step != b[i].step || std::abs(a[i].t - b[i].t) > 1e-12 * (1.0 + std::abs(a[i].t)))
      throw ConfigError("compare: metric files cover different grids");
    CompareRow r;
    r.step = a[i].step;
    r.t = a[i].t;
    r.error_a = a[i].error;
    r.error_b = b[i].error;
    r.error_ratio = a[i].error > 0.0 ? b[i].error / a[i].error : kNaN;
    r.ham_a = a[i].ham_error;
    r.ham_b = b[i].ham_error;
    r.two_n_a = a[i].two_n;
    r.two_n_b = b[i].two_n;
    r.m_a = a[i].m;
    r.m_b = b[i].m;
    if (!std::isnan(r.ham_b)) max_ham_b = std::max(max_ham_b, r.ham_b);
    rep.rows.push_back(r);
  }
  if (!rep.rows.empty()) {
    const auto& last = rep.rows.back();
    if (!std::isnan(last.error_a) && !std::isnan(last.error_b) &&
        last.error_b > tol.max_error_ratio * last.error_a) {
      rep.regression = true;
      rep.message += "final error ratio " + format_double(last.error_ratio) +
                     " exceeds " + format_double(tol.max_error_ratio) + "; ";
    }
  }
  if (max_ham_b > tol.max_ham_error) {
    rep.regression = true;
    rep.message += "Hamiltonian error " + format_double(max_ham_b) + " exceeds " +
                   format_double(tol.max_ham_error) + "; ";
  }
  return rep;
}

void write_compare(std::ostream& out, const CompareReport& report) {
  out << "step,t,error_a,error_b,error_ratio,ham_error_a,ham_error_b,two_n_a,two_n_b,m_a,m_b\n";
  for (const auto& r : report.rows)
    out << r.step << ',' << format_double(r.t) << ',' << format_double(r.error_a) << ','
        << format_double(r.error_b) << ',' << format_double(r.error_ratio) << ','
        << format_double(r.ham_a) << ',' << format_double(r.ham_b) << ',' << r.two_n_a
        << ',' << r.two_n_b << ',' << r.m_a << ',' << r.m_b << '\n';
}

}  // namespace spahr
