#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "spahr/fom.hpp"
#include "spahr/io.hpp"

namespace spahr {

/// ‖R − W‖_F / ‖R‖_F.
double relative_error(const Mat<double>& reference, const Mat<double>& approx);

/// Average relative Hamiltonian drift with respect to fixed initial states;
/// columns with H(W_i(0)) = 0 are excluded.
class HamiltonianErrorTracker {
 public:
  HamiltonianErrorTracker(const HamiltonianModel& model, const Mat<double>& W0);
  double operator()(const Mat<double>& W) const;
  const IndexSet& excluded() const { return excluded_; }

 private:
  const HamiltonianModel& model_;
  Vec<double> h0_;
  IndexSet excluded_;
};

std::vector<double> hamiltonian_error(const HamiltonianModel& model,
                                      const Trajectory& traj,
                                      IndexSet* excluded = nullptr);

/// Number of singular values σ_i ≥ ε·σ_1 of M (0 for M = 0).
Index epsilon_rank(const Mat<double>& M, double eps);

struct EpsilonRankTable {
  std::vector<double> times;
  std::vector<double> eps;
  /// ranks[i][k] for snapshot i and tolerance eps[k].
  std::vector<std::vector<Index>> ranks;
};

EpsilonRankTable epsilon_rank(const Trajectory& traj, const std::vector<double>& eps);
void write_epsilon_rank(std::ostream& out, const EpsilonRankTable& table);

struct CompareTolerances {
  /// Regression when final error(b) > ratio·final error(a).
  double max_error_ratio = std::numeric_limits<double>::infinity();
  /// Regression when max ham_error(b) exceeds this.
  double max_ham_error = std::numeric_limits<double>::infinity();
};

CompareTolerances load_tolerances(const std::string& path);

struct CompareRow {
  Index step = 0;
  double t = 0.0;
  double error_a = kNaN, error_b = kNaN, error_ratio = kNaN;
  double ham_a = kNaN, ham_b = kNaN;
  Index two_n_a = 0, two_n_b = 0;
  Index m_a = 0, m_b = 0;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  bool regression = false;
  std::string message;
};

/// Aligns two metric series step by step; throws ConfigError when the step
/// or time grids differ.
CompareReport compare_metrics(const std::vector<MetricsRow>& a,
                              const std::vector<MetricsRow>& b,
                              const CompareTolerances& tol = {});
void write_compare(std::ostream& out, const CompareReport& report);

}  // namespace spahr
