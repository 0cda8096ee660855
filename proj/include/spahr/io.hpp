#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "spahr/fom.hpp"

namespace spahr {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const void* data, std::size_t bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Snapshot file: a text header ("spahr-trajectory 1", rows, cols, dtype,
/// grid_hash, "end") followed by records of int64 step, float64 time and
/// rows*cols float64 values in column-major order.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& path, Index rows, Index cols,
                   const std::string& grid_hash);
  void write(Index step, double t, const Mat<double>& state);

 private:
  std::ofstream out_;
  Index rows_, cols_;
};

struct TrajectoryHeader {
  Index rows = 0;
  Index cols = 0;
  std::string grid_hash;
};

Trajectory read_trajectory(const std::string& path, TrajectoryHeader* header = nullptr);

/// Single-matrix file in the trajectory format.
void write_matrix(const std::string& path, const Mat<double>& M,
                  const std::string& grid_hash = "none");
Mat<double> read_matrix(const std::string& path);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MetricsRow {
  Index step = 0;
  double t = 0.0;
  double error = kNaN;
  double ham_error = kNaN;
  Index two_n = 0;
  Index m = 0;
  Index m_s = 0;
  Index p_a_star = 0;
  Index p_u_star = 0;
  double delta = kNaN;
  double indicator = kNaN;
  int rank_update = 0;
  int delta_flag = 0;
};

inline constexpr const char* kMetricsSchema = "# spahr-metrics v1";

/// Append-only CSV writer; every row is flushed so a crash leaves a valid
/// prefix.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
};

std::vector<MetricsRow> read_metrics(const std::string& path);

struct TimingRow {
  Index step = 0;
  double t = 0.0;
  double basis = 0.0;
  double newton = 0.0;
  double eim = 0.0;
  double indicator = 0.0;
  double rank_update = 0.0;
  double total = 0.0;
};

class TimingWriter {
 public:
  explicit TimingWriter(const std::string& path);
  void write(const TimingRow& row);

 private:
  std::ofstream out_;
};

/// Shortest round-trip decimal form ("nan" for NaN).
std::string format_double(double v);

}  // namespace spahr
