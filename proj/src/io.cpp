#include "spahr/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace spahr {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  auto h = seed;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------

namespace {

void write_header(std::ofstream& out, Index rows, Index cols, const std::string& hash) {
  out << "spahr-trajectory 1\n"
      << "rows " << rows << "\n"
      << "cols " << cols << "\n"
      << "dtype float64\n"
      << "grid_hash " << hash << "\n"
      << "end\n";
}

TrajectoryHeader read_header(std::ifstream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line != "spahr-trajectory 1")
    throw IoError("not a trajectory file: " + path);
  TrajectoryHeader h;
  std::string dtype;
  while (std::getline(in, line) && line != "end") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "rows") ls >> h.rows;
    else if (key == "cols") ls >> h.cols;
    else if (key == "dtype") ls >> dtype;
    else if (key == "grid_hash") ls >> h.grid_hash;
  }
  if (line != "end" || dtype != "float64" || h.rows <= 0 || h.cols <= 0)
    throw IoError("malformed trajectory header: " + path);
  return h;
}

}  // namespace

TrajectoryWriter::TrajectoryWriter(const std::string& path, Index rows, Index cols,
                                   const std::string& grid_hash)
    : out_(path, std::ios::binary), rows_(rows), cols_(cols) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  write_header(out_, rows, cols, grid_hash);
  out_.flush();
}

void TrajectoryWriter::write(Index step, double t, const Mat<double>& state) {
  if (state.rows() != rows_ || state.cols() != cols_)
    throw DimensionError("trajectory snapshot has the wrong shape");
  const std::int64_t s = step;
  out_.write(reinterpret_cast<const char*>(&s), sizeof s);
  out_.write(reinterpret_cast<const char*>(&t), sizeof t);
  out_.write(reinterpret_cast<const char*>(state.data()),
             static_cast<std::streamsize>(sizeof(double) * state.size()));
  out_.flush();
  if (!out_) throw IoError("trajectory write failed");
}

Trajectory read_trajectory(const std::string& path, TrajectoryHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const TrajectoryHeader h = read_header(in, path);
  if (header) *header = h;
  Trajectory traj;
  for (;;) {
    std::int64_t step;
    double t;
    if (!in.read(reinterpret_cast<char*>(&step), sizeof step)) break;
    Mat<double> M(h.rows, h.cols);
    if (!in.read(reinterpret_cast<char*>(&t), sizeof t) ||
        !in.read(reinterpret_cast<char*>(M.data()),
                 static_cast<std::streamsize>(sizeof(double) * M.size())))
      break;  // truncated trailing record from an interrupted run
    traj.steps.push_back(step);
    traj.times.push_back(t);
    traj.states.push_back(std::move(M));
  }
  return traj;
}

void write_matrix(const std::string& path, const Mat<double>& M,
                  const std::string& grid_hash) {
  TrajectoryWriter w(path, M.rows(), M.cols(), grid_hash);
  w.write(0, 0.0, M);
}

Mat<double> read_matrix(const std::string& path) {
  auto traj = read_trajectory(path);
  if (traj.states.empty()) throw IoError("no matrix stored in " + path);
  return traj.states.front();
}

// ---------------------------------------------------------------------------

MetricsWriter::MetricsWriter(const std::string& path) : out_(path) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  out_ << kMetricsSchema << "\n"
       << "step,t,error,ham_error,two_n,m,m_s,p_a_star,p_u_star,delta,indicator,"
          "rank_update,delta_flag\n";
  out_.flush();
}

void MetricsWriter::write(const MetricsRow& r) {
  out_ << r.step << ',' << format_double(r.t) << ',' << format_double(r.error) << ','
       << format_double(r.ham_error) << ',' << r.two_n << ',' << r.m << ',' << r.m_s
       << ',' << r.p_a_star << ',' << r.p_u_star << ',' << format_double(r.delta) << ','
       << format_double(r.indicator) << ',' << r.rank_update << ',' << r.delta_flag
       << '\n';
  out_.flush();
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw IoError("bad number in metrics file: '" + s + "'");
  return v;
}

}  // namespace

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsSchema)
    throw IoError("unsupported metrics schema in " + path);
  std::getline(in, line);  // column names
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 13) break;  // partial trailing line
    MetricsRow r;
    r.step = std::stoll(f[0]);
    r.t = parse_double(f[1]);
    r.error = parse_double(f[2]);
    r.ham_error = parse_double(f[3]);
    r.two_n = std::stoll(f[4]);
    r.m = std::stoll(f[5]);
    r.m_s = std::stoll(f[6]);
    r.p_a_star = std::stoll(f[7]);
    r.p_u_star = std::stoll(f[8]);
    r.delta = parse_double(f[9]);
    r.indicator = parse_double(f[10]);
    r.rank_update = std::stoi(f[11]);
    r.delta_flag = std::stoi(f[12]);
    rows.push_back(r);
  }
  return rows;
}

TimingWriter::TimingWriter(const std::string& path) : out_(path) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  out_ << "# spahr-timing v1\nstep,t,basis,newton,eim,indicator,rank_update,total\n";
  out_.flush();
}

void TimingWriter::write(const TimingRow& r) {
  out_ << r.step << ',' << format_double(r.t) << ',' << format_double(r.basis) << ','
       << format_double(r.newton) << ',' << format_double(r.eim) << ','
       << format_double(r.indicator) << ',' << format_double(r.rank_update) << ','
       << format_double(r.total) << '\n';
  out_.flush();
}

}  // namespace spahr
