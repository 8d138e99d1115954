#include "krigcov/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "krigcov/rng.hpp"

namespace krigcov {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& path, long line_no,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

FieldSeries load_long_format(std::ifstream& in, const std::string& path,
                             const MissionGrid& grid) {
  struct Row {
    int t, i, j;
    double cf;
  };
  std::vector<Row> rows;
  std::string line;
  long line_no = 1;  // header consumed already
  int max_t = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty()) continue;
    Row r;
    char extra;
    if (std::sscanf(s.c_str(), "%d ,%d ,%d ,%lf %c", &r.t, &r.i, &r.j, &r.cf,
                    &extra) != 4)
      parse_fail(path, line_no, "malformed row (expected t,i,j,cf)");
    if (r.t < 0) parse_fail(path, line_no, "negative step index");
    if (r.i < 0 || r.i >= grid.nx() || r.j < 0 || r.j >= grid.ny())
      parse_fail(path, line_no, "cell index outside the grid");
    if (!(r.cf >= 0.0 && r.cf <= 1.0))
      parse_fail(path, line_no, "cloud factor outside [0,1]");
    max_t = std::max(max_t, r.t);
    rows.push_back(r);
  }
  if (max_t < 0) throw std::runtime_error(path + ": no data rows");
  FieldSeries fs(grid, max_t + 1);
  std::vector<char> seen(fs.values.size(), 0);
  for (const Row& r : rows) {
    size_t idx = static_cast<size_t>(r.t) * grid.cells() + grid.linear_index(r.i, r.j);
    if (seen[idx])
      throw std::runtime_error(path + ": duplicate cell (t=" + std::to_string(r.t) +
                               ", i=" + std::to_string(r.i) + ", j=" + std::to_string(r.j) + ")");
    seen[idx] = 1;
    fs.values[idx] = r.cf;
  }
  for (int t = 0; t < fs.steps; ++t)
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) {
        size_t idx = static_cast<size_t>(t) * grid.cells() + grid.linear_index(i, j);
        if (!seen[idx])
          throw std::runtime_error(path + ": missing cell (t=" + std::to_string(t) +
                                   ", i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")");
      }
  return fs;
}

FieldSeries load_block_format(std::ifstream& in, const std::string& path,
                              const MissionGrid& grid, std::string first_line) {
  std::vector<double> values;
  std::string line = std::move(first_line);
  long line_no = 1;
  int block = 0;
  while (true) {
    int label = -1;
    if (std::sscanf(line.c_str(), "# t=%d", &label) != 1 || label != block)
      parse_fail(path, line_no, "expected '# t=" + std::to_string(block) + "' separator");
    for (int j = 0; j < grid.ny(); ++j) {
      if (!std::getline(in, line)) parse_fail(path, line_no, "truncated block");
      ++line_no;
      std::stringstream row(trim(line));
      std::string cell;
      for (int i = 0; i < grid.nx(); ++i) {
        if (!std::getline(row, cell, ','))
          parse_fail(path, line_no, "short row (expected " + std::to_string(grid.nx()) + " values)");
        double v;
        try {
          size_t pos = 0;
          v = std::stod(cell, &pos);
        } catch (const std::exception&) {
          parse_fail(path, line_no, "malformed value '" + trim(cell) + "'");
        }
        if (!(v >= 0.0 && v <= 1.0))
          parse_fail(path, line_no, "cloud factor outside [0,1]");
        values.push_back(v);
      }
      if (std::getline(row, cell, ','))
        parse_fail(path, line_no, "row longer than nx values");
    }
    ++block;
    // Skip blanks between blocks; stop at EOF.
    bool more = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) {
        more = true;
        break;
      }
    }
    if (!more) break;
  }
  FieldSeries fs(grid, block);
  fs.values = std::move(values);
  return fs;
}

struct Blob {
  Eigen::Vector2d c0;       // initial center
  Eigen::Vector2d v;        // drift velocity [m/step]
  double len1, len2;        // principal axis lengths
  double cos_a, sin_a;      // axis rotation
  double amp;               // base amplitude
  double mod_depth, period, phase;
  double pad;               // advection wrap margin
};

}  // namespace

CloudPreset CloudPreset::for_weather(Weather w) {
  CloudPreset p;
  switch (w) {
    case Weather::kStandard:
      break;  // defaults
    case Weather::kSunny:
      p = {3, 4, 0.15, 0.4, 0.2, 0.5, 0.02, 0.05, 0.3, 0.0};
      break;
    case Weather::kCloudy:
      p = {11, 14, 0.5, 0.9, 0.25, 0.65, 0.02, 0.07, 0.3, 0.0};
      break;
    case Weather::kVeryCloudy:
      p = {17, 22, 0.7, 1.0, 0.3, 0.7, 0.03, 0.08, 0.3, 0.1};
      break;
  }
  return p;
}

FieldSeries load_field_csv(const std::string& path, const MissionGrid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_field_csv: cannot open " + path);
  std::string first;
  if (!std::getline(in, first)) throw std::runtime_error(path + ": empty file");
  std::string header = trim(first);
  if (header.rfind("# t=", 0) == 0) return load_block_format(in, path, grid, header);
  std::string squashed;
  for (char ch : header)
    if (!std::isspace(static_cast<unsigned char>(ch))) squashed += ch;
  if (squashed == "t,i,j,cf") return load_long_format(in, path, grid);
  throw std::runtime_error(path + ": unrecognized header (expected 't,i,j,cf' or '# t=0')");
}

void write_field_csv(const std::string& path, const FieldSeries& fs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
  char buf[32];
  for (int t = 0; t < fs.steps; ++t) {
    out << "# t=" << t << "\n";
    for (int j = 0; j < fs.grid.ny(); ++j) {
      for (int i = 0; i < fs.grid.nx(); ++i) {
        if (i) out << ',';
        std::snprintf(buf, sizeof(buf), "%.9g", fs.at(t, i, j));
        out << buf;
      }
      out << '\n';
    }
  }
}

FieldSeries synth_cloud_field(const MissionGrid& grid, int steps, uint64_t seed,
                              Weather weather) {
  return synth_cloud_field(grid, steps, seed, CloudPreset::for_weather(weather));
}

FieldSeries synth_cloud_field(const MissionGrid& grid, int steps, uint64_t seed,
                              const CloudPreset& preset) {
  if (steps < 1) throw std::invalid_argument("synth_cloud_field: steps must be >= 1");
  if (preset.blobs_min < 0 || preset.blobs_max < preset.blobs_min)
    throw std::invalid_argument("synth_cloud_field: bad blob count range");

  std::mt19937_64 rng = make_rng(seed, 0x5f1e1d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const int n_blobs = preset.blobs_min +
      (preset.blobs_max > preset.blobs_min
           ? static_cast<int>(rng() % static_cast<uint64_t>(preset.blobs_max - preset.blobs_min + 1))
           : 0);
  std::vector<Blob> blobs;
  blobs.reserve(static_cast<size_t>(n_blobs));
  for (int b = 0; b < n_blobs; ++b) {
    Blob bl;
    bl.len1 = uniform(preset.len_min, preset.len_max);
    bl.len2 = uniform(preset.len_min, preset.len_max);
    bl.pad = 4.0 * std::max(bl.len1, bl.len2);
    // Start near the mission space; the advection wraps over the padded box.
    const double margin = std::max(bl.len1, bl.len2);
    bl.c0 = {uniform(grid.q1_min() - margin, grid.q1_max() + margin),
             uniform(grid.q2_min() - margin, grid.q2_max() + margin)};
    const double heading = uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = uniform(preset.speed_min, preset.speed_max);
    bl.v = {speed * std::cos(heading), speed * std::sin(heading)};
    const double rot = uniform(0.0, std::numbers::pi);
    bl.cos_a = std::cos(rot);
    bl.sin_a = std::sin(rot);
    bl.amp = uniform(preset.amp_min, preset.amp_max);
    bl.mod_depth = preset.mod_depth;
    bl.period = uniform(50.0, 120.0);
    bl.phase = uniform(0.0, 2.0 * std::numbers::pi);
    blobs.push_back(bl);
  }

  FieldSeries fs(grid, steps);
  auto wrap = [](double x, double lo, double hi) {
    const double w = hi - lo;
    double y = std::fmod(x - lo, w);
    if (y < 0) y += w;
    return lo + y;
  };
  for (int t = 0; t < steps; ++t) {
    std::vector<std::pair<Eigen::Vector2d, double>> state;  // center, amplitude
    state.reserve(blobs.size());
    for (const Blob& bl : blobs) {
      Eigen::Vector2d c = bl.c0 + t * bl.v;
      c.x() = wrap(c.x(), grid.q1_min() - bl.pad, grid.q1_max() + bl.pad);
      c.y() = wrap(c.y(), grid.q2_min() - bl.pad, grid.q2_max() + bl.pad);
      double amp = bl.amp * std::max(0.0, 1.0 + bl.mod_depth * std::sin(2.0 * std::numbers::pi * t / bl.period + bl.phase));
      state.emplace_back(c, amp);
    }
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) {
        const Eigen::Vector2d q = grid.cell_center(i, j);
        double v = preset.base;
        for (size_t b = 0; b < blobs.size(); ++b) {
          const Blob& bl = blobs[b];
          const Eigen::Vector2d d = q - state[b].first;
          const double e1 = (bl.cos_a * d.x() + bl.sin_a * d.y()) / bl.len1;
          const double e2 = (-bl.sin_a * d.x() + bl.cos_a * d.y()) / bl.len2;
          v += state[b].second * std::exp(-0.5 * (e1 * e1 + e2 * e2));
        }
        fs.at(t, grid.linear_index(i, j)) = std::clamp(v, 0.0, 1.0);
      }
  }
  return fs;
}

double sample_at(const FieldSeries& fs, const Eigen::Vector2d& q, int t) {
  if (t < 0 || t >= fs.steps)
    throw std::out_of_range("sample_at: step " + std::to_string(t) + " outside [0, " +
                            std::to_string(fs.steps) + ")");
  return fs.at(t, fs.grid.nearest_cell(q));
}

double rmse_at(const FieldSeries& truth, const PredictionGrid& pred, int t) {
  if (!truth.grid.same_shape(pred.grid))
    throw std::invalid_argument("rmse_at: grid shapes differ");
  if (t < 0 || t >= truth.steps)
    throw std::out_of_range("rmse_at: step outside the series");
  const int cells = truth.grid.cells();
  double acc = 0.0;
  for (int lin = 0; lin < cells; ++lin) {
    const double d = truth.at(t, lin) - pred[lin];
    acc += d * d;
  }
  return std::sqrt(acc / cells);
}

double time_avg_error(const std::vector<double>& rmse_series, int t0, int tT) {
  if (!(t0 < tT)) throw std::invalid_argument("time_avg_error: requires t0 < tT");
  if (t0 < 0 || tT >= static_cast<int>(rmse_series.size()))
    throw std::out_of_range("time_avg_error: series does not cover [t0, tT]");
  double acc = 0.0;
  for (int t = t0; t <= tT; ++t) acc += rmse_series[static_cast<size_t>(t)];
  return acc / (tT - t0 + 1);
}

}  // namespace krigcov
