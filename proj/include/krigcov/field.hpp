#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "krigcov/grid.hpp"

namespace krigcov {

/// Time series of cloud-factor fields on a fixed grid. Every stored value is
/// in [0, 1]; values are laid out step-major: value(t, lin) = values[t*cells + lin].
struct FieldSeries {
  MissionGrid grid;
  int steps;
  std::vector<double> values;

  FieldSeries(const MissionGrid& g, int t_steps)
      : grid(g), steps(t_steps),
        values(static_cast<size_t>(t_steps) * static_cast<size_t>(g.cells()), 0.0) {
    if (t_steps < 1) throw std::invalid_argument("FieldSeries: steps must be >= 1");
  }

  double at(int t, int lin) const {
    return values[static_cast<size_t>(t) * grid.cells() + lin];
  }
  double& at(int t, int lin) {
    return values[static_cast<size_t>(t) * grid.cells() + lin];
  }
  double at(int t, int i, int j) const { return at(t, grid.linear_index(i, j)); }
};

/// One-step field prediction over the whole grid; values may fall outside
/// [0, 1] (clamping is an evaluation-layer choice).
struct PredictionGrid {
  MissionGrid grid;
  int t;
  std::vector<double> values;

  PredictionGrid(const MissionGrid& g, int t_step)
      : grid(g), t(t_step), values(static_cast<size_t>(g.cells()), 0.0) {}

  double operator[](int lin) const { return values[static_cast<size_t>(lin)]; }
  double& operator[](int lin) { return values[static_cast<size_t>(lin)]; }
};

enum class Weather { kStandard, kSunny, kCloudy, kVeryCloudy };

/// Parameters of the synthetic cloud-field generator: a sum of advecting
/// anisotropic Gaussian blobs with slow amplitude modulation, clamped to [0,1].
struct CloudPreset {
  int blobs_min = 7;
  int blobs_max = 9;
  double amp_min = 0.35;
  double amp_max = 0.7;
  double len_min = 0.25;   // blob principal axis lengths [m]
  double len_max = 0.6;
  double speed_min = 0.02;  // drift speed [m/step]
  double speed_max = 0.06;
  double mod_depth = 0.3;   // relative amplitude modulation
  double base = 0.0;        // constant background level

  static CloudPreset for_weather(Weather w);
};

/// Load a cloud-factor series from CSV. Two layouts are auto-detected from
/// the first line: a long format with header `t,i,j,cf`, or a block format
/// with `# t=<k>` separators followed by ny rows of nx comma-separated
/// values. Every cell of every step must be present and inside [0, 1].
FieldSeries load_field_csv(const std::string& path, const MissionGrid& grid);

/// Write a field series in the block format (the writer's canonical layout).
void write_field_csv(const std::string& path, const FieldSeries& fs);

FieldSeries synth_cloud_field(const MissionGrid& grid, int steps, uint64_t seed,
                              Weather weather);
FieldSeries synth_cloud_field(const MissionGrid& grid, int steps, uint64_t seed,
                              const CloudPreset& preset);

/// Point measurement: value of the grid cell whose center is nearest to q
/// (positions outside Q are clamped to the boundary first).
double sample_at(const FieldSeries& fs, const Eigen::Vector2d& q, int t);

/// Field RMSE at step t: sqrt of the cell-mean squared error. Uniform cells
/// make the area-weighted integral a plain mean.
double rmse_at(const FieldSeries& truth, const PredictionGrid& pred, int t);

/// Time-averaged error over steps t0..tT inclusive (plain mean; the series is
/// indexed by absolute step).
double time_avg_error(const std::vector<double>& rmse_series, int t0, int tT);

}  // namespace krigcov
