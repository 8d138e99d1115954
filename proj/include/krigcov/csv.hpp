#pragma once

#include <string>

#include "krigcov/grid.hpp"

namespace krigcov {

/// Write one grid of values in the block format: a `# t=<label>` line
/// followed by ny rows of nx comma-separated values (9 significant digits).
void write_grid_csv(const std::string& path, const MissionGrid& grid,
                    const std::vector<double>& values, double t_label);

/// Read a single-block grid file (any value range; shape must match).
GridScalarField read_grid_csv(const std::string& path, const MissionGrid& grid);

}  // namespace krigcov
