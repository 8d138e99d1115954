#pragma once

#include <string>
#include <vector>

#include "krigcov/sim.hpp"

namespace krigcov {

/// summary.csv content (method,weather,n,seed,E), one row per run.
std::string summary_csv(const std::vector<ComparisonRow>& rows);

/// Aligned text table of median E per (weather, n, method) cell.
std::string comparison_table(const std::vector<ComparisonRow>& rows);

/// Write rmse.csv, objective.csv, trajectories.csv, summary.csv and the map
/// snapshots for one run into dir (created if missing).
void write_run_artifacts(const std::string& dir, const ScenarioConfig& cfg,
                         const RunLog& log);

}  // namespace krigcov
