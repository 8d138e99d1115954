#include "krigcov/artifacts.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "krigcov/config.hpp"
#include "krigcov/csv.hpp"

namespace krigcov {
namespace {

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

const char* branch_name(uint8_t b) {
  switch (b) {
    case 0: return "primary";
    case 1: return "fallback";
    default: return "none";
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string summary_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "method,weather,n,seed,E\n";
  for (const ComparisonRow& r : rows)
    out << to_string(r.method) << ',' << r.weather << ',' << r.n << ',' << r.seed
        << ',' << g9(r.E) << '\n';
  return out.str();
}

std::string comparison_table(const std::vector<ComparisonRow>& rows) {
  // Median E per (weather, n, method) cell, methods as columns.
  std::vector<Method> methods;
  std::map<std::pair<std::string, int>, std::map<int, std::vector<double>>> cells;
  for (const ComparisonRow& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
    cells[{r.weather, r.n}][static_cast<int>(r.method)].push_back(r.E);
  }
  std::ostringstream out;
  out << "weather      n ";
  for (Method m : methods) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %12s", to_string(m).c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& [key, per_method] : cells) {
    char head[48];
    std::snprintf(head, sizeof(head), "%-12s %2d", key.first.c_str(), key.second);
    out << head;
    for (Method m : methods) {
      auto it = per_method.find(static_cast<int>(m));
      char buf[32];
      if (it == per_method.end())
        std::snprintf(buf, sizeof(buf), " %12s", "-");
      else
        std::snprintf(buf, sizeof(buf), " %12s", g9(median(it->second)).c_str());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

void write_run_artifacts(const std::string& dir, const ScenarioConfig& cfg,
                         const RunLog& log) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream out(dir + "/rmse.csv");
    out << "t,rmse,in_window\n";
    for (size_t r = 0; r < log.t.size(); ++r)
      out << log.t[r] << ',' << g9(log.rmse[r]) << ',' << int(log.in_window[r]) << '\n';
  }
  {
    std::ofstream out(dir + "/objective.csv");
    out << "t,H\n";
    for (size_t r = 0; r < log.t.size(); ++r)
      out << log.t[r] << ',' << g9(log.objective[r]) << '\n';
  }
  {
    std::ofstream out(dir + "/trajectories.csv");
    out << "t,agent,q1,q2,branch\n";
    for (size_t r = 0; r < log.t.size(); ++r)
      for (int a = 0; a < log.agents; ++a) {
        const size_t idx = r * static_cast<size_t>(log.agents) + static_cast<size_t>(a);
        out << (log.t[r] - 1) << ',' << a << ',' << g9(log.pos_q1[idx]) << ','
            << g9(log.pos_q2[idx]) << ',' << branch_name(log.branch[idx]) << '\n';
      }
  }
  {
    const ComparisonRow row{cfg.method,
                            cfg.field.kind == FieldSource::Kind::kCsv
                                ? "csv"
                                : to_string(cfg.field.weather),
                            cfg.n, cfg.seed, log.E};
    std::ofstream out(dir + "/summary.csv");
    out << summary_csv({row});
  }
  {
    std::ofstream out(dir + "/effective_config.ini");
    out << effective_config(cfg);
  }
  if (!log.snapshots.empty()) {
    fs::create_directories(dir + "/snapshots");
    for (const Snapshot& snap : log.snapshots) {
      const std::string tag = std::to_string(snap.t);
      write_grid_csv(dir + "/snapshots/dissim_t" + tag + ".csv", snap.dissimilarity.grid,
                     snap.dissimilarity.values, snap.dissimilarity.t_pred);
      write_grid_csv(dir + "/snapshots/info_t" + tag + ".csv", snap.information.grid,
                     snap.information.values, snap.t);
      write_grid_csv(dir + "/snapshots/pred_t" + tag + ".csv", snap.prediction.grid,
                     snap.prediction.values, snap.prediction.t);
    }
  }
}

}  // namespace krigcov
