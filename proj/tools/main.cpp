#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "krigcov/artifacts.hpp"
#include "krigcov/config.hpp"
#include "krigcov/csv.hpp"
#include "krigcov/tune.hpp"

namespace {

using namespace krigcov;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  int64_t seed = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Config file (INI sections: field, kernel, coverage, agents, sim, tune)");
  cmd->add_option("--set", args.sets, "Override a config value, SECTION.KEY=VALUE (repeatable)");
  cmd->add_option("--out", args.out_dir, "Output directory (default: runs/<timestamp>-<command>)");
  cmd->add_option("--seed", args.seed, "Master seed (overrides sim.seed)");
  cmd->add_flag("--quiet", args.quiet, "Suppress progress output");
}

ConfigDoc load_doc(const CommonArgs& args) {
  ConfigDoc doc;
  if (!args.config_path.empty()) doc = parse_config_file(args.config_path);
  apply_overrides(doc, args.sets);
  if (args.seed >= 0) doc.set("sim.seed", std::to_string(args.seed));
  return doc;
}

std::string default_out_dir(const std::string& command) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::localtime(&tt));
  return "runs/" + std::string(stamp) + "-" + command;
}

std::string resolve_out(const CommonArgs& args, const std::string& command) {
  const std::string dir = args.out_dir.empty() ? default_out_dir(command) : args.out_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int cmd_run(const CommonArgs& args) {
  const ScenarioConfig cfg = scenario_from_config(load_doc(args));
  const std::string dir = resolve_out(args, "run");
  const auto start = std::chrono::steady_clock::now();
  const RunLog log = run_scenario(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_artifacts(dir, cfg, log);
  if (!args.quiet) {
    std::cout << "method=" << to_string(cfg.method) << " n=" << cfg.n
              << " seed=" << cfg.seed << " E=" << g9(log.E) << " (" << g9(secs) << " s)\n";
    std::cout << "diagnostics: max|dphi/dt|=" << g9(log.max_dphi_dt)
              << " max|d2phi/dt2|=" << g9(log.max_d2phi_dt2)
              << " over " << log.diagnostic_steps << " steps\n";
    std::cout << "artifacts: " << dir << "\n";
  }
  return 0;
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& methods,
                const std::vector<std::string>& weathers,
                const std::vector<int>& agent_counts,
                const std::vector<uint64_t>& seeds) {
  if (methods.empty() || weathers.empty() || agent_counts.empty() || seeds.empty())
    throw ConfigError("compare: empty sweep (methods, weathers, agents and seeds must be non-empty)");
  const ConfigDoc base = load_doc(args);
  std::vector<ScenarioConfig> cfgs;
  for (const std::string& weather : weathers)
    for (int n : agent_counts)
      for (uint64_t seed : seeds)
        for (const std::string& method : methods) {
          ConfigDoc doc = base;
          doc.set("sim.method", method);
          doc.set("field.weather", weather);
          doc.set("agents.n", std::to_string(n));
          doc.set("sim.seed", std::to_string(seed));
          cfgs.push_back(scenario_from_config(doc));
        }
  const std::string dir = resolve_out(args, "compare");
  const auto rows = compare_methods(cfgs);
  {
    std::ofstream out(dir + "/summary.csv");
    out << summary_csv(rows);
  }
  const std::string table = comparison_table(rows);
  {
    std::ofstream out(dir + "/comparison.txt");
    out << table;
  }
  if (!args.quiet) {
    std::cout << table;
    std::cout << "artifacts: " << dir << "\n";
  }
  return 0;
}

int cmd_tune(const CommonArgs& args, int restarts) {
  ConfigDoc doc = load_doc(args);
  if (restarts >= 0) doc.set("tune.restarts", std::to_string(restarts));
  TuneSpec spec = tunespec_from_config(doc);
  const std::string dir = resolve_out(args, "tune");
  const TuneResult result = tune(spec);
  {
    std::ofstream out(dir + "/tune_trace.csv");
    out << "eval";
    for (const std::string& p : spec.params) out << ',' << p;
    out << ",E\n";
    for (const EvalRecord& rec : result.trace) {
      out << rec.eval;
      for (int i = 0; i < rec.x.size(); ++i) out << ',' << g9(rec.x(i));
      out << ',' << g9(rec.f) << '\n';
    }
  }
  {
    std::ofstream out(dir + "/best_params.ini");
    out << params_fragment(result.best);
  }
  if (!args.quiet) {
    std::cout << "best E=" << g9(result.best_E);
    for (const auto& [name, value] : result.best) std::cout << ' ' << name << '=' << g9(value);
    std::cout << "\nartifacts: " << dir << "\n";
  }
  return 0;
}

int cmd_lloyd(const CommonArgs& args, int n_override) {
  const ScenarioConfig cfg = scenario_from_config(load_doc(args));
  const int n = n_override > 0 ? n_override : cfg.n;
  const auto sites = lloyd_placement(cfg.grid, n, cfg.init.seed);
  std::cout << "sensor,q1,q2\n";
  for (size_t i = 0; i < sites.size(); ++i)
    std::cout << i + 1 << ',' << g9(sites[i].x()) << ',' << g9(sites[i].y()) << '\n';
  return 0;
}

int cmd_map(const CommonArgs& args, const std::string& samples_path, double t_pred_arg) {
  if (samples_path.empty()) throw ConfigError("map: --samples FILE is required");
  const ScenarioConfig cfg = scenario_from_config(load_doc(args));

  struct Row {
    double q1, q2, t, cf;
  };
  std::vector<Row> rows;
  {
    std::ifstream in(samples_path);
    if (!in) throw ConfigError("map: cannot open " + samples_path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("map: empty samples file");
    long line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      Row r;
      char extra;
      if (std::sscanf(line.c_str(), "%lf ,%lf ,%lf ,%lf %c", &r.q1, &r.q2, &r.t, &r.cf, &extra) != 4)
        throw ConfigError("map: " + samples_path + ":" + std::to_string(line_no) +
                          ": expected q1,q2,t,cf");
      rows.push_back(r);
    }
  }
  if (rows.empty()) throw ConfigError("map: no samples");
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  int max_per_step = 1, current = 0;
  double current_t = rows.front().t - 1.0;
  int steps = 0;
  for (const Row& r : rows) {
    if (r.t != current_t) {
      current_t = r.t;
      current = 0;
      ++steps;
    }
    max_per_step = std::max(max_per_step, ++current);
  }
  SampleBuffer buffer(steps, max_per_step);
  for (const Row& r : rows) buffer.push({r.q1, r.q2, r.t}, r.cf);

  const double t_pred = t_pred_arg > -1e300 ? t_pred_arg : buffer.newest_time() + 1.0;
  const std::string dir = resolve_out(args, "map");
  const DissimilarityMap map = dissimilarity_map(cfg.grid, t_pred, buffer, cfg.kernel);
  write_grid_csv(dir + "/dissim.csv", map.grid, map.values, map.t_pred);
  if (!args.quiet) {
    double lo = map.values.front(), hi = lo;
    for (double v : map.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::cout << "dissimilarity map for t=" << g9(t_pred) << " from " << buffer.size()
              << " samples: min=" << g9(lo) << " max=" << g9(hi) << "\n";
    std::cout << "artifacts: " << dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kriging-based cloud-factor forecasting with dissimilarity-driven persistent coverage"};
  app.require_subcommand(1);

  CommonArgs run_args, compare_args, tune_args, lloyd_args, map_args;

  CLI::App* run = app.add_subcommand("run", "Run one scenario and write its artifacts");
  add_common(run, run_args);

  CLI::App* compare = app.add_subcommand("compare", "Sweep methods/weathers/agents/seeds and compare E");
  add_common(compare, compare_args);
  std::vector<std::string> methods{"fixed", "baseline", "proposed"};
  std::vector<std::string> weathers{"cloudy"};
  std::vector<int> agent_counts{4};
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  compare->add_option("--methods", methods, "Methods to sweep")->delimiter(',');
  compare->add_option("--weathers", weathers, "Weather presets to sweep")->delimiter(',');
  compare->add_option("--agents", agent_counts, "Agent counts to sweep")->delimiter(',');
  compare->add_option("--seeds", seeds, "Seeds to sweep")->delimiter(',');

  CLI::App* tune_cmd = app.add_subcommand("tune", "Tune free parameters on the training window");
  add_common(tune_cmd, tune_args);
  int restarts = -1;
  tune_cmd->add_option("--restarts", restarts, "Extra seeded restarts (overrides tune.restarts)");

  CLI::App* lloyd = app.add_subcommand("lloyd", "Print centroidal Voronoi sensor positions");
  add_common(lloyd, lloyd_args);
  int lloyd_n = 0;
  lloyd->add_option("--n", lloyd_n, "Number of sensors (default: agents.n)");

  CLI::App* map_cmd = app.add_subcommand("map", "Dissimilarity-map snapshot for a sample set");
  add_common(map_cmd, map_args);
  std::string samples_path;
  double t_pred = -1e301;
  map_cmd->add_option("--samples", samples_path, "CSV of observations with header q1,q2,t,cf");
  map_cmd->add_option("--t-pred", t_pred, "Prediction step (default: newest sample + 1)");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_args);
    if (compare->parsed())
      return cmd_compare(compare_args, methods, weathers, agent_counts, seeds);
    if (tune_cmd->parsed()) return cmd_tune(tune_args, restarts);
    if (lloyd->parsed()) return cmd_lloyd(lloyd_args, lloyd_n);
    if (map_cmd->parsed()) return cmd_map(map_args, samples_path, t_pred);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
