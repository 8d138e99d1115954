#include "krigcov/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace krigcov {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Typed view over one section that tracks which keys were consumed, so
/// unknown keys can be reported by name afterwards.
class SectionReader {
 public:
  SectionReader(const ConfigDoc& doc, std::string section)
      : doc_(doc), section_(std::move(section)) {
    auto it = doc.sections.find(section_);
    if (it != doc.sections.end()) raw_ = &it->second;
  }

  bool has(const std::string& key) {
    consumed_.insert(key);
    return raw_ && raw_->count(key) > 0;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    if (!raw_) return fallback;
    auto it = raw_->find(key);
    return it == raw_->end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) {
    const std::string v = get_string(key, "");
    if (v.empty() && !(raw_ && raw_->count(key))) return fallback;
    try {
      size_t pos = 0;
      const double parsed = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return parsed;
    } catch (const std::exception&) {
      throw ConfigError("config: " + section_ + "." + key + ": not a number: '" + v + "'");
    }
  }

  int get_int(const std::string& key, int fallback) {
    const std::string v = get_string(key, "");
    if (v.empty() && !(raw_ && raw_->count(key))) return fallback;
    try {
      size_t pos = 0;
      const long parsed = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return static_cast<int>(parsed);
    } catch (const std::exception&) {
      throw ConfigError("config: " + section_ + "." + key + ": not an integer: '" + v + "'");
    }
  }

  uint64_t get_seed(const std::string& key, uint64_t fallback) {
    const std::string v = get_string(key, "");
    if (v.empty() && !(raw_ && raw_->count(key))) return fallback;
    try {
      size_t pos = 0;
      const unsigned long long parsed = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return parsed;
    } catch (const std::exception&) {
      throw ConfigError("config: " + section_ + "." + key + ": not a seed: '" + v + "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) {
    std::string v = get_string(key, "");
    if (v.empty() && !(raw_ && raw_->count(key))) return fallback;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError("config: " + section_ + "." + key + ": not a boolean: '" + v + "'");
  }

  void reject_unknown() const {
    if (!raw_) return;
    for (const auto& [key, value] : *raw_)
      if (!consumed_.count(key))
        throw ConfigError("config: unknown key '" + section_ + "." + key + "'");
  }

 private:
  const ConfigDoc& doc_;
  std::string section_;
  const std::map<std::string, std::string>* raw_ = nullptr;
  std::set<std::string> consumed_;
};

Weather parse_weather(const std::string& v, const std::string& where) {
  if (v == "standard") return Weather::kStandard;
  if (v == "sunny") return Weather::kSunny;
  if (v == "cloudy") return Weather::kCloudy;
  if (v == "very_cloudy") return Weather::kVeryCloudy;
  throw ConfigError("config: " + where + ": unknown weather '" + v +
                    "' (standard|sunny|cloudy|very_cloudy)");
}

std::vector<Eigen::Vector2d> parse_positions(const std::string& text) {
  std::vector<Eigen::Vector2d> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ';')) {
    const std::string entry = trim(item);
    if (entry.empty()) continue;
    double x, y;
    char extra;
    if (std::sscanf(entry.c_str(), "%lf ,%lf %c", &x, &y, &extra) != 2)
      throw ConfigError("config: agents.positions: malformed entry '" + entry + "'");
    out.push_back({x, y});
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    const std::string entry = trim(item);
    if (!entry.empty()) out.push_back(entry);
  }
  return out;
}

}  // namespace

void ConfigDoc::set(const std::string& dotted_key, const std::string& value) {
  const size_t dot = dotted_key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size())
    throw ConfigError("config: --set expects SECTION.KEY=VALUE, got '" + dotted_key + "'");
  sections[dotted_key.substr(0, dot)][dotted_key.substr(dot + 1)] = value;
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

ConfigDoc parse_config_text(const std::string& text) {
  ConfigDoc doc;
  std::stringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      doc.sections[section];
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": key outside any [section]");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    doc.sections[section][key] = trim(s.substr(eq + 1));
  }
  return doc;
}

ConfigDoc parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_overrides(ConfigDoc& doc, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: --set expects SECTION.KEY=VALUE, got '" + s + "'");
    doc.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
}

ScenarioConfig scenario_from_config(const ConfigDoc& doc) {
  static const std::set<std::string> known_sections = {"field", "kernel", "coverage",
                                                       "agents", "sim", "tune"};
  for (const auto& [name, keys] : doc.sections)
    if (!known_sections.count(name))
      throw ConfigError("config: unknown section '" + name + "'");

  ScenarioConfig cfg;
  try {
    SectionReader sim(doc, "sim");
    const std::string method = sim.get_string("method", "proposed");
    if (method == "fixed") cfg.method = Method::kFixed;
    else if (method == "baseline") cfg.method = Method::kBaseline;
    else if (method == "proposed") cfg.method = Method::kProposed;
    else throw ConfigError("config: sim.method: unknown method '" + method +
                           "' (fixed|baseline|proposed)");
    cfg.window_L = sim.get_int("L", cfg.window_L);
    cfg.t0 = sim.get_int("t0", cfg.t0);
    cfg.tT = sim.get_int("tT", cfg.tT);
    const std::string dyn = sim.get_string("dynamics", "integrator");
    if (dyn == "integrator") cfg.dynamics = Dynamics::kIntegrator;
    else if (dyn == "unicycle") cfg.dynamics = Dynamics::kUnicycle;
    else throw ConfigError("config: sim.dynamics: unknown dynamics '" + dyn +
                           "' (integrator|unicycle)");
    cfg.v_max = sim.get_double("v_max", cfg.v_max);
    cfg.a_max = sim.get_double("a_max", cfg.a_max);
    cfg.clamp_predictions = sim.get_bool("clamp_predictions", cfg.clamp_predictions);
    cfg.repulsion.enabled = sim.get_bool("repulsion", cfg.repulsion.enabled);
    cfg.repulsion.safety_radius = sim.get_double("safety_radius", cfg.repulsion.safety_radius);
    cfg.repulsion.gain = sim.get_double("repulsion_gain", cfg.repulsion.gain);
    cfg.snapshot_every = sim.get_int("snapshot_every", cfg.snapshot_every);
    cfg.seed = sim.get_seed("seed", cfg.seed);
    cfg.unicycle.kp = sim.get_double("unicycle_kp", cfg.unicycle.kp);
    cfg.unicycle.k_omega = sim.get_double("unicycle_k_omega", cfg.unicycle.k_omega);
    cfg.unicycle.dt_inner = sim.get_double("unicycle_dt_inner", cfg.unicycle.dt_inner);
    cfg.unicycle.n_inner = sim.get_int("unicycle_n_inner", cfg.unicycle.n_inner);
    sim.reject_unknown();

    SectionReader field(doc, "field");
    const std::string source = field.get_string("source", "synth");
    if (source == "synth") cfg.field.kind = FieldSource::Kind::kSynth;
    else if (source == "csv") cfg.field.kind = FieldSource::Kind::kCsv;
    else throw ConfigError("config: field.source: unknown source '" + source + "' (synth|csv)");
    cfg.field.csv_path = field.get_string("csv", "");
    if (cfg.field.kind == FieldSource::Kind::kCsv && cfg.field.csv_path.empty())
      throw ConfigError("config: field.csv is required when field.source = csv");
    cfg.field.weather = parse_weather(field.get_string("weather", "cloudy"), "field.weather");
    cfg.field.seed = field.get_seed("seed", cfg.seed);
    cfg.field.steps = field.get_int("steps", cfg.field.steps);
    const double q1_min = field.get_double("q1_min", cfg.grid.q1_min());
    const double q1_max = field.get_double("q1_max", cfg.grid.q1_max());
    const double q2_min = field.get_double("q2_min", cfg.grid.q2_min());
    const double q2_max = field.get_double("q2_max", cfg.grid.q2_max());
    const int nx = field.get_int("nx", cfg.grid.nx());
    const int ny = field.get_int("ny", cfg.grid.ny());
    try {
      cfg.grid = MissionGrid(q1_min, q1_max, q2_min, q2_max, nx, ny);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: field: ") + e.what());
    }
    field.reject_unknown();

    SectionReader kernel(doc, "kernel");
    const double sigma = kernel.get_double("sigma", cfg.kernel.sigma);
    const double tau = kernel.get_double("tau", cfg.kernel.tau);
    const double beta = kernel.get_double("beta", cfg.kernel.beta);
    kernel.reject_unknown();

    SectionReader coverage(doc, "coverage");
    const double c = coverage.get_double("c", cfg.coverage.peak);
    const double r = coverage.get_double("r", cfg.coverage.radius);
    const double delta = coverage.get_double("delta", cfg.coverage.decay);
    const double k = coverage.get_double("k", cfg.coverage.gain);
    const double k_hat = coverage.get_double("k_hat", cfg.coverage.gain_fallback);
    const double i_ref = coverage.get_double("i_ref", cfg.coverage.i_ref_level);
    const std::string i_ref_csv = coverage.get_string("i_ref_csv", "");
    if (!i_ref_csv.empty()) cfg.i_ref_csv = i_ref_csv;
    const std::string fallback = coverage.get_string("fallback", "argmax");
    if (fallback == "argmax") cfg.fallback = FallbackTarget::kArgmax;
    else if (fallback == "random") cfg.fallback = FallbackTarget::kRandom;
    else if (fallback == "fixed-center") cfg.fallback = FallbackTarget::kFixedCenter;
    else throw ConfigError("config: coverage.fallback: unknown mode '" + fallback +
                           "' (argmax|random|fixed-center)");
    coverage.reject_unknown();

    SectionReader agents(doc, "agents");
    cfg.n = agents.get_int("n", cfg.n);
    const std::string init = agents.get_string("init", "random");
    if (init == "explicit") cfg.init.mode = InitPositions::Mode::kExplicit;
    else if (init == "lloyd") cfg.init.mode = InitPositions::Mode::kLloyd;
    else if (init == "random") cfg.init.mode = InitPositions::Mode::kRandomBox;
    else throw ConfigError("config: agents.init: unknown mode '" + init +
                           "' (explicit|lloyd|random)");
    cfg.init.explicit_positions = parse_positions(agents.get_string("positions", ""));
    if (cfg.init.mode == InitPositions::Mode::kExplicit && cfg.init.explicit_positions.empty())
      throw ConfigError("config: agents.positions is required when agents.init = explicit");
    const std::string box = agents.get_string("box", "");
    if (!box.empty()) {
      char extra;
      if (std::sscanf(box.c_str(), "%lf ,%lf ,%lf ,%lf %c", &cfg.init.box_q1_min,
                      &cfg.init.box_q1_max, &cfg.init.box_q2_min,
                      &cfg.init.box_q2_max, &extra) != 4)
        throw ConfigError("config: agents.box expects 'q1_min,q1_max,q2_min,q2_max'");
    }
    cfg.init.seed = agents.get_seed("seed", cfg.seed);
    agents.reject_unknown();

    try {
      cfg.kernel = KernelParams(sigma, tau, beta);
      cfg.coverage = CoverageParams(c, r, delta, k, k_hat, i_ref);
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

TuneSpec tunespec_from_config(const ConfigDoc& doc) {
  TuneSpec spec;
  spec.base = scenario_from_config(doc);
  SectionReader tune(doc, "tune");
  spec.params = split_list(tune.get_string("params", "beta,sigma,tau"));
  spec.budget = tune.get_int("budget", spec.budget);
  spec.seed = tune.get_seed("seed", spec.base.seed);
  spec.train_t0 = tune.get_int("train_t0", spec.base.t0);
  spec.train_tT = tune.get_int("train_tT", spec.base.tT);
  spec.restarts = tune.get_int("restarts", 0);
  for (const char* const raw : {"beta", "sigma", "tau", "k", "k_hat", "delta"}) {
    const std::string name = raw;
    const auto def = TuneSpec::default_bounds(name);
    const double lo = tune.get_double(name + "_min", def.first);
    const double hi = tune.get_double(name + "_max", def.second);
    spec.bounds[name] = {lo, hi};
  }
  tune.reject_unknown();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return spec;
}

std::string effective_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "[field]\n";
  out << "source = " << (cfg.field.kind == FieldSource::Kind::kCsv ? "csv" : "synth") << "\n";
  if (!cfg.field.csv_path.empty()) out << "csv = " << cfg.field.csv_path << "\n";
  out << "weather = " << to_string(cfg.field.weather) << "\n";
  out << "seed = " << cfg.field.seed << "\n";
  out << "steps = " << cfg.field.steps << "\n";
  out << "q1_min = " << format_full(cfg.grid.q1_min()) << "\n";
  out << "q1_max = " << format_full(cfg.grid.q1_max()) << "\n";
  out << "q2_min = " << format_full(cfg.grid.q2_min()) << "\n";
  out << "q2_max = " << format_full(cfg.grid.q2_max()) << "\n";
  out << "nx = " << cfg.grid.nx() << "\n";
  out << "ny = " << cfg.grid.ny() << "\n";
  out << "\n[kernel]\n";
  out << "sigma = " << format_full(cfg.kernel.sigma) << "\n";
  out << "tau = " << format_full(cfg.kernel.tau) << "\n";
  out << "beta = " << format_full(cfg.kernel.beta) << "\n";
  out << "\n[coverage]\n";
  out << "c = " << format_full(cfg.coverage.peak) << "\n";
  out << "r = " << format_full(cfg.coverage.radius) << "\n";
  out << "delta = " << format_full(cfg.coverage.decay) << "\n";
  out << "k = " << format_full(cfg.coverage.gain) << "\n";
  out << "k_hat = " << format_full(cfg.coverage.gain_fallback) << "\n";
  out << "i_ref = " << format_full(cfg.coverage.i_ref_level) << "\n";
  if (cfg.i_ref_csv) out << "i_ref_csv = " << *cfg.i_ref_csv << "\n";
  out << "fallback = "
      << (cfg.fallback == FallbackTarget::kArgmax ? "argmax"
          : cfg.fallback == FallbackTarget::kRandom ? "random" : "fixed-center")
      << "\n";
  out << "\n[agents]\n";
  out << "n = " << cfg.n << "\n";
  out << "init = "
      << (cfg.init.mode == InitPositions::Mode::kExplicit ? "explicit"
          : cfg.init.mode == InitPositions::Mode::kLloyd ? "lloyd" : "random")
      << "\n";
  if (!cfg.init.explicit_positions.empty()) {
    out << "positions = ";
    for (size_t i = 0; i < cfg.init.explicit_positions.size(); ++i) {
      if (i) out << "; ";
      out << format_full(cfg.init.explicit_positions[i].x()) << ","
          << format_full(cfg.init.explicit_positions[i].y());
    }
    out << "\n";
  }
  out << "box = " << format_full(cfg.init.box_q1_min) << "," << format_full(cfg.init.box_q1_max)
      << "," << format_full(cfg.init.box_q2_min) << "," << format_full(cfg.init.box_q2_max) << "\n";
  out << "seed = " << cfg.init.seed << "\n";
  out << "\n[sim]\n";
  out << "method = " << to_string(cfg.method) << "\n";
  out << "L = " << cfg.window_L << "\n";
  out << "t0 = " << cfg.t0 << "\n";
  out << "tT = " << cfg.tT << "\n";
  out << "dynamics = " << (cfg.dynamics == Dynamics::kIntegrator ? "integrator" : "unicycle") << "\n";
  out << "v_max = " << format_full(cfg.v_max) << "\n";
  out << "a_max = " << format_full(cfg.a_max) << "\n";
  out << "clamp_predictions = " << (cfg.clamp_predictions ? "true" : "false") << "\n";
  out << "repulsion = " << (cfg.repulsion.enabled ? "true" : "false") << "\n";
  out << "safety_radius = " << format_full(cfg.repulsion.safety_radius) << "\n";
  out << "repulsion_gain = " << format_full(cfg.repulsion.gain) << "\n";
  out << "snapshot_every = " << cfg.snapshot_every << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "unicycle_kp = " << format_full(cfg.unicycle.kp) << "\n";
  out << "unicycle_k_omega = " << format_full(cfg.unicycle.k_omega) << "\n";
  out << "unicycle_dt_inner = " << format_full(cfg.unicycle.dt_inner) << "\n";
  out << "unicycle_n_inner = " << cfg.unicycle.n_inner << "\n";
  return out.str();
}

std::string params_fragment(const std::map<std::string, double>& params) {
  std::ostringstream kernel, coverage;
  for (const auto& [name, value] : params) {
    if (name == "beta" || name == "sigma" || name == "tau")
      kernel << name << " = " << format_full(value) << "\n";
    else if (name == "k" || name == "k_hat")
      coverage << name << " = " << format_full(value) << "\n";
    else if (name == "delta")
      coverage << "delta = " << format_full(value) << "\n";
  }
  std::string out;
  if (!kernel.str().empty()) out += "[kernel]\n" + kernel.str();
  if (!coverage.str().empty()) {
    if (!out.empty()) out += "\n";
    out += "[coverage]\n" + coverage.str();
  }
  return out;
}

}  // namespace krigcov
