#pragma once

#include <map>
#include <string>
#include <vector>

#include "krigcov/sim.hpp"
#include "krigcov/tune.hpp"

namespace krigcov {

/// Configuration or usage error; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed INI-style document: `[section]` headers and `key = value` lines.
/// Full-line comments start with `#` or `;`. Later assignments win.
struct ConfigDoc {
  std::map<std::string, std::map<std::string, std::string>> sections;

  void set(const std::string& dotted_key, const std::string& value);
  bool has(const std::string& section, const std::string& key) const;
};

ConfigDoc parse_config_text(const std::string& text);
ConfigDoc parse_config_file(const std::string& path);

/// Apply repeatable `--set section.key=value` overrides.
void apply_overrides(ConfigDoc& doc, const std::vector<std::string>& sets);

/// Build a validated scenario from a document. Unknown sections or keys are
/// rejected naming the offending entry.
ScenarioConfig scenario_from_config(const ConfigDoc& doc);

/// Build the tuning spec ([tune] section plus the scenario sections).
TuneSpec tunespec_from_config(const ConfigDoc& doc);

/// Emit the fully resolved configuration; re-parsing yields an identical
/// scenario (floats are written with full precision).
std::string effective_config(const ScenarioConfig& cfg);

/// Config fragment holding tuned parameter values, mergeable into a config.
std::string params_fragment(const std::map<std::string, double>& params);

}  // namespace krigcov
