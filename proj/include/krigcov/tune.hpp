#pragma once

#include <Eigen/Core>

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "krigcov/sim.hpp"

namespace krigcov {

/// One evaluated point of a derivative-free search.
struct EvalRecord {
  int eval;
  Eigen::VectorXd x;
  double f;  // raw objective (may be NaN; NaN is ranked as +inf)
};

struct NelderMeadOptions {
  int budget = 100;      // max objective evaluations
  uint64_t seed = 0;     // start point + simplex construction
  double init_span = 0.10;  // initial simplex size, fraction of box width
  double tol = 1e-12;    // simplex spread stopping threshold
};

struct NelderMeadResult {
  Eigen::VectorXd best_x;
  double best_f;
  std::vector<EvalRecord> trace;
};

/// Nelder-Mead with box projection: every candidate is clipped into the box
/// before evaluation, so all evaluated points respect the bounds. The start
/// point, when not given, is drawn uniformly in the box from the seed.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::vector<std::pair<double, double>>& bounds,
    const std::optional<Eigen::VectorXd>& start, const NelderMeadOptions& opts);

/// Tunable scenario parameters, a subset of
/// {beta, sigma, tau, k, k_hat, delta}.
struct TuneSpec {
  std::vector<std::string> params;
  std::map<std::string, std::pair<double, double>> bounds;
  ScenarioConfig base;
  int train_t0 = 1;
  int train_tT = 100;
  int budget = 100;
  uint64_t seed = 1;
  int restarts = 0;

  void validate() const;
  static std::pair<double, double> default_bounds(const std::string& name);
};

struct TuneResult {
  std::map<std::string, double> best;
  double best_E;
  std::vector<EvalRecord> trace;  // eval numbers continue across restarts
};

/// Minimize the training-window E over the free parameters with seeded
/// Nelder-Mead restarts. A NaN objective is logged and ranked as +inf.
TuneResult tune(const TuneSpec& spec);

/// Apply named parameter values onto a scenario config.
ScenarioConfig apply_params(const ScenarioConfig& base,
                            const std::vector<std::string>& names,
                            const Eigen::VectorXd& values);

}  // namespace krigcov
