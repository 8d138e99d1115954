#include "krigcov/tune.hpp"

#include <algorithm>
#include <cmath>

#include "krigcov/rng.hpp"

namespace krigcov {
namespace {

double ranked(double f) { return std::isnan(f) ? std::numeric_limits<double>::infinity() : f; }

Eigen::VectorXd project_box(Eigen::VectorXd x,
                            const std::vector<std::pair<double, double>>& bounds) {
  for (int i = 0; i < x.size(); ++i)
    x(i) = std::clamp(x(i), bounds[static_cast<size_t>(i)].first,
                      bounds[static_cast<size_t>(i)].second);
  return x;
}

const std::vector<std::string>& tunable_names() {
  static const std::vector<std::string> names = {"beta", "sigma", "tau",
                                                 "k", "k_hat", "delta"};
  return names;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::vector<std::pair<double, double>>& bounds,
    const std::optional<Eigen::VectorXd>& start, const NelderMeadOptions& opts) {
  const int dim = static_cast<int>(bounds.size());
  if (dim < 1) throw std::invalid_argument("nelder_mead: empty parameter set");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("nelder_mead: bounds must be finite with lower < upper");

  NelderMeadResult result;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& raw) {
    const Eigen::VectorXd x = project_box(raw, bounds);
    const double f = objective(x);
    result.trace.push_back({++evals, x, f});
    const double r = ranked(f);
    if (result.trace.size() == 1 || r < ranked(result.best_f)) {
      result.best_x = x;
      result.best_f = f;
    }
    return r;
  };

  std::mt19937_64 rng = make_rng(opts.seed, 0x7e11e);
  Eigen::VectorXd x0(dim);
  if (start) {
    if (start->size() != dim) throw std::invalid_argument("nelder_mead: start size mismatch");
    x0 = project_box(*start, bounds);
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < dim; ++i) {
      const auto& [lo, hi] = bounds[static_cast<size_t>(i)];
      x0(i) = lo + (hi - lo) * unit(rng);
    }
  }

  std::vector<Eigen::VectorXd> simplex{x0};
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd v = x0;
    const auto& [lo, hi] = bounds[static_cast<size_t>(i)];
    const double h = opts.init_span * (hi - lo);
    v(i) = (v(i) + h <= hi) ? v(i) + h : v(i) - h;
    simplex.push_back(v);
  }
  std::vector<double> f(simplex.size());
  for (size_t i = 0; i < simplex.size(); ++i) {
    if (evals >= opts.budget) break;
    f[i] = eval(simplex[i]);
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  while (evals < opts.budget) {
    std::vector<size_t> order(simplex.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (f[a] != f[b]) return f[a] < f[b];
      return a < b;
    });
    const size_t best = order.front(), worst = order.back();
    const size_t second_worst = order[order.size() - 2];

    double spread = 0.0;
    for (size_t i = 0; i < simplex.size(); ++i)
      spread = std::max(spread, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    if (spread < opts.tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(simplex.size() - 1);

    const Eigen::VectorXd reflected = centroid + kReflect * (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr < f[best]) {
      if (evals < opts.budget) {
        const Eigen::VectorXd expanded = centroid + kExpand * (centroid - simplex[worst]);
        const double fe = eval(expanded);
        if (fe < fr) {
          simplex[worst] = project_box(expanded, bounds);
          f[worst] = fe;
          continue;
        }
      }
      simplex[worst] = project_box(reflected, bounds);
      f[worst] = fr;
      continue;
    }
    if (fr < f[second_worst]) {
      simplex[worst] = project_box(reflected, bounds);
      f[worst] = fr;
      continue;
    }
    if (evals >= opts.budget) break;
    const Eigen::VectorXd contracted = centroid + kContract * (simplex[worst] - centroid);
    const double fc = eval(contracted);
    if (fc < f[worst]) {
      simplex[worst] = project_box(contracted, bounds);
      f[worst] = fc;
      continue;
    }
    for (size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = project_box(simplex[best] + kShrink * (simplex[i] - simplex[best]), bounds);
      if (evals >= opts.budget) break;
      f[i] = eval(simplex[i]);
    }
  }
  return result;
}

std::pair<double, double> TuneSpec::default_bounds(const std::string& name) {
  if (name == "beta") return {1e-5, 1.0};
  if (name == "sigma") return {0.01, 2.0};
  if (name == "tau") return {0.01, 5.0};
  if (name == "k") return {1e-3, 1.0};
  if (name == "k_hat") return {1e-2, 1.0};
  if (name == "delta") return {-1.0, -1e-3};
  throw std::invalid_argument("tune: unknown parameter '" + name + "'");
}

void TuneSpec::validate() const {
  if (params.empty()) throw std::invalid_argument("tune: no free parameters");
  for (const std::string& p : params) {
    if (std::find(tunable_names().begin(), tunable_names().end(), p) == tunable_names().end())
      throw std::invalid_argument("tune: unknown parameter '" + p + "'");
    auto it = bounds.find(p);
    if (it == bounds.end())
      throw std::invalid_argument("tune: missing bounds for parameter '" + p + "'");
    const auto& [lo, hi] = it->second;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw std::invalid_argument("tune: bounds for '" + p + "' must be finite, lower < upper");
    if (p == "delta" && hi > 0.0)
      throw std::invalid_argument("tune: delta upper bound must be <= 0");
    if (p != "delta" && lo <= 0.0)
      throw std::invalid_argument("tune: lower bound for '" + p + "' must be > 0");
  }
  const int dim = static_cast<int>(params.size());
  if (budget < 10 * (dim + 1))
    throw std::invalid_argument("tune: budget must be >= 10*(dim+1) = " +
                                std::to_string(10 * (dim + 1)));
  if (restarts < 0) throw std::invalid_argument("tune: restarts must be >= 0");
  if (!(train_t0 >= 1 && train_t0 < train_tT))
    throw std::invalid_argument("tune: requires 1 <= train_t0 < train_tT");
}

ScenarioConfig apply_params(const ScenarioConfig& base,
                            const std::vector<std::string>& names,
                            const Eigen::VectorXd& values) {
  ScenarioConfig cfg = base;
  for (int i = 0; i < values.size(); ++i) {
    const std::string& name = names[static_cast<size_t>(i)];
    const double v = values(i);
    if (name == "beta") cfg.kernel.beta = v;
    else if (name == "sigma") cfg.kernel.sigma = v;
    else if (name == "tau") cfg.kernel.tau = v;
    else if (name == "k") cfg.coverage.gain = v;
    else if (name == "k_hat") cfg.coverage.gain_fallback = v;
    else if (name == "delta") cfg.coverage.decay = v;
    else throw std::invalid_argument("apply_params: unknown parameter '" + name + "'");
  }
  return cfg;
}

TuneResult tune(const TuneSpec& spec) {
  spec.validate();
  std::vector<std::pair<double, double>> box;
  for (const std::string& p : spec.params) box.push_back(spec.bounds.at(p));

  auto objective = [&](const Eigen::VectorXd& x) -> double {
    ScenarioConfig cfg = apply_params(spec.base, spec.params, x);
    cfg.t0 = spec.train_t0;
    cfg.tT = spec.train_tT;
    try {
      return run_scenario(cfg).E;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  TuneResult result;
  result.best_E = std::numeric_limits<double>::infinity();
  int eval_offset = 0;
  for (int r = 0; r <= spec.restarts; ++r) {
    NelderMeadOptions opts;
    opts.budget = spec.budget;
    opts.seed = mix_seed(spec.seed, static_cast<uint64_t>(r));
    NelderMeadResult nm = nelder_mead(objective, box, std::nullopt, opts);
    for (EvalRecord& rec : nm.trace) {
      rec.eval += eval_offset;
      result.trace.push_back(rec);
    }
    eval_offset += static_cast<int>(nm.trace.size());
    if (ranked(nm.best_f) < result.best_E) {
      result.best_E = ranked(nm.best_f);
      result.best.clear();
      for (size_t i = 0; i < spec.params.size(); ++i)
        result.best[spec.params[i]] = nm.best_x(static_cast<Eigen::Index>(i));
    }
  }
  return result;
}

}  // namespace krigcov
