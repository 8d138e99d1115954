#include "krigcov/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "krigcov/csv.hpp"
#include "krigcov/rng.hpp"

namespace krigcov {
namespace {

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

Eigen::Vector2d clip_norm(const Eigen::Vector2d& v, double cap) {
  const double n = v.norm();
  if (n > cap && n > 0.0) return v * (cap / n);
  return v;
}

std::vector<Eigen::Vector2d> initial_positions(const ScenarioConfig& cfg) {
  switch (cfg.init.mode) {
    case InitPositions::Mode::kExplicit: {
      if (static_cast<int>(cfg.init.explicit_positions.size()) != cfg.n)
        throw std::invalid_argument("initial positions: explicit list size != n");
      std::vector<Eigen::Vector2d> out;
      for (const auto& p : cfg.init.explicit_positions) out.push_back(cfg.grid.clamp(p));
      return out;
    }
    case InitPositions::Mode::kLloyd:
      return lloyd_placement(cfg.grid, cfg.n, cfg.init.seed);
    case InitPositions::Mode::kRandomBox: {
      std::mt19937_64 rng = make_rng(cfg.init.seed, 0x1417);
      std::uniform_real_distribution<double> ux(cfg.init.box_q1_min, cfg.init.box_q1_max);
      std::uniform_real_distribution<double> uy(cfg.init.box_q2_min, cfg.init.box_q2_max);
      std::vector<Eigen::Vector2d> out;
      out.reserve(static_cast<size_t>(cfg.n));
      for (int i = 0; i < cfg.n; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        out.push_back(cfg.grid.clamp({x, y}));
      }
      return out;
    }
  }
  throw std::logic_error("initial positions: unknown mode");
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kFixed: return "fixed";
    case Method::kBaseline: return "baseline";
    case Method::kProposed: return "proposed";
  }
  return "?";
}

std::string to_string(Weather w) {
  switch (w) {
    case Weather::kStandard: return "standard";
    case Weather::kSunny: return "sunny";
    case Weather::kCloudy: return "cloudy";
    case Weather::kVeryCloudy: return "very_cloudy";
  }
  return "?";
}

FieldSeries FieldSource::load(const MissionGrid& grid) const {
  if (kind == Kind::kCsv) return load_field_csv(csv_path, grid);
  if (custom_preset) return synth_cloud_field(grid, steps, seed, *custom_preset);
  return synth_cloud_field(grid, steps, seed, weather);
}

void ScenarioConfig::validate() const {
  if (n < 1) throw std::invalid_argument("scenario: agents.n must be >= 1");
  if (window_L < 1) throw std::invalid_argument("scenario: sim.L must be >= 1");
  if (t0 < 1) throw std::invalid_argument("scenario: sim.t0 must be >= 1");
  if (!(t0 < tT)) throw std::invalid_argument("scenario: requires t0 < tT");
  if (!(v_max > 0.0)) throw std::invalid_argument("scenario: sim.v_max must be > 0");
  if (!(a_max > 0.0)) throw std::invalid_argument("scenario: sim.a_max must be > 0");
  if (snapshot_every < 0) throw std::invalid_argument("scenario: sim.snapshot_every must be >= 0");
  if (repulsion.enabled && !(repulsion.safety_radius > 0.0))
    throw std::invalid_argument("scenario: sim.safety_radius must be > 0");
  if (unicycle.n_inner < 1) throw std::invalid_argument("scenario: sim.unicycle_n_inner must be >= 1");
  if (!(unicycle.dt_inner > 0.0)) throw std::invalid_argument("scenario: sim.unicycle_dt_inner must be > 0");
  if (field.kind == FieldSource::Kind::kSynth && field.steps < 2)
    throw std::invalid_argument("scenario: field.steps must be >= 2");
}

GridScalarField control_importance(Method method, const DissimilarityMap& dissim) {
  if (method == Method::kProposed) return dissim.as_field();
  return GridScalarField(dissim.grid, 1.0);
}

AgentState step_integrator(const AgentState& agent, const Eigen::Vector2d& u,
                           const Eigen::Vector2d& u_prev, const MotionCaps& caps,
                           double dt, const MissionGrid& grid,
                           Eigen::Vector2d* applied) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_integrator: dt must be > 0");
  Eigen::Vector2d v = clip_norm(u, caps.v_max);
  const Eigen::Vector2d dv = v - u_prev;
  const double accel = dv.norm() / dt;
  if (accel > caps.a_max) v = u_prev + dv * (caps.a_max * dt / dv.norm());
  if (applied) *applied = v;
  AgentState next = agent;
  next.p = grid.clamp(agent.p + dt * v);
  return next;
}

AgentState step_unicycle(const AgentState& agent, const Eigen::Vector2d& p_next,
                         const UnicycleSettings& uni, const MotionCaps& caps,
                         const MissionGrid& grid) {
  AgentState s = agent;
  double v_prev = 0.0;
  for (int step = 0; step < uni.n_inner; ++step) {
    const Eigen::Vector2d p_r = p_next - s.p;
    const double dist = p_r.norm();
    double v = std::clamp(uni.kp * dist, -caps.v_max, caps.v_max);
    const double dv_cap = caps.a_max * uni.dt_inner;
    v = std::clamp(v, v_prev - dv_cap, v_prev + dv_cap);
    double theta_r = 0.0;
    if (dist > 1e-12) theta_r = wrap_angle(std::atan2(p_r.y(), p_r.x()) - s.theta);
    const double omega = (v > 0.0 ? uni.k_omega : -uni.k_omega) * theta_r;
    s.p += uni.dt_inner * v * Eigen::Vector2d(std::cos(s.theta), std::sin(s.theta));
    s.theta = wrap_angle(s.theta + uni.dt_inner * omega);
    v_prev = v;
  }
  s.p = grid.clamp(s.p);
  return s;
}

RunLog run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const FieldSeries field = cfg.field.load(cfg.grid);
  if (cfg.tT > field.steps - 1)
    throw std::invalid_argument("scenario: tT exceeds the field horizon minus one (" +
                                std::to_string(field.steps - 1) + ")");

  std::optional<GridScalarField> i_ref;
  if (cfg.i_ref_csv && !cfg.i_ref_csv->empty())
    i_ref = read_grid_csv(*cfg.i_ref_csv, cfg.grid);
  const GridScalarField* i_ref_ptr = i_ref ? &*i_ref : nullptr;

  std::vector<AgentState> agents;
  {
    const auto positions = initial_positions(cfg);
    for (int i = 0; i < cfg.n; ++i) agents.push_back({i, positions[static_cast<size_t>(i)], 0.0});
  }
  std::vector<Eigen::Vector2d> u_prev(static_cast<size_t>(cfg.n), Eigen::Vector2d::Zero());

  InformationMap info(cfg.grid, 0.0);
  SampleBuffer buffer(cfg.window_L, cfg.n);
  const GridScalarField uniform_phi(cfg.grid, 1.0);
  std::mt19937_64 run_rng = make_rng(cfg.seed, 0x5e7);

  RunLog log;
  log.agents = cfg.n;
  const int rows = cfg.tT - cfg.t0 + 1;
  log.t.reserve(static_cast<size_t>(rows));

  // Dissimilarity maps of the two previous steps for the finite-difference
  // diagnostics, with flags marking whether the window was full.
  std::vector<std::pair<std::vector<double>, bool>> past_maps;

  for (int t = 0; t < cfg.tT; ++t) {
    // Sampling: every agent measures the true field at its position.
    for (AgentState& a : agents) {
      const double cf = sample_at(field, a.p, t);
      buffer.push({a.p.x(), a.p.y(), static_cast<double>(t)}, cf);
    }
    const bool window_full = buffer.full();

    // One shared sweep: one-step-ahead prediction and dissimilarity map.
    const int t_pred = t + 1;
    FieldPrediction fp = predict_field(cfg.grid, t_pred, buffer, cfg.kernel);

    double step_rmse;
    {
      if (cfg.clamp_predictions) {
        PredictionGrid clamped = fp.prediction;
        for (double& v : clamped.values) v = std::clamp(v, 0.0, 1.0);
        step_rmse = rmse_at(field, clamped, t_pred);
      } else {
        step_rmse = rmse_at(field, fp.prediction, t_pred);
      }
      if (!std::isfinite(step_rmse))
        throw std::runtime_error("scenario: non-finite RMSE at step " + std::to_string(t_pred));
    }

    // Finite-difference time derivatives of the dissimilarity map, restricted
    // to stencils whose maps all came from full sample windows.
    if (past_maps.size() == 2) {
      if (window_full && past_maps[0].second && past_maps[1].second) {
        double d1 = 0.0, d2 = 0.0;
        for (int lin = 0; lin < cfg.grid.cells(); ++lin) {
          const double phi2 = fp.dissimilarity[lin];
          const double phi1 = past_maps[1].first[static_cast<size_t>(lin)];
          const double phi0 = past_maps[0].first[static_cast<size_t>(lin)];
          d1 = std::max(d1, std::abs(phi2 - phi1));
          d2 = std::max(d2, std::abs(phi2 - 2.0 * phi1 + phi0));
        }
        log.max_dphi_dt = std::max(log.max_dphi_dt, d1);
        log.max_d2phi_dt2 = std::max(log.max_d2phi_dt2, d2);
        ++log.diagnostic_steps;
      }
      past_maps.erase(past_maps.begin());
    }
    past_maps.emplace_back(fp.dissimilarity.values, window_full);

    const GridScalarField phi = control_importance(cfg.method, fp.dissimilarity);

    // Control, motion, information dynamics (skipped entirely for fixed
    // sensors). Information is acquired where the agents sampled, so the
    // update uses the pre-motion positions.
    std::vector<uint8_t> branches(static_cast<size_t>(cfg.n), 2);
    const std::vector<AgentState> sampled_at = agents;
    double H = 0.0;
    if (cfg.method != Method::kFixed) {
      std::vector<Eigen::Vector2d> commands(static_cast<size_t>(cfg.n));
      for (int i = 0; i < cfg.n; ++i) {
        AgentState& a = agents[static_cast<size_t>(i)];
        const SwitchedControl sw =
            control_switched(a, info, phi, cfg.coverage, cfg.fallback, run_rng, i_ref_ptr);
        branches[static_cast<size_t>(i)] = sw.primary ? 0 : 1;
        Eigen::Vector2d u = sw.u;
        if (cfg.repulsion.enabled)
          u += repulsion(a, sampled_at, cfg.repulsion.safety_radius,
                         cfg.repulsion.gain, cfg.v_max, run_rng);
        commands[static_cast<size_t>(i)] = u;
      }
      info = info_step(info, sampled_at, cfg.coverage, 1.0);
      const MotionCaps caps{cfg.v_max, cfg.a_max};
      for (int i = 0; i < cfg.n; ++i) {
        AgentState& a = agents[static_cast<size_t>(i)];
        if (cfg.dynamics == Dynamics::kIntegrator) {
          a = step_integrator(a, commands[static_cast<size_t>(i)],
                              u_prev[static_cast<size_t>(i)], caps, 1.0, cfg.grid,
                              &u_prev[static_cast<size_t>(i)]);
        } else {
          a = step_unicycle(a, a.p + commands[static_cast<size_t>(i)], cfg.unicycle,
                            caps, cfg.grid);
        }
        if (!a.p.allFinite())
          throw std::runtime_error("scenario: non-finite agent state at step " + std::to_string(t));
      }
      H = objective_H(info, phi, cfg.coverage, i_ref_ptr);
      if (!std::isfinite(H))
        throw std::runtime_error("scenario: non-finite objective at step " + std::to_string(t));
    }

    if (t_pred >= cfg.t0) {
      log.t.push_back(t_pred);
      log.rmse.push_back(step_rmse);
      log.in_window.push_back(window_full ? 1 : 0);
      log.objective.push_back(H);
      double mean_d = 0.0, max_d = 0.0;
      for (double v : fp.dissimilarity.values) {
        mean_d += v;
        max_d = std::max(max_d, v);
      }
      log.mean_dissim.push_back(mean_d / cfg.grid.cells());
      log.max_dissim.push_back(max_d);
      for (int i = 0; i < cfg.n; ++i) {
        log.pos_q1.push_back(sampled_at[static_cast<size_t>(i)].p.x());
        log.pos_q2.push_back(sampled_at[static_cast<size_t>(i)].p.y());
        log.branch.push_back(branches[static_cast<size_t>(i)]);
      }
      if (cfg.snapshot_every > 0 && (t_pred - cfg.t0) % cfg.snapshot_every == 0)
        log.snapshots.push_back({t_pred, fp.dissimilarity, info, fp.prediction});
    }
  }

  log.E = log.recompute_E();
  return log;
}

double RunLog::recompute_E() const {
  double acc = 0.0;
  int count = 0;
  for (size_t r = 0; r < rmse.size(); ++r) {
    if (!in_window[r]) continue;
    acc += rmse[r];
    ++count;
  }
  if (count == 0)
    throw std::runtime_error("RunLog: no full-window steps inside the evaluation range");
  return acc / count;
}

std::vector<ComparisonRow> compare_methods(const std::vector<ScenarioConfig>& cfgs) {
  if (cfgs.empty()) throw std::invalid_argument("compare_methods: empty sweep");
  const ScenarioConfig& ref = cfgs.front();
  for (const ScenarioConfig& c : cfgs) {
    if (!c.grid.same_shape(ref.grid))
      throw std::invalid_argument("compare_methods: configs use different grids");
    if (c.field.kind != ref.field.kind)
      throw std::invalid_argument("compare_methods: configs use different field sources");
    if (c.t0 != ref.t0 || c.tT != ref.tT)
      throw std::invalid_argument("compare_methods: mismatched evaluation horizons");
  }
  std::vector<ComparisonRow> rows;
  rows.reserve(cfgs.size());
  for (const ScenarioConfig& c : cfgs) {
    const RunLog log = run_scenario(c);
    rows.push_back({c.method,
                    c.field.kind == FieldSource::Kind::kCsv ? "csv" : to_string(c.field.weather),
                    c.n, c.seed, log.E});
  }
  return rows;
}

}  // namespace krigcov
