#pragma once

#include <optional>
#include <string>
#include <vector>

#include "krigcov/coverage.hpp"
#include "krigcov/field.hpp"
#include "krigcov/kriging.hpp"

namespace krigcov {

enum class Method { kFixed, kBaseline, kProposed };
enum class Dynamics { kIntegrator, kUnicycle };

std::string to_string(Method m);
std::string to_string(Weather w);

/// Where the ground-truth field comes from: a CSV file or the synthetic
/// generator (weather preset or explicit preset).
struct FieldSource {
  enum class Kind { kCsv, kSynth };
  Kind kind = Kind::kSynth;
  std::string csv_path;
  Weather weather = Weather::kCloudy;
  std::optional<CloudPreset> custom_preset;  // overrides the weather preset
  uint64_t seed = 1;
  int steps = 400;

  FieldSeries load(const MissionGrid& grid) const;
};

struct InitPositions {
  enum class Mode { kExplicit, kLloyd, kRandomBox };
  Mode mode = Mode::kRandomBox;
  std::vector<Eigen::Vector2d> explicit_positions;
  double box_q1_min = -0.54, box_q1_max = 0.80;
  double box_q2_min = -0.54, box_q2_max = 0.86;
  uint64_t seed = 1;
};

struct RepulsionSettings {
  bool enabled = true;
  double safety_radius = 0.3;
  double gain = 0.05;
};

struct UnicycleSettings {
  double kp = 0.8;
  double k_omega = 1.0;
  double dt_inner = 0.1;
  int n_inner = 80;
};

/// Full experiment definition. Defaults follow the reference experimental
/// setup (4 agents on a 97x72 grid over [-1.41,2.38]x[-1.26,1.53], window
/// L=10, evaluation steps 1..100).
struct ScenarioConfig {
  Method method = Method::kProposed;
  int n = 4;
  int window_L = 10;
  int t0 = 1;
  int tT = 100;
  MissionGrid grid{-1.41, 2.38, -1.26, 1.53, 97, 72};
  KernelParams kernel{0.202815, 0.329897, 0.169103};
  CoverageParams coverage{0.3, 0.5, -0.209257, 0.0578, 0.399603, 1.0};
  Dynamics dynamics = Dynamics::kIntegrator;
  double v_max = 0.15;
  double a_max = 0.1;
  FieldSource field;
  InitPositions init;
  bool clamp_predictions = false;
  RepulsionSettings repulsion;
  UnicycleSettings unicycle;
  FallbackTarget fallback = FallbackTarget::kArgmax;
  uint64_t seed = 1;
  int snapshot_every = 0;  // 0 disables map snapshots
  std::optional<std::string> i_ref_csv;

  void validate() const;
};

struct Snapshot {
  int t;
  DissimilarityMap dissimilarity;
  InformationMap information;
  PredictionGrid prediction;
};

/// Per-run results. All per-step series are aligned with prediction steps
/// t0..tT; agent-indexed series are row-major (step row * n + agent) and hold
/// the state at the sampling instant the row's prediction was made from.
struct RunLog {
  std::vector<int> t;
  std::vector<double> rmse;
  std::vector<uint8_t> in_window;  // 1 once the sample window was full
  std::vector<double> objective;   // H; identically 0 for the fixed method
  std::vector<double> mean_dissim;
  std::vector<double> max_dissim;
  int agents = 0;
  std::vector<double> pos_q1, pos_q2;
  std::vector<uint8_t> branch;  // 0 primary, 1 fallback, 2 none
  double E = 0.0;
  // Largest finite-difference time derivatives of the dissimilarity map,
  // taken over steps whose whole stencil used a full sample window.
  double max_dphi_dt = 0.0;
  double max_d2phi_dt2 = 0.0;
  int diagnostic_steps = 0;
  std::vector<Snapshot> snapshots;

  double recompute_E() const;
};

/// Closed-loop scenario: per step, agents sample the true field, the
/// predictor sweeps the grid for step t+1, RMSE is logged against the truth,
/// the switched controller (plus repulsion) moves the agents, and the
/// information map is updated. The fixed method skips all motion and
/// information dynamics. Deterministic given the config seeds.
RunLog run_scenario(const ScenarioConfig& cfg);

/// Importance map fed to the controllers and the objective for a method:
/// the dissimilarity map for the proposed method, a unit map otherwise.
GridScalarField control_importance(Method method, const DissimilarityMap& dissim);

struct MotionCaps {
  double v_max;
  double a_max;
};

/// Single-integrator step: clip the commanded velocity to v_max, clip the
/// velocity change against the acceleration cap, integrate, clamp to Q.
/// Returns the applied velocity for the next step's acceleration limit.
AgentState step_integrator(const AgentState& agent, const Eigen::Vector2d& u,
                           const Eigen::Vector2d& u_prev, const MotionCaps& caps,
                           double dt, const MissionGrid& grid,
                           Eigen::Vector2d* applied = nullptr);

/// Differential-drive waypoint tracking toward p_next: n_inner inner steps of
/// heading-aligned linear/angular velocity control with speed and
/// acceleration caps; the final position is clamped to Q.
AgentState step_unicycle(const AgentState& agent, const Eigen::Vector2d& p_next,
                         const UnicycleSettings& uni, const MotionCaps& caps,
                         const MissionGrid& grid);

struct ComparisonRow {
  Method method;
  std::string weather;  // preset name, or "csv"
  int n;
  uint64_t seed;
  double E;
};

/// Run every config and collect one summary row each. All configs must share
/// the grid, the field-source kind, and the evaluation horizon.
std::vector<ComparisonRow> compare_methods(const std::vector<ScenarioConfig>& cfgs);

}  // namespace krigcov
