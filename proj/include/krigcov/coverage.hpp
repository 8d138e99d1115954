#pragma once

#include <Eigen/Core>

#include <random>
#include <vector>

#include "krigcov/grid.hpp"

namespace krigcov {

/// Persistent-coverage parameters: quartic sensing footprint (peak C, radius
/// r), information decay rate delta <= 0, primary/fallback control gains, and
/// the constant reference information level.
struct CoverageParams {
  double peak;         // C
  double radius;       // r [m]
  double decay;        // delta [1/step], <= 0
  double gain;         // k
  double gain_fallback;  // k_hat
  double i_ref_level;

  CoverageParams(double peak_, double radius_, double decay_, double gain_,
                 double gain_fallback_, double i_ref_level_)
      : peak(peak_), radius(radius_), decay(decay_), gain(gain_),
        gain_fallback(gain_fallback_), i_ref_level(i_ref_level_) {
    if (!(peak > 0.0)) throw std::invalid_argument("CoverageParams: peak must be > 0");
    if (!(radius > 0.0)) throw std::invalid_argument("CoverageParams: radius must be > 0");
    if (!(decay <= 0.0)) throw std::invalid_argument("CoverageParams: decay must be <= 0");
    if (!(gain > 0.0)) throw std::invalid_argument("CoverageParams: gain must be > 0");
    if (!(gain_fallback > 0.0)) throw std::invalid_argument("CoverageParams: fallback gain must be > 0");
    if (!(i_ref_level > 0.0)) throw std::invalid_argument("CoverageParams: i_ref_level must be > 0");
  }
};

using InformationMap = GridScalarField;

struct AgentState {
  int id = 0;
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double theta = 0.0;  // heading, used only by unicycle tracking
};

/// Quartic sensing footprint as a function of squared distance s:
/// C/r^4 (s - r^2)^2 inside the sensing disk, 0 outside; continuous at s = r^2.
double measurement(double s, const CoverageParams& cp);

/// Sum of all agents' measurement functions at position q.
double measurement_map(const std::vector<AgentState>& agents,
                       const Eigen::Vector2d& q, const CoverageParams& cp);

/// One explicit Euler step of the information dynamics
/// I <- max(0, I + dt (delta I + M)), with M evaluated at the cell centers
/// for the given agent positions. Substep by calling repeatedly with dt = 1/m.
InformationMap info_step(const InformationMap& info,
                         const std::vector<AgentState>& agents,
                         const CoverageParams& cp, double dt = 1.0);

/// Information penalty h(e) = max(0, e)^2 and its derivative max(0, 2e).
double penalty(double e);
double penalty_deriv(double e);

/// Coverage objective: sum over cells of h(I_ref - I) * phi * cell_area.
/// A gridded reference map may replace the constant level.
double objective_H(const InformationMap& info, const GridScalarField& phi,
                   const CoverageParams& cp,
                   const GridScalarField* i_ref = nullptr);

/// Gradient-style coverage input: integrates h'(e_I) M'(s) (q - p) phi over
/// the discretized sensing disk. M' <= 0 inside the disk, so the leading
/// minus sign drives the agent toward unsatisfied high-importance cells.
/// Exactly (0, 0) when every cell in the sensing disk is satisfied.
Eigen::Vector2d control_primary(const AgentState& agent,
                                const InformationMap& info,
                                const GridScalarField& phi,
                                const CoverageParams& cp,
                                const GridScalarField* i_ref = nullptr);

/// Choice of the fallback attraction point inside the sensing disk.
enum class FallbackTarget { kArgmax, kRandom, kFixedCenter };

/// Fallback attraction u = -k_hat (p - q_hat). With kArgmax, q_hat is the
/// cell maximizing phi in the sensing disk (ties: greatest distance from p,
/// then lowest cell index); a flat phi over the disk degrades to a uniformly
/// random cell drawn from rng.
Eigen::Vector2d control_fallback(const AgentState& agent,
                                 const GridScalarField& phi,
                                 const CoverageParams& cp,
                                 FallbackTarget target, std::mt19937_64& rng);

struct SwitchedControl {
  Eigen::Vector2d u;
  bool primary;  // which branch produced u
};

/// Switched law: the primary branch whenever some cell of the sensing disk
/// has nonzero penalty slope, the fallback otherwise. The switch condition is
/// evaluated on the same discretized disk as the primary integral.
SwitchedControl control_switched(const AgentState& agent,
                                 const InformationMap& info,
                                 const GridScalarField& phi,
                                 const CoverageParams& cp,
                                 FallbackTarget target, std::mt19937_64& rng,
                                 const GridScalarField* i_ref = nullptr);

/// Centroidal Voronoi placement of n sites under uniform importance:
/// Lloyd iterations (nearest-site assignment of cell centers, centroid
/// update) from a seeded, perturbed lattice until the largest site
/// displacement falls below 1e-6 m or 500 iterations.
std::vector<Eigen::Vector2d> lloyd_placement(const MissionGrid& grid, int n,
                                             uint64_t seed);

/// Short-range collision-avoidance velocity: sum over neighbors closer than
/// safety_radius of gain (1/d - 1/safety_radius) along the separation
/// direction, capped at `cap`. Coincident agents are pushed in a seeded
/// random direction at cap magnitude.
Eigen::Vector2d repulsion(const AgentState& agent,
                          const std::vector<AgentState>& others,
                          double safety_radius, double gain, double cap,
                          std::mt19937_64& rng);

}  // namespace krigcov
