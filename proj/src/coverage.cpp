#include "krigcov/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "krigcov/rng.hpp"

namespace krigcov {
namespace {

// Visit every grid cell whose center lies in the closed sensing disk around p.
template <typename Fn>
void for_cells_in_disc(const MissionGrid& g, const Eigen::Vector2d& p, double r,
                       Fn&& fn) {
  const double r2 = r * r;
  const int i_lo = std::max(0, static_cast<int>(std::floor((p.x() - r - g.q1_min()) / g.dx() - 0.5)));
  const int i_hi = std::min(g.nx() - 1, static_cast<int>(std::ceil((p.x() + r - g.q1_min()) / g.dx())));
  const int j_lo = std::max(0, static_cast<int>(std::floor((p.y() - r - g.q2_min()) / g.dy() - 0.5)));
  const int j_hi = std::min(g.ny() - 1, static_cast<int>(std::ceil((p.y() + r - g.q2_min()) / g.dy())));
  for (int j = j_lo; j <= j_hi; ++j)
    for (int i = i_lo; i <= i_hi; ++i) {
      const Eigen::Vector2d c = g.cell_center(i, j);
      const double s = (c - p).squaredNorm();
      if (s <= r2) fn(g.linear_index(i, j), c, s);
    }
}

double reference_at(const CoverageParams& cp, const GridScalarField* i_ref, int lin) {
  return i_ref ? (*i_ref)[lin] : cp.i_ref_level;
}

}  // namespace

double measurement(double s, const CoverageParams& cp) {
  if (s < 0.0) throw std::invalid_argument("measurement: squared distance must be >= 0");
  const double r2 = cp.radius * cp.radius;
  if (s > r2) return 0.0;
  const double d = s - r2;
  return cp.peak / (r2 * r2) * d * d;
}

double measurement_map(const std::vector<AgentState>& agents,
                       const Eigen::Vector2d& q, const CoverageParams& cp) {
  double acc = 0.0;
  for (const AgentState& a : agents) acc += measurement((q - a.p).squaredNorm(), cp);
  return acc;
}

InformationMap info_step(const InformationMap& info,
                         const std::vector<AgentState>& agents,
                         const CoverageParams& cp, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("info_step: dt must be > 0");
  InformationMap out = info;
  const double decay_factor = 1.0 + dt * cp.decay;
  for (double& v : out.values) v *= decay_factor;
  for (const AgentState& a : agents) {
    for_cells_in_disc(info.grid, a.p, cp.radius,
                      [&](int lin, const Eigen::Vector2d&, double s) {
                        out[lin] += dt * measurement(s, cp);
                      });
  }
  for (double& v : out.values) v = std::max(0.0, v);
  return out;
}

double penalty(double e) {
  const double t = std::max(0.0, e);
  return t * t;
}

double penalty_deriv(double e) { return std::max(0.0, 2.0 * e); }

double objective_H(const InformationMap& info, const GridScalarField& phi,
                   const CoverageParams& cp, const GridScalarField* i_ref) {
  if (!info.grid.same_shape(phi.grid))
    throw std::invalid_argument("objective_H: information and importance grids differ");
  if (i_ref && !info.grid.same_shape(i_ref->grid))
    throw std::invalid_argument("objective_H: reference map grid differs");
  double acc = 0.0;
  for (int lin = 0; lin < info.grid.cells(); ++lin)
    acc += penalty(reference_at(cp, i_ref, lin) - info[lin]) * phi[lin];
  return acc * info.grid.cell_area();
}

Eigen::Vector2d control_primary(const AgentState& agent,
                                const InformationMap& info,
                                const GridScalarField& phi,
                                const CoverageParams& cp,
                                const GridScalarField* i_ref) {
  if (!info.grid.same_shape(phi.grid))
    throw std::invalid_argument("control_primary: information and importance grids differ");
  if (i_ref && !info.grid.same_shape(i_ref->grid))
    throw std::invalid_argument("control_primary: reference map grid differs");
  const double r2 = cp.radius * cp.radius;
  const double dM_scale = 2.0 * cp.peak / (r2 * r2);
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for_cells_in_disc(info.grid, agent.p, cp.radius,
                    [&](int lin, const Eigen::Vector2d& c, double s) {
                      const double hp = penalty_deriv(reference_at(cp, i_ref, lin) - info[lin]);
                      if (hp == 0.0) return;
                      const double dM = dM_scale * (s - r2);  // <= 0 inside the disk
                      acc += hp * dM * phi[lin] * (c - agent.p);
                    });
  return -cp.gain * info.grid.cell_area() * acc;
}

Eigen::Vector2d control_fallback(const AgentState& agent,
                                 const GridScalarField& phi,
                                 const CoverageParams& cp,
                                 FallbackTarget target, std::mt19937_64& rng) {
  if (target == FallbackTarget::kFixedCenter) return Eigen::Vector2d::Zero();

  std::vector<int> cells;
  for_cells_in_disc(phi.grid, agent.p, cp.radius,
                    [&](int lin, const Eigen::Vector2d&, double) { cells.push_back(lin); });
  if (cells.empty()) return Eigen::Vector2d::Zero();

  int chosen = -1;
  if (target == FallbackTarget::kArgmax) {
    double lo = phi[cells.front()], hi = phi[cells.front()];
    for (int lin : cells) {
      lo = std::min(lo, phi[lin]);
      hi = std::max(hi, phi[lin]);
    }
    if (hi > lo) {
      double best_d2 = -1.0;
      for (int lin : cells) {
        if (phi[lin] != hi) continue;
        const double d2 = (phi.grid.cell_center(lin) - agent.p).squaredNorm();
        if (d2 > best_d2 || (d2 == best_d2 && lin < chosen)) {
          best_d2 = d2;
          chosen = lin;
        }
      }
    }
    // A flat importance over the disk gives no direction; fall through to a
    // uniformly random cell.
  }
  if (chosen < 0) {
    std::uniform_int_distribution<size_t> pick(0, cells.size() - 1);
    chosen = cells[pick(rng)];
  }
  const Eigen::Vector2d q_hat = phi.grid.cell_center(chosen);
  return -cp.gain_fallback * (agent.p - q_hat);
}

SwitchedControl control_switched(const AgentState& agent,
                                 const InformationMap& info,
                                 const GridScalarField& phi,
                                 const CoverageParams& cp,
                                 FallbackTarget target, std::mt19937_64& rng,
                                 const GridScalarField* i_ref) {
  bool unsatisfied = false;
  for_cells_in_disc(info.grid, agent.p, cp.radius,
                    [&](int lin, const Eigen::Vector2d&, double) {
                      if (penalty_deriv(reference_at(cp, i_ref, lin) - info[lin]) != 0.0)
                        unsatisfied = true;
                    });
  if (unsatisfied) return {control_primary(agent, info, phi, cp, i_ref), true};
  return {control_fallback(agent, phi, cp, target, rng), false};
}

std::vector<Eigen::Vector2d> lloyd_placement(const MissionGrid& grid, int n,
                                             uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lloyd_placement: n must be >= 1");
  const double width = grid.q1_max() - grid.q1_min();
  const double height = grid.q2_max() - grid.q2_min();

  // Perturbed uniform lattice start, shaped to the domain aspect ratio.
  int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(n * width / height))));
  cols = std::min(cols, n);
  const int rows = (n + cols - 1) / cols;
  std::mt19937_64 rng = make_rng(seed, 0x110'4d);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  std::vector<Eigen::Vector2d> sites;
  sites.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int c = k % cols;
    const int r = k / cols;
    sites.push_back({grid.q1_min() + (c + 0.5 + jitter(rng)) * width / cols,
                     grid.q2_min() + (r + 0.5 + jitter(rng)) * height / rows});
  }

  std::vector<int> owner(static_cast<size_t>(grid.cells()));
  for (int iter = 0; iter < 500; ++iter) {
    for (int lin = 0; lin < grid.cells(); ++lin) {
      const Eigen::Vector2d c = grid.cell_center(lin);
      int best = 0;
      double best_d2 = (c - sites[0]).squaredNorm();
      for (int s = 1; s < n; ++s) {
        const double d2 = (c - sites[static_cast<size_t>(s)]).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = s;
        }
      }
      owner[static_cast<size_t>(lin)] = best;
    }
    std::vector<Eigen::Vector2d> sums(static_cast<size_t>(n), Eigen::Vector2d::Zero());
    std::vector<int> counts(static_cast<size_t>(n), 0);
    for (int lin = 0; lin < grid.cells(); ++lin) {
      sums[static_cast<size_t>(owner[static_cast<size_t>(lin)])] += grid.cell_center(lin);
      ++counts[static_cast<size_t>(owner[static_cast<size_t>(lin)])];
    }
    double max_disp = 0.0;
    for (int s = 0; s < n; ++s) {
      if (counts[static_cast<size_t>(s)] == 0) continue;  // empty region keeps its site
      const Eigen::Vector2d centroid = sums[static_cast<size_t>(s)] / counts[static_cast<size_t>(s)];
      max_disp = std::max(max_disp, (centroid - sites[static_cast<size_t>(s)]).norm());
      sites[static_cast<size_t>(s)] = centroid;
    }
    if (max_disp < 1e-6) break;
  }
  return sites;
}

Eigen::Vector2d repulsion(const AgentState& agent,
                          const std::vector<AgentState>& others,
                          double safety_radius, double gain, double cap,
                          std::mt19937_64& rng) {
  if (!(safety_radius > 0.0))
    throw std::invalid_argument("repulsion: safety radius must be > 0");
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  for (const AgentState& o : others) {
    if (o.id == agent.id) continue;
    const Eigen::Vector2d sep = agent.p - o.p;
    const double d = sep.norm();
    if (d >= safety_radius) continue;
    if (d < 1e-12) {
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      const double a = angle(rng);
      u += cap * Eigen::Vector2d(std::cos(a), std::sin(a));
      continue;
    }
    u += gain * (1.0 / d - 1.0 / safety_radius) * sep / d;
  }
  const double norm = u.norm();
  if (norm > cap && norm > 0.0) u *= cap / norm;
  return u;
}

}  // namespace krigcov
