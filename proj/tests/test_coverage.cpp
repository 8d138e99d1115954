#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "krigcov/coverage.hpp"
#include "krigcov/rng.hpp"

using namespace krigcov;

namespace {

CoverageParams reference_params() {
  return CoverageParams(0.3, 0.5, -0.139, 0.058, 0.4, 1.0);
}

}  // namespace

TEST_CASE("measurement function") {
  const CoverageParams cp = reference_params();
  CHECK(measurement(0.0, cp) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(measurement(0.25, cp) == 0.0);          // s = r^2 boundary
  CHECK(measurement(0.26, cp) == 0.0);          // outside
  CHECK(measurement(0.125, cp) == doctest::Approx(0.075).epsilon(1e-12));
  CHECK_THROWS_AS(measurement(-0.1, cp), std::invalid_argument);

  // Continuity at the sensing boundary.
  const double r2 = cp.radius * cp.radius;
  CHECK(std::abs(measurement(r2 * (1.0 - 1e-4), cp)) < 1e-6);
}

TEST_CASE("measurement map") {
  const CoverageParams cp = reference_params();
  const Eigen::Vector2d q(0.2, -0.1);
  CHECK(measurement_map({}, q, cp) == 0.0);

  std::vector<AgentState> two{{0, q, 0.0}, {1, q, 0.0}};
  CHECK(measurement_map(two, q, cp) == doctest::Approx(2.0 * cp.peak).epsilon(1e-15));

  std::vector<AgentState> near{{0, q + Eigen::Vector2d(cp.radius / 2.0, 0.0), 0.0}};
  CHECK(measurement_map(near, q, cp) ==
        doctest::Approx(9.0 / 16.0 * cp.peak).epsilon(1e-12));
}

TEST_CASE("information dynamics") {
  MissionGrid g(0.0, 1.0, 0.0, 1.0, 8, 8);

  SUBCASE("no decay and no agents leaves the map unchanged") {
    CoverageParams cp(0.3, 0.5, 0.0, 0.058, 0.4, 1.0);
    InformationMap info(g, 0.42);
    InformationMap next = info_step(info, {}, cp, 1.0);
    CHECK(next.values == info.values);
  }
  SUBCASE("equilibrium of decay against a constant source") {
    // delta = -0.2 with M = 0.1 everywhere settles at I = 0.5. A giant
    // footprint makes the measurement effectively constant over the grid.
    CoverageParams cp(0.1, 1000.0, -0.2, 0.058, 0.4, 1.0);
    std::vector<AgentState> agents{{0, {0.5, 0.5}, 0.0}};
    InformationMap info(g, 0.0);
    for (int step = 0; step < 400; ++step) info = info_step(info, agents, cp, 0.25);
    for (double v : info.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("one Euler step of pure decay") {
    CoverageParams cp(0.3, 0.5, -0.139, 0.058, 0.4, 1.0);
    InformationMap info(g, 1.0);
    InformationMap next = info_step(info, {}, cp, 1.0);
    for (double v : next.values) CHECK(v == doctest::Approx(0.861).epsilon(1e-12));
  }
  SUBCASE("decay floors at zero and is strictly monotone until then") {
    CoverageParams cp(0.3, 0.5, -0.7, 0.058, 0.4, 1.0);
    InformationMap info(g, 0.0);
    for (int lin = 0; lin < g.cells(); ++lin) info[lin] = 0.01 * lin;
    for (int step = 0; step < 20; ++step) {
      InformationMap next = info_step(info, {}, cp, 1.0);
      for (int lin = 0; lin < g.cells(); ++lin) {
        CHECK(next[lin] >= 0.0);
        if (info[lin] > 0.0) CHECK(next[lin] < info[lin]);
      }
      info = std::move(next);
    }
  }
  SUBCASE("dt must be positive") {
    CoverageParams cp = reference_params();
    InformationMap info(g, 0.0);
    CHECK_THROWS_AS(info_step(info, {}, cp, 0.0), std::invalid_argument);
  }
}

TEST_CASE("penalty") {
  CHECK(penalty(-1.0) == 0.0);
  CHECK(penalty_deriv(-1.0) == 0.0);
  CHECK(penalty(0.0) == 0.0);
  CHECK(penalty_deriv(0.0) == 0.0);
  CHECK(penalty(0.5) == doctest::Approx(0.25));
  CHECK(penalty_deriv(0.5) == doctest::Approx(1.0));
}

TEST_CASE("coverage objective") {
  MissionGrid g(0.0, 1.0, 0.0, 1.0, 10, 10);
  const CoverageParams cp = reference_params();
  GridScalarField phi(g, 1.0);

  SUBCASE("zero when the reference is met") {
    InformationMap info(g, cp.i_ref_level);
    CHECK(objective_H(info, phi, cp) == 0.0);
  }
  SUBCASE("zero importance map") {
    InformationMap info(g, 0.0);
    GridScalarField none(g, 0.0);
    CHECK(objective_H(info, none, cp) == 0.0);
  }
  SUBCASE("unit deficit over a unit square") {
    InformationMap info(g, 0.0);
    CHECK(objective_H(info, phi, cp) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("grid mismatch") {
    MissionGrid g2(0.0, 1.0, 0.0, 1.0, 9, 10);
    InformationMap info(g2, 0.0);
    CHECK_THROWS_AS(objective_H(info, phi, cp), std::invalid_argument);
  }
  SUBCASE("gridded reference map") {
    InformationMap info(g, 0.0);
    GridScalarField ref(g, 2.0);
    CHECK(objective_H(info, phi, cp, &ref) == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("primary controller") {
  MissionGrid g(-1.0, 1.0, -1.0, 1.0, 40, 40);
  const CoverageParams cp = reference_params();
  GridScalarField phi(g, 1.0);
  AgentState agent{0, {0.1, -0.05}, 0.0};

  SUBCASE("exactly zero when the sensing disk is satisfied") {
    InformationMap info(g, 0.0);
    for (int lin = 0; lin < g.cells(); ++lin) {
      const double d = (g.cell_center(lin) - agent.p).norm();
      info[lin] = d <= cp.radius ? cp.i_ref_level + 0.3 : 0.0;
    }
    const Eigen::Vector2d u = control_primary(agent, info, phi, cp);
    CHECK(u.x() == 0.0);
    CHECK(u.y() == 0.0);
  }
  SUBCASE("a single unsatisfied cell east of the agent pulls east") {
    // Agent on a cell center; the unsatisfied cell sits in the same row, so
    // the pull is exactly axis-aligned.
    AgentState centered{0, g.cell_center(20, 20), 0.0};
    InformationMap info(g, cp.i_ref_level + 1.0);
    info[g.linear_index(26, 20)] = 0.0;  // 0.3 m east, inside the 0.5 m disk
    const Eigen::Vector2d u = control_primary(centered, info, phi, cp);
    CHECK(u.x() > 0.0);
    CHECK(u.y() == 0.0);
  }
  SUBCASE("zero importance yields zero input") {
    InformationMap info(g, 0.0);
    GridScalarField none(g, 0.0);
    const Eigen::Vector2d u = control_primary(agent, info, none, cp);
    CHECK(u.x() == 0.0);
    CHECK(u.y() == 0.0);
  }
  SUBCASE("quadrature converges under grid refinement") {
    // Smooth information and importance fields; doubling the resolution
    // changes the input by less than 5 percent.
    auto smooth_u = [&](int cells_per_side) {
      MissionGrid gr(-1.0, 1.0, -1.0, 1.0, cells_per_side, cells_per_side);
      InformationMap info(gr, 0.0);
      GridScalarField imp(gr, 1.0);
      for (int lin = 0; lin < gr.cells(); ++lin) {
        const Eigen::Vector2d c = gr.cell_center(lin);
        info[lin] = 0.5 + 0.4 * std::sin(2.0 * c.x()) * std::cos(1.5 * c.y());
        imp[lin] = 1.0 + 0.5 * std::cos(c.x() + c.y());
      }
      return control_primary(agent, info, imp, cp);
    };
    const Eigen::Vector2d coarse = smooth_u(60);
    const Eigen::Vector2d fine = smooth_u(120);
    CHECK((coarse - fine).norm() <= 0.05 * fine.norm());
  }
}

TEST_CASE("fallback controller") {
  MissionGrid g(-1.0, 1.0, -1.0, 1.0, 40, 40);
  const CoverageParams cp = reference_params();
  std::mt19937_64 rng = make_rng(7);

  SUBCASE("zero when the target is the agent position") {
    GridScalarField phi(g, 0.0);
    AgentState agent{0, g.cell_center(g.nearest_cell({0.0, 0.0})), 0.0};
    const int lin = g.nearest_cell(agent.p);
    phi[lin] = 5.0;  // unique maximum at the agent's own cell
    const Eigen::Vector2d u = control_fallback(agent, phi, cp, FallbackTarget::kArgmax, rng);
    CHECK(u.norm() == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("linear law magnitude") {
    CoverageParams cp2(0.3, 0.6, -0.139, 0.058, 0.4, 1.0);
    GridScalarField phi(g, 0.0);
    AgentState agent{0, {0.0, 0.0}, 0.0};
    const int lin = g.nearest_cell({0.5, 0.0});
    phi[lin] = 3.0;
    const Eigen::Vector2d u = control_fallback(agent, phi, cp2, FallbackTarget::kArgmax, rng);
    const Eigen::Vector2d q_hat = g.cell_center(lin);
    CHECK(u.x() == doctest::Approx(0.4 * q_hat.x()).epsilon(1e-12));
    CHECK(u.y() == doctest::Approx(0.4 * q_hat.y()).epsilon(1e-12));
  }
  SUBCASE("argmax target is independent of the gain") {
    GridScalarField phi(g, 1.0);
    AgentState agent{0, {0.2, 0.1}, 0.0};
    const int lin = g.nearest_cell({0.4, 0.3});
    phi[lin] = 2.0;
    for (double gain : {0.1, 0.4, 0.9}) {
      CoverageParams cpg(0.3, 0.5, -0.139, 0.058, gain, 1.0);
      const Eigen::Vector2d u = control_fallback(agent, phi, cpg, FallbackTarget::kArgmax, rng);
      const Eigen::Vector2d q_hat = agent.p + u / gain;
      CHECK((q_hat - g.cell_center(lin)).norm() < 1e-9);
    }
  }
  SUBCASE("flat importance draws a random cell inside the disk") {
    GridScalarField phi(g, 1.0);
    AgentState agent{0, {0.0, 0.0}, 0.0};
    std::mt19937_64 rng_a = make_rng(3);
    std::mt19937_64 rng_b = make_rng(3);
    const Eigen::Vector2d u1 = control_fallback(agent, phi, cp, FallbackTarget::kArgmax, rng_a);
    const Eigen::Vector2d u2 = control_fallback(agent, phi, cp, FallbackTarget::kArgmax, rng_b);
    CHECK(u1 == u2);  // deterministic given the generator state
    const Eigen::Vector2d q_hat = agent.p + u1 / cp.gain_fallback;
    CHECK((q_hat - agent.p).norm() <= cp.radius + 1e-12);
  }
  SUBCASE("fixed-center mode never moves") {
    GridScalarField phi(g, 1.0);
    AgentState agent{0, {0.3, 0.3}, 0.0};
    const Eigen::Vector2d u =
        control_fallback(agent, phi, cp, FallbackTarget::kFixedCenter, rng);
    CHECK(u.norm() == 0.0);
  }
}

TEST_CASE("switched controller") {
  MissionGrid g(-1.0, 1.0, -1.0, 1.0, 30, 30);
  const CoverageParams cp = reference_params();
  GridScalarField phi(g, 1.0);
  std::mt19937_64 rng = make_rng(17);
  std::mt19937_64 rng_check = make_rng(17);

  SUBCASE("selects the primary branch while any cell is unsatisfied") {
    InformationMap info(g, 0.0);  // initial map: everything unsatisfied
    AgentState agent{0, {0.25, -0.3}, 0.0};
    const SwitchedControl sw = control_switched(agent, info, phi, cp, FallbackTarget::kArgmax, rng);
    CHECK(sw.primary);
    const Eigen::Vector2d expected = control_primary(agent, info, phi, cp);
    CHECK(sw.u == expected);
  }
  SUBCASE("selects the fallback branch when satisfied, matching its output") {
    InformationMap info(g, cp.i_ref_level + 0.5);
    AgentState agent{0, {0.25, -0.3}, 0.0};
    const SwitchedControl sw = control_switched(agent, info, phi, cp, FallbackTarget::kArgmax, rng);
    CHECK_FALSE(sw.primary);
    const Eigen::Vector2d expected =
        control_fallback(agent, phi, cp, FallbackTarget::kArgmax, rng_check);
    CHECK(sw.u == expected);
  }
  SUBCASE("satisfied disk implies an exact zero primary input, then fallback") {
    std::mt19937_64 state_rng = make_rng(99);
    std::uniform_real_distribution<double> upos(-0.9, 0.9);
    std::uniform_real_distribution<double> ulevel(0.0, 2.0);
    for (int trial = 0; trial < 300; ++trial) {
      AgentState agent{0, {upos(state_rng), upos(state_rng)}, 0.0};
      InformationMap info(g, 0.0);
      for (int lin = 0; lin < g.cells(); ++lin) {
        const double d = (g.cell_center(lin) - agent.p).norm();
        info[lin] = d <= cp.radius ? cp.i_ref_level + ulevel(state_rng)
                                   : ulevel(state_rng);
      }
      const Eigen::Vector2d u = control_primary(agent, info, phi, cp);
      CHECK(u.x() == 0.0);
      CHECK(u.y() == 0.0);
      const SwitchedControl sw =
          control_switched(agent, info, phi, cp, FallbackTarget::kFixedCenter, rng);
      CHECK_FALSE(sw.primary);
    }
  }
}

TEST_CASE("lloyd placement") {
  SUBCASE("single site lands on the domain centroid") {
    MissionGrid g(0.0, 2.0, 0.0, 1.0, 64, 32);
    const auto sites = lloyd_placement(g, 1, 5);
    CHECK(sites.size() == 1);
    CHECK(sites[0].x() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sites[0].y() == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("four sites on the reference rectangle match the known centroids") {
    MissionGrid g(-1.41, 2.38, -1.26, 1.53, 97, 72);
    const auto sites = lloyd_placement(g, 4, 1);
    const std::vector<Eigen::Vector2d> expected = {
        {1.42, 0.84}, {1.45, -0.57}, {-0.45, -0.57}, {-0.48, 0.84}};
    for (const auto& e : expected) {
      double best = 1e9;
      for (const auto& s : sites) best = std::min(best, (s - e).norm());
      CHECK(best < 0.05);
    }
  }
  SUBCASE("any output is a fixed point of its own update") {
    MissionGrid g(-1.41, 2.38, -1.26, 1.53, 97, 72);
    for (int n : {3, 4, 6}) {
      const auto sites = lloyd_placement(g, n, 2);
      // Recompute the centroid of each site's own discrete Voronoi region.
      std::vector<Eigen::Vector2d> sums(static_cast<size_t>(n), Eigen::Vector2d::Zero());
      std::vector<int> counts(static_cast<size_t>(n), 0);
      for (int lin = 0; lin < g.cells(); ++lin) {
        const Eigen::Vector2d c = g.cell_center(lin);
        int best = 0;
        for (int s = 1; s < n; ++s)
          if ((c - sites[static_cast<size_t>(s)]).squaredNorm() <
              (c - sites[static_cast<size_t>(best)]).squaredNorm())
            best = s;
        sums[static_cast<size_t>(best)] += c;
        ++counts[static_cast<size_t>(best)];
      }
      for (int s = 0; s < n; ++s) {
        REQUIRE(counts[static_cast<size_t>(s)] > 0);
        const Eigen::Vector2d centroid = sums[static_cast<size_t>(s)] / counts[static_cast<size_t>(s)];
        CHECK((centroid - sites[static_cast<size_t>(s)]).norm() < 1e-5);
      }
    }
  }
  SUBCASE("deterministic in the seed") {
    MissionGrid g(0.0, 3.0, 0.0, 2.0, 30, 20);
    const auto a = lloyd_placement(g, 5, 11);
    const auto b = lloyd_placement(g, 5, 11);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("repulsion") {
  std::mt19937_64 rng = make_rng(23);
  AgentState me{0, {0.0, 0.0}, 0.0};
  const double R = 0.3, gain = 0.05, cap = 0.15;

  SUBCASE("silent outside the safety radius") {
    std::vector<AgentState> others{{1, {0.31, 0.0}, 0.0}, {2, {0.0, -5.0}, 0.0}};
    CHECK(repulsion(me, others, R, gain, cap, rng).norm() == 0.0);
  }
  SUBCASE("continuous at the safety radius") {
    std::vector<AgentState> others{{1, {R, 0.0}, 0.0}};
    CHECK(repulsion(me, others, R, gain, cap, rng).norm() == 0.0);
    std::vector<AgentState> inside{{1, {R * (1.0 - 1e-6), 0.0}, 0.0}};
    CHECK(repulsion(me, inside, R, gain, cap, rng).norm() < 1e-5);
  }
  SUBCASE("neighbor due west at half the radius pushes east") {
    std::vector<AgentState> others{{1, {-R / 2.0, 0.0}, 0.0}};
    const Eigen::Vector2d u = repulsion(me, others, R, gain, /*cap=*/1.0, rng);
    CHECK(u.y() == 0.0);
    CHECK(u.x() == doctest::Approx(gain / R).epsilon(1e-12));
  }
  SUBCASE("coincident agents produce a capped random push") {
    std::vector<AgentState> others{{1, {0.0, 0.0}, 0.0}};
    const Eigen::Vector2d u = repulsion(me, others, R, gain, cap, rng);
    CHECK(u.norm() == doctest::Approx(cap).epsilon(1e-12));
  }
  SUBCASE("the sum is capped") {
    std::vector<AgentState> others;
    for (int i = 1; i <= 6; ++i)
      others.push_back({i, {1e-3 * i, 0.0}, 0.0});
    const Eigen::Vector2d u = repulsion(me, others, R, gain, cap, rng);
    CHECK(u.norm() <= cap * (1.0 + 1e-12));
  }
}
