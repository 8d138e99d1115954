#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "krigcov/kriging.hpp"
#include "oracles.hpp"

using namespace krigcov;

namespace {

SampleBuffer buffer_from_points(const Eigen::Matrix3Xd& points,
                                const Eigen::RowVectorXd& cf) {
  SampleBuffer buf(static_cast<int>(points.cols()), 1);
  for (int i = 0; i < points.cols(); ++i)
    buf.push({points(0, i), points(1, i), points(2, i)}, cf(i));
  return buf;
}

/// Random buffer with pairwise-separated points (scaled by the kernel length
/// scales), one entry per step.
SampleBuffer random_buffer(std::mt19937_64& rng, int n, const KernelParams& kp,
                           Eigen::RowVectorXd* cf_out = nullptr) {
  std::uniform_real_distribution<double> us(-2.5 * kp.sigma, 2.5 * kp.sigma);
  std::uniform_real_distribution<double> ut(0.0, 2.5 * kp.tau * n);
  std::uniform_real_distribution<double> ucf(0.0, 1.0);
  std::vector<Eigen::Vector3d> pts;
  while (static_cast<int>(pts.size()) < n) {
    Eigen::Vector3d cand(us(rng), us(rng), ut(rng));
    bool ok = true;
    for (const auto& p : pts) {
      const Eigen::Vector3d d = cand - p;
      const double w2 = (d.x() * d.x() + d.y() * d.y()) / (kp.sigma * kp.sigma) +
                        d.z() * d.z() / (kp.tau * kp.tau);
      if (w2 < 0.25) ok = false;
    }
    if (ok) pts.push_back(cand);
  }
  std::sort(pts.begin(), pts.end(),
            [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.z() < b.z(); });
  Eigen::Matrix3Xd m(3, n);
  Eigen::RowVectorXd cf(n);
  for (int i = 0; i < n; ++i) {
    m.col(i) = pts[static_cast<size_t>(i)];
    cf(i) = ucf(rng);
  }
  if (cf_out) *cf_out = cf;
  return buffer_from_points(m, cf);
}

}  // namespace

TEST_CASE("separable gaussian kernel") {
  KernelParams kp(0.2, 0.33, 0.1);
  SpatioTemporalPoint z{0.3, -0.1, 5.0};
  CHECK(kernel(z, z, kp) == 1.0);

  SpatioTemporalPoint at_sigma{0.3 + 0.2, -0.1, 5.0};
  CHECK(kernel(z, at_sigma, kp) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(kernel(z, at_sigma, kp) == doctest::Approx(0.606531).epsilon(1e-6));

  SpatioTemporalPoint at_two_tau{0.3, -0.1, 5.0 + 2.0 * 0.33};
  CHECK(kernel(z, at_two_tau, kp) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(kernel(z, at_two_tau, kp) == doctest::Approx(0.135335).epsilon(1e-6));

  CHECK_THROWS_AS(KernelParams(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelParams(1.0, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelParams(1.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("sample buffer ordering and window") {
  SampleBuffer buf(2, 3);
  CHECK(buf.empty());
  CHECK_THROWS_AS(buf.push({0, 0, 0}, 1.5), std::invalid_argument);

  for (int t = 0; t < 3; ++t)
    for (int a = 0; a < 3; ++a)
      buf.push({0.1 * a, 0.0, static_cast<double>(t)}, 0.1 * (3 * t + a));

  // Window of 2 steps: t=0 evicted, oldest remaining step first.
  CHECK(buf.size() == 6);
  CHECK(buf.full());
  CHECK(buf.newest_time() == 2.0);
  const Eigen::Matrix3Xd Z = buf.regressor_matrix();
  const Eigen::RowVectorXd Y = buf.observation_row();
  CHECK(Z(2, 0) == 1.0);
  CHECK(Z(2, 5) == 2.0);
  CHECK(Z(0, 1) == doctest::Approx(0.1));  // within a step, agents keep push order
  CHECK(Y(0) == doctest::Approx(0.3));
  CHECK(Y(5) == doctest::Approx(0.8));

  CHECK_THROWS_AS(buf.push({0, 0, 1.0}, 0.5), std::invalid_argument);  // out of order
  buf.push({0, 0, 3.0}, 0.5);
  buf.push({0, 0, 3.0}, 0.5);
  buf.push({0, 0, 3.0}, 0.5);
  CHECK_THROWS_AS(buf.push({0, 0, 3.0}, 0.5), std::invalid_argument);  // > n per step
}

TEST_CASE("gram matrix") {
  KernelParams kp(1.0, 1.0, 0.0);
  SUBCASE("single sample") {
    SampleBuffer buf(1, 1);
    buf.push({0, 0, 0}, 0.5);
    const Eigen::MatrixXd K = gram(buf, kp);
    CHECK(K.rows() == 1);
    CHECK(K(0, 0) == 1.0);
  }
  SUBCASE("two identical points") {
    SampleBuffer buf(1, 2);
    buf.push({0.4, 0.2, 0}, 0.5);
    buf.push({0.4, 0.2, 0}, 0.5);
    const Eigen::MatrixXd K = gram(buf, kp);
    CHECK(K(0, 1) == 1.0);
    CHECK(K(1, 0) == 1.0);
  }
  SUBCASE("empty buffer") {
    SampleBuffer buf(1, 1);
    CHECK_THROWS_AS(gram(buf, kp), std::invalid_argument);
  }
  SUBCASE("symmetry, unit diagonal and positive semidefiniteness") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 39);
      KernelParams kpt(0.2, 0.3, 0.0);
      SampleBuffer buf = random_buffer(rng, n, kpt);
      const Eigen::MatrixXd K = gram(buf, kpt);
      CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(K.diagonal().isOnes());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
  }
}

TEST_CASE("cross kernel") {
  KernelParams kp(0.25, 0.5, 0.0);
  std::mt19937_64 rng(31);
  SampleBuffer buf = random_buffer(rng, 6, kp);
  const auto& entries = buf.entries();

  SUBCASE("row of ones at a buffer point") {
    const Eigen::RowVectorXd row = cross_kernel(entries[3].z, buf, kp);
    CHECK(row(3) == 1.0);
  }
  SUBCASE("vanishes far away") {
    SpatioTemporalPoint far{100.0 * kp.sigma, 0.0, 0.0};
    const Eigen::RowVectorXd row = cross_kernel(far, buf, kp);
    for (int i = 0; i < row.size(); ++i) CHECK(row(i) < 1e-30);
  }
  SUBCASE("entrywise agreement with the scalar kernel") {
    SpatioTemporalPoint z{0.1, -0.2, 1.7};
    const Eigen::RowVectorXd row = cross_kernel(z, buf, kp);
    for (int i = 0; i < row.size(); ++i)
      CHECK(row(i) == kernel(z, entries[static_cast<size_t>(i)].z, kp));
  }
}

TEST_CASE("solve_weights: interpolation at a buffer point with beta = 0") {
  KernelParams kp(0.3, 0.4, 0.0);
  std::mt19937_64 rng(41);
  Eigen::RowVectorXd cf;
  SampleBuffer buf = random_buffer(rng, 12, kp, &cf);
  const auto& entries = buf.entries();
  const KrigingSolution sol = solve_weights(entries[7].z, buf, kp);
  CHECK(std::abs(sol.J) <= 1e-8);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(12);
  expected(7) = 1.0;
  CHECK((sol.lambda - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("solve_weights: frozen two-sample instance") {
  // K = [[1, 0.5], [0.5, 1]], k* = (0.8, 0.2), beta = 1. Substituting
  // lambda2 = 1 - lambda1 reduces the objective to 3 l^2 - 4.2 l + 2.6 with
  // minimizer l = 0.7 and value 1.13 (cross-checked by the grid oracle).
  const double d12 = std::sqrt(2.0 * std::log(2.0));   // kernel 0.5 at this gap
  const double a = std::sqrt(2.0 * std::log(1.25));    // kernel 0.8
  const double b = std::sqrt(2.0 * std::log(5.0));     // kernel 0.2
  // Samples on the x axis, query at the intersection of the two circles.
  const double qx = (a * a + d12 * d12 - b * b) / (2.0 * d12);
  const double qy = std::sqrt(a * a - qx * qx);
  KernelParams kp(1.0, 1.0, 1.0);
  SampleBuffer buf(1, 2);
  buf.push({0.0, 0.0, 0.0}, 1.0);
  buf.push({d12, 0.0, 0.0}, 0.0);
  const SpatioTemporalPoint query{qx, qy, 0.0};

  REQUIRE(gram(buf, kp)(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  const Eigen::RowVectorXd ks = cross_kernel(query, buf, kp);
  REQUIRE(ks(0) == doctest::Approx(0.8).epsilon(1e-12));
  REQUIRE(ks(1) == doctest::Approx(0.2).epsilon(1e-12));

  const KrigingSolution sol = solve_weights(query, buf, kp);
  CHECK(sol.lambda(0) == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(sol.lambda(1) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(sol.J == doctest::Approx(1.13).epsilon(1e-9));

  Eigen::MatrixXd H(2, 2);
  H << 4.0, 1.0, 1.0, 4.0;
  Eigen::VectorXd f(2);
  f << -1.6, -0.4;
  const auto brute = oracle::brute_force_simplex_affine(H, f);
  CHECK(brute.lambda(0) == doctest::Approx(0.7).epsilon(1e-5));
  CHECK(brute.J == doctest::Approx(1.13).epsilon(1e-7));
}

TEST_CASE("solve_weights matches the brute-force oracle") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const auto inst = oracle::random_kernel_instance(rng, n);
    // Same instance through the production path: sigma = tau = 1 makes the
    // separable kernel equal exp(-0.5 |dz|^2).
    KernelParams kp(1.0, 1.0, inst.beta);
    SampleBuffer buf = buffer_from_points(inst.points, Eigen::RowVectorXd::Constant(n, 0.5));
    const KrigingSolution sol =
        solve_weights({inst.query.x(), inst.query.y(), inst.query.z()}, buf, kp);
    const auto brute = oracle::brute_force_simplex_affine(inst.H, inst.f);
    CHECK(std::abs(sol.J - brute.J) <= 1e-5);
    CHECK((sol.lambda - brute.lambda).norm() <= 1e-3);
  }
}

TEST_CASE("solve_weights invariants") {
  std::mt19937_64 rng(61);

  SUBCASE("sum-to-one constraint and J lower bound") {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 25);
      KernelParams kp(0.2, 0.3, 0.05 + 0.5 * ((trial % 7) / 7.0));
      SampleBuffer buf = random_buffer(rng, n, kp);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const KrigingSolution sol =
          solve_weights({u(rng), u(rng), buf.newest_time() + 1.0}, buf, kp);
      CHECK(std::abs(sol.lambda.sum() - 1.0) <= 1e-9);
      CHECK(sol.J >= -1e-9);
      CHECK(sol.one_step_ahead);
    }
  }
  SUBCASE("optimal value is nondecreasing in beta") {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 10);
      KernelParams lo(0.25, 0.4, 0.01 + 0.2 * (trial % 5));
      KernelParams hi(lo.sigma, lo.tau, lo.beta + 0.05 + 0.3 * (trial % 3));
      SampleBuffer buf = random_buffer(rng, n, lo);
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      SpatioTemporalPoint z{u(rng), u(rng), buf.newest_time() + 1.0};
      CHECK(solve_weights(z, buf, hi).J >= solve_weights(z, buf, lo).J - 1e-12);
    }
  }
  SUBCASE("duplicated samples fall back to the ridge") {
    KernelParams kp(0.3, 0.3, 0.0);
    SampleBuffer buf(1, 3);
    buf.push({0.1, 0.1, 0.0}, 0.4);
    buf.push({0.1, 0.1, 0.0}, 0.4);
    buf.push({0.5, 0.1, 0.0}, 0.6);
    const KrigingSolution sol = solve_weights({0.3, 0.1, 1.0}, buf, kp);
    CHECK(std::abs(sol.lambda.sum() - 1.0) <= 1e-9);
    CHECK(sol.J >= -1e-9);
  }
}

TEST_CASE("predict") {
  KernelParams kp(0.3, 0.4, 0.2);
  std::mt19937_64 rng(71);

  SUBCASE("constant observations predict exactly") {
    SampleBuffer buf(3, 2);
    for (int t = 0; t < 3; ++t) {
      buf.push({0.1 * t, 0.0, static_cast<double>(t)}, 0.37);
      buf.push({0.0, 0.2 * t, static_cast<double>(t)}, 0.37);
    }
    for (int trial = 0; trial < 10; ++trial) {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const Prediction p = predict({u(rng), u(rng)}, 3.0, buf, kp);
      CHECK(p.cf_hat == doctest::Approx(0.37).epsilon(1e-12));
      CHECK(p.one_step_ahead);
    }
  }
  SUBCASE("interpolation value with beta = 0") {
    KernelParams kp0(0.3, 0.4, 0.0);
    Eigen::RowVectorXd cf;
    SampleBuffer buf = random_buffer(rng, 9, kp0, &cf);
    const auto& entries = buf.entries();
    const Prediction p =
        predict({entries[4].z.q1, entries[4].z.q2}, entries[4].z.t, buf, kp0);
    CHECK(p.cf_hat == doctest::Approx(entries[4].cf).epsilon(1e-8));
    CHECK_FALSE(p.one_step_ahead);
  }
  SUBCASE("frozen two-sample value") {
    Eigen::MatrixXd H(2, 2);
    H << 4.0, 1.0, 1.0, 4.0;
    Eigen::VectorXd f(2);
    f << -1.6, -0.4;
    const auto brute = oracle::brute_force_simplex_affine(H, f);
    const Eigen::RowVectorXd Y = (Eigen::RowVectorXd(2) << 1.0, 0.0).finished();
    CHECK((Y * brute.lambda).value() == doctest::Approx(0.7).epsilon(1e-5));
  }
}

TEST_CASE("dissimilarity map") {
  KernelParams kp(0.25, 0.4, 0.15);
  MissionGrid grid(0.0, 1.0, 0.0, 1.0, 12, 10);

  SUBCASE("zero at an exactly matching buffer point with beta = 0") {
    KernelParams kp0(0.25, 0.4, 0.0);
    SampleBuffer buf(2, 2);
    const Eigen::Vector2d c = grid.cell_center(5, 5);
    buf.push({c.x(), c.y(), 1.0}, 0.5);
    buf.push({0.9, 0.9, 1.0}, 0.2);
    buf.push({0.2, 0.8, 2.0}, 0.3);
    buf.push({0.7, 0.1, 2.0}, 0.6);
    // Query time equal to the matching sample's step.
    const DissimilarityMap map = dissimilarity_map(grid, 1.0, buf, kp0);
    CHECK(std::abs(map[grid.linear_index(5, 5)]) <= 1e-8);
  }
  SUBCASE("far-field value approaches beta + 2 for a single sample") {
    SampleBuffer buf(1, 1);
    buf.push({-1000.0, -1000.0, 0.0}, 0.5);
    const DissimilarityMap map = dissimilarity_map(grid, 1.0, buf, kp);
    for (double v : map.values) CHECK(v == doctest::Approx(kp.beta + 2.0).epsilon(1e-12));
  }
  SUBCASE("pointwise equal to per-cell solve and predict output") {
    std::mt19937_64 rng(81);
    SampleBuffer buf = random_buffer(rng, 8, kp);
    const int tp = static_cast<int>(std::ceil(buf.newest_time())) + 1;
    const double t_pred = tp;
    const DissimilarityMap map = dissimilarity_map(grid, t_pred, buf, kp);
    const FieldPrediction fp = predict_field(grid, tp, buf, kp);
    for (int lin = 0; lin < grid.cells(); ++lin) {
      const Eigen::Vector2d q = grid.cell_center(lin);
      const Prediction p = predict(q, t_pred, buf, kp);
      CHECK(map[lin] == p.J);
      CHECK(fp.dissimilarity[lin] == p.J);
      CHECK(fp.prediction[lin] == p.cf_hat);
      CHECK(map[lin] >= -1e-9);
    }
  }
}

TEST_CASE("general dissimilarity") {
  SUBCASE("single column forces lambda = 1") {
    Eigen::VectorXd d(2);
    d << 0.3, 0.7;
    Eigen::MatrixXd D(2, 1);
    D << 0.3, 0.7;
    Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 1.7);
    for (double gamma : {0.0, 0.3, 0.8}) {
      const auto res = dissimilarity_general(d, D, w, gamma);
      CHECK(res.lambda(0) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(res.J == doctest::Approx((1.0 - gamma) * 1.7 + gamma).epsilon(1e-10));
    }
  }
  SUBCASE("midpoint of two affinely independent columns") {
    Eigen::MatrixXd D(2, 2);
    D << 0.0, 1.0, 0.0, 1.0;
    Eigen::VectorXd d(2);
    d << 0.5, 0.5;
    const auto res = dissimilarity_general(d, D, Eigen::VectorXd::Ones(2), 0.0);
    CHECK(res.lambda(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.lambda(1) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.J == doctest::Approx(0.5).epsilon(1e-9));
    // Grid verification of the least-norm value over the constraint line.
    double best = 1e100;
    for (int k = -2000; k <= 2000; ++k) {
      const double l1 = k / 1000.0;
      const Eigen::Vector2d lam(l1, 1.0 - l1);
      if ((D * lam - d).norm() < 1e-9) best = std::min(best, lam.squaredNorm());
    }
    CHECK(res.J == doctest::Approx(best).epsilon(1e-6));
  }
  SUBCASE("infeasible target reports an error") {
    Eigen::MatrixXd D(3, 2);
    D << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
    Eigen::VectorXd d(3);
    d << 0.5, 0.5, 1.0;  // last coordinate unreachable
    CHECK_THROWS_WITH_AS(dissimilarity_general(d, D, Eigen::VectorXd::Ones(2), 0.0),
                         doctest::Contains("infeasible"), std::runtime_error);
  }
  SUBCASE("affine invariance with gamma = 0 and unit weights") {
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const int nd = 3, n = 5;
      Eigen::MatrixXd D(nd, n);
      Eigen::VectorXd d(nd);
      for (int i = 0; i < nd; ++i) {
        d(i) = u(rng);
        for (int j = 0; j < n; ++j) D(i, j) = u(rng);
      }
      Eigen::MatrixXd A;
      do {
        A.resize(nd, nd);
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j) A(i, j) = u(rng);
      } while (std::abs(A.determinant()) < 0.1);
      Eigen::VectorXd b(nd);
      for (int i = 0; i < nd; ++i) b(i) = u(rng);

      const auto base = dissimilarity_general(d, D, Eigen::VectorXd::Ones(n), 0.0);
      const Eigen::MatrixXd Dt = A * D + b * Eigen::RowVectorXd::Ones(n);
      const auto mapped = dissimilarity_general(A * d + b, Dt, Eigen::VectorXd::Ones(n), 0.0);
      CHECK(std::abs(base.J - mapped.J) <= 1e-8);
    }
  }
  SUBCASE("l1 term against a 1-D line oracle") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
      // One data dimension and three columns leaves one degree of freedom.
      Eigen::MatrixXd D(1, 3);
      D << u(rng), u(rng), u(rng);
      Eigen::VectorXd d(1);
      d << 0.4 * u(rng);
      Eigen::VectorXd w(3);
      w << 0.5 + std::abs(u(rng)), 0.5 + std::abs(u(rng)), 0.5 + std::abs(u(rng));
      const double gamma = 0.1 + 0.4 * std::abs(u(rng));

      GeneralDissimilarity res;
      try {
        res = dissimilarity_general(d, D, w, gamma);
      } catch (const std::runtime_error&) {
        continue;  // randomly degenerate geometry
      }
      // Feasible line: lambda = p + t * v with A p = b, A v = 0.
      Eigen::MatrixXd A(2, 3);
      A.row(0) = D.row(0);
      A.row(1).setOnes();
      Eigen::VectorXd b(2);
      b << d(0), 1.0;
      const Eigen::VectorXd p = A.completeOrthogonalDecomposition().solve(b);
      const Eigen::VectorXd v = Eigen::FullPivLU<Eigen::MatrixXd>(A).kernel().col(0);
      if ((A * p - b).norm() > 1e-9) continue;
      double best = 1e100;
      for (int k = -40000; k <= 40000; ++k) {
        const Eigen::VectorXd lam = p + (k / 4000.0) * v;
        const double val = (1.0 - gamma) * (w.array() * lam.array().square()).sum() +
                           gamma * lam.array().abs().sum();
        best = std::min(best, val);
      }
      CHECK(res.J <= best + 1e-5);
      CHECK(res.J >= best - 2e-3);  // grid resolution slack
    }
  }
  SUBCASE("weights steer the solution away from heavy columns") {
    Eigen::MatrixXd D(1, 2);
    D << 0.0, 0.0;
    Eigen::VectorXd d(1);
    d << 0.0;
    Eigen::VectorXd w(2);
    w << 10.0, 1.0;
    const auto res = dissimilarity_general(d, D, w, 0.0);
    CHECK(res.lambda(0) < res.lambda(1));
    CHECK(res.lambda.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}
