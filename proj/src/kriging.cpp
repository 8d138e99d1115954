#include "krigcov/kriging.hpp"

#include <Eigen/QR>

#include <cmath>
#include <sstream>

#include "krigcov/parallel.hpp"

namespace krigcov {
namespace {

constexpr double kRcondFloor = 1e-14;
constexpr double kConstraintTol = 1e-9;

bool finite(const SpatioTemporalPoint& z) {
  return std::isfinite(z.q1) && std::isfinite(z.q2) && std::isfinite(z.t);
}

}  // namespace

SampleBuffer::SampleBuffer(int window_steps, int agents)
    : window_steps_(window_steps), agents_(agents) {
  if (window_steps < 1) throw std::invalid_argument("SampleBuffer: window must be >= 1 step");
  if (agents < 1) throw std::invalid_argument("SampleBuffer: agents must be >= 1");
}

void SampleBuffer::push(const SpatioTemporalPoint& z, double cf) {
  if (!finite(z)) throw std::invalid_argument("SampleBuffer::push: non-finite point");
  if (!(cf >= 0.0 && cf <= 1.0))
    throw std::invalid_argument("SampleBuffer::push: cf outside [0,1]");
  if (step_counts_.empty() || z.t > step_counts_.back().first) {
    step_counts_.emplace_back(z.t, 0);
    if (static_cast<int>(step_counts_.size()) > window_steps_) {
      const int drop = step_counts_.front().second;
      step_counts_.pop_front();
      samples_.erase(samples_.begin(), samples_.begin() + drop);
    }
  } else if (z.t < step_counts_.back().first) {
    throw std::invalid_argument("SampleBuffer::push: out-of-order step time");
  }
  auto& [time, count] = step_counts_.back();
  if (count == agents_)
    throw std::invalid_argument("SampleBuffer::push: more than n entries for one step");
  ++count;
  samples_.push_back({z, cf});
}

double SampleBuffer::newest_time() const {
  if (step_counts_.empty()) throw std::logic_error("SampleBuffer: empty");
  return step_counts_.back().first;
}

Eigen::Matrix3Xd SampleBuffer::regressor_matrix() const {
  Eigen::Matrix3Xd Z(3, size());
  for (int i = 0; i < size(); ++i) Z.col(i) = samples_[static_cast<size_t>(i)].z.vec();
  return Z;
}

Eigen::RowVectorXd SampleBuffer::observation_row() const {
  Eigen::RowVectorXd Y(size());
  for (int i = 0; i < size(); ++i) Y(i) = samples_[static_cast<size_t>(i)].cf;
  return Y;
}

double kernel(const SpatioTemporalPoint& a, const SpatioTemporalPoint& b,
              const KernelParams& kp) {
  const double dq1 = a.q1 - b.q1;
  const double dq2 = a.q2 - b.q2;
  const double dt = a.t - b.t;
  const double spatial = std::exp(-(dq1 * dq1 + dq2 * dq2) / (2.0 * kp.sigma * kp.sigma));
  const double temporal = std::exp(-(dt * dt) / (2.0 * kp.tau * kp.tau));
  return spatial * temporal;
}

Eigen::MatrixXd gram(const SampleBuffer& buf, const KernelParams& kp) {
  if (buf.empty()) throw std::invalid_argument("gram: empty sample buffer");
  const auto& entries = buf.entries();
  const int n = buf.size();
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = kernel(entries[static_cast<size_t>(i)].z,
                              entries[static_cast<size_t>(j)].z, kp);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::RowVectorXd cross_kernel(const SpatioTemporalPoint& z,
                                const SampleBuffer& buf, const KernelParams& kp) {
  if (buf.empty()) throw std::invalid_argument("cross_kernel: empty sample buffer");
  const auto& entries = buf.entries();
  Eigen::RowVectorXd row(buf.size());
  for (int i = 0; i < buf.size(); ++i)
    row(i) = kernel(z, entries[static_cast<size_t>(i)].z, kp);
  return row;
}

KrigingSystem::KrigingSystem(const SampleBuffer& buf, const KernelParams& kp)
    : kp_(kp), n_(buf.size()), newest_t_(buf.newest_time()),
      regressors_(buf.regressor_matrix()), observations_(buf.observation_row()) {
  const Eigen::MatrixXd K = gram(buf, kp);
  quad_ = 2.0 * (kp.beta * Eigen::MatrixXd::Identity(n_, n_) + K);

  // Bordered KKT system [H 1; 1' 0]; factorized once per buffer snapshot.
  Eigen::MatrixXd bordered(n_ + 1, n_ + 1);
  bordered.topLeftCorner(n_, n_) = quad_;
  bordered.topRightCorner(n_, 1).setOnes();
  bordered.bottomLeftCorner(1, n_).setOnes();
  bordered(n_, n_) = 0.0;

  kkt_lu_.compute(bordered);
  if (kkt_lu_.rcond() < kRcondFloor) {
    // Duplicated samples make the Gram singular; retry with a tiny ridge.
    const double ridge = 1e-10 * quad_.trace() / n_;
    bordered.topLeftCorner(n_, n_) += ridge * Eigen::MatrixXd::Identity(n_, n_);
    kkt_lu_.compute(bordered);
    if (kkt_lu_.rcond() < kRcondFloor) {
      std::ostringstream msg;
      msg << "kriging KKT system singular beyond ridge fallback (rcond="
          << kkt_lu_.rcond() << ", N=" << n_ << ")";
      throw std::runtime_error(msg.str());
    }
  }
}

Eigen::RowVectorXd KrigingSystem::kernel_row(const SpatioTemporalPoint& z) const {
  Eigen::RowVectorXd row(n_);
  const double inv_s2 = 1.0 / (2.0 * kp_.sigma * kp_.sigma);
  const double inv_t2 = 1.0 / (2.0 * kp_.tau * kp_.tau);
  for (int i = 0; i < n_; ++i) {
    const double dq1 = z.q1 - regressors_(0, i);
    const double dq2 = z.q2 - regressors_(1, i);
    const double dt = z.t - regressors_(2, i);
    row(i) = std::exp(-(dq1 * dq1 + dq2 * dq2) * inv_s2) * std::exp(-dt * dt * inv_t2);
  }
  return row;
}

KrigingSolution KrigingSystem::solve(const SpatioTemporalPoint& z) const {
  const Eigen::RowVectorXd k_star = kernel_row(z);
  Eigen::VectorXd rhs(n_ + 1);
  rhs.head(n_) = 2.0 * k_star.transpose();  // -f
  rhs(n_) = 1.0;
  const Eigen::VectorXd sol = kkt_lu_.solve(rhs);
  Eigen::VectorXd lambda = sol.head(n_);

  const double residual = std::abs(lambda.sum() - 1.0);
  if (!(residual <= kConstraintTol)) {
    std::ostringstream msg;
    msg << "kriging solve lost the sum-to-one constraint (residual=" << residual
        << ", rcond=" << kkt_lu_.rcond() << ")";
    throw std::runtime_error(msg.str());
  }

  // Objective value at the minimizer, with the ridge-free quadratic term.
  const double J = 0.5 * lambda.dot(quad_ * lambda) - 2.0 * k_star.dot(lambda) + 1.0;
  return {std::move(lambda), J, z.t > newest_t_};
}

double KrigingSystem::predict_from(const KrigingSolution& sol) const {
  return (observations_ * sol.lambda).value();
}

KrigingSolution solve_weights(const SpatioTemporalPoint& z,
                              const SampleBuffer& buf, const KernelParams& kp) {
  return KrigingSystem(buf, kp).solve(z);
}

Prediction predict(const Eigen::Vector2d& q, double t_pred,
                   const SampleBuffer& buf, const KernelParams& kp) {
  const KrigingSystem sys(buf, kp);
  const KrigingSolution sol = sys.solve({q.x(), q.y(), t_pred});
  return {sys.predict_from(sol), sol.J, sol.one_step_ahead};
}

DissimilarityMap dissimilarity_map(const MissionGrid& grid, double t_pred,
                                   const SampleBuffer& buf, const KernelParams& kp) {
  const KrigingSystem sys(buf, kp);
  DissimilarityMap map(grid, t_pred);
  parallel_for(0, grid.cells(), [&](int begin, int end) {
    for (int lin = begin; lin < end; ++lin) {
      const Eigen::Vector2d q = grid.cell_center(lin);
      map[lin] = sys.solve({q.x(), q.y(), t_pred}).J;
    }
  });
  return map;
}

FieldPrediction predict_field(const MissionGrid& grid, int t_pred,
                              const SampleBuffer& buf, const KernelParams& kp) {
  const KrigingSystem sys(buf, kp);
  FieldPrediction out{PredictionGrid(grid, t_pred),
                      DissimilarityMap(grid, static_cast<double>(t_pred))};
  parallel_for(0, grid.cells(), [&](int begin, int end) {
    for (int lin = begin; lin < end; ++lin) {
      const Eigen::Vector2d q = grid.cell_center(lin);
      const KrigingSolution sol = sys.solve({q.x(), q.y(), static_cast<double>(t_pred)});
      out.prediction[lin] = sys.predict_from(sol);
      out.dissimilarity[lin] = sol.J;
    }
  });
  return out;
}

namespace {

// Equality-constrained weighted least-norm subproblem of the general
// dissimilarity: minimize sum_i c2_i x_i^2 + c1' x subject to A x = b with x
// restricted to the `free_set` columns. Solved through the bordered KKT
// system with a complete orthogonal decomposition so redundant constraint
// rows are tolerated. Returns x (full size, zeros on fixed entries) and the
// constraint multipliers.
struct SubproblemResult {
  Eigen::VectorXd x;
  Eigen::VectorXd nu;
};

SubproblemResult solve_equality_subproblem(const Eigen::VectorXd& c2,
                                           const Eigen::VectorXd& c1,
                                           const Eigen::MatrixXd& A,
                                           const Eigen::VectorXd& b,
                                           const std::vector<int>& free_set) {
  const int nf = static_cast<int>(free_set.size());
  const int m = static_cast<int>(A.rows());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + m, nf + m);
  Eigen::VectorXd rhs(nf + m);
  for (int a = 0; a < nf; ++a) {
    kkt(a, a) = 2.0 * c2(free_set[static_cast<size_t>(a)]);
    kkt.block(nf, a, m, 1) = A.col(free_set[static_cast<size_t>(a)]);
    kkt.block(a, nf, 1, m) = A.col(free_set[static_cast<size_t>(a)]).transpose();
    rhs(a) = -c1(free_set[static_cast<size_t>(a)]);
  }
  rhs.tail(m) = b;
  const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  SubproblemResult res{Eigen::VectorXd::Zero(c2.size()), sol.tail(m)};
  for (int a = 0; a < nf; ++a) res.x(free_set[static_cast<size_t>(a)]) = sol(a);
  return res;
}

}  // namespace

GeneralDissimilarity dissimilarity_general(const Eigen::VectorXd& d,
                                           const Eigen::MatrixXd& D,
                                           const Eigen::VectorXd& w,
                                           double gamma) {
  const int n = static_cast<int>(D.cols());
  if (n < 1) throw std::invalid_argument("dissimilarity_general: empty dataset");
  if (D.rows() != d.size())
    throw std::invalid_argument("dissimilarity_general: dimension mismatch");
  if (w.size() != n) throw std::invalid_argument("dissimilarity_general: weight count mismatch");
  if ((w.array() <= 0.0).any())
    throw std::invalid_argument("dissimilarity_general: weights must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("dissimilarity_general: gamma must lie in [0, 1)");

  const int m = static_cast<int>(D.rows()) + 1;
  Eigen::MatrixXd A(m, n);
  A.topRows(m - 1) = D;
  A.bottomRows(1).setOnes();
  Eigen::VectorXd b(m);
  b.head(m - 1) = d;
  b(m - 1) = 1.0;

  // Quadratic-only solve; also the feasibility check and the gamma > 0 start.
  std::vector<int> all(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
  const Eigen::VectorXd c2q = (1.0 - gamma) * w;
  const SubproblemResult base =
      solve_equality_subproblem(c2q, Eigen::VectorXd::Zero(n), A, b, all);
  if ((A * base.x - b).norm() > 1e-8 * (1.0 + b.norm()))
    throw std::runtime_error("dissimilarity_general: infeasible (d outside the affine hull of D)");

  auto objective = [&](const Eigen::VectorXd& lam) {
    return (1.0 - gamma) * (w.array() * lam.array().square()).sum() +
           gamma * lam.array().abs().sum();
  };
  if (gamma == 0.0) return {objective(base.x), base.x};

  // l1 part: split lambda = pos - neg and run a primal active-set loop on the
  // nonnegative QP. At most one member of each (pos_i, neg_i) pair is ever
  // free, which keeps every subproblem strictly convex and diagonal.
  const int nn = 2 * n;
  Eigen::VectorXd c2(nn), c1(nn);
  c2.head(n) = c2q;
  c2.tail(n) = c2q;
  c1.setConstant(gamma);
  Eigen::MatrixXd As(m, nn);
  As.leftCols(n) = A;
  As.rightCols(n) = -A;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(nn);
  for (int i = 0; i < n; ++i) {
    x(i) = std::max(base.x(i), 0.0);
    x(n + i) = std::max(-base.x(i), 0.0);
  }
  std::vector<char> is_free(static_cast<size_t>(nn), 0);
  for (int i = 0; i < nn; ++i) is_free[static_cast<size_t>(i)] = x(i) > 0.0 ? 1 : 0;

  auto free_list = [&] {
    std::vector<int> f;
    for (int i = 0; i < nn; ++i)
      if (is_free[static_cast<size_t>(i)]) f.push_back(i);
    return f;
  };
  auto pair_of = [n](int i) { return i < n ? i + n : i - n; };

  const int max_iter = 100 + 20 * nn;
  for (int iter = 0; iter < max_iter; ++iter) {
    const std::vector<int> free_set = free_list();
    const SubproblemResult sub = solve_equality_subproblem(c2, c1, As, b, free_set);

    // Step toward the subproblem optimum, stopping at the first bound.
    double alpha = 1.0;
    int blocking = -1;
    for (int i : free_set) {
      const double delta = sub.x(i) - x(i);
      if (delta < -1e-15 && x(i) > 0.0) {
        const double a = x(i) / -delta;
        if (a < alpha - 1e-15) {
          alpha = a;
          blocking = i;
        }
      } else if (sub.x(i) < -1e-12 && x(i) <= 0.0) {
        alpha = 0.0;
        blocking = i;
        break;
      }
    }
    for (int i : free_set) x(i) += alpha * (sub.x(i) - x(i));
    if (blocking >= 0) {
      x(blocking) = 0.0;
      is_free[static_cast<size_t>(blocking)] = 0;
      continue;
    }

    // At the subproblem optimum: check multipliers of the fixed variables.
    Eigen::VectorXd grad = (2.0 * c2.array() * x.array()).matrix() + c1 +
                           As.transpose() * sub.nu;
    int worst = -1;
    double worst_mu = -1e-10;
    for (int i = 0; i < nn; ++i) {
      if (is_free[static_cast<size_t>(i)]) continue;
      if (grad(i) < worst_mu) {
        worst_mu = grad(i);
        worst = i;
      }
    }
    if (worst < 0) {
      const Eigen::VectorXd lambda = x.head(n) - x.tail(n);
      return {objective(lambda), lambda};
    }
    const int partner = pair_of(worst);
    if (is_free[static_cast<size_t>(partner)]) {
      // Degenerate pair: the partner must sit at zero; park it first.
      x(partner) = 0.0;
      is_free[static_cast<size_t>(partner)] = 0;
    }
    is_free[static_cast<size_t>(worst)] = 1;
  }
  throw std::runtime_error("dissimilarity_general: active-set loop failed to converge");
}

}  // namespace krigcov
