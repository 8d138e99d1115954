#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <deque>
#include <vector>

#include "krigcov/field.hpp"
#include "krigcov/grid.hpp"

namespace krigcov {

/// Spatio-temporal regressor z = (q1, q2, t). The step index may be
/// real-valued.
struct SpatioTemporalPoint {
  double q1 = 0.0;
  double q2 = 0.0;
  double t = 0.0;

  Eigen::Vector3d vec() const { return {q1, q2, t}; }
};

/// Separable Gaussian kernel parameters: spatial length scale sigma [m],
/// temporal length scale tau [steps], and the regularization weight beta on
/// the squared weight norm.
struct KernelParams {
  double sigma;
  double tau;
  double beta;

  KernelParams(double sigma_, double tau_, double beta_)
      : sigma(sigma_), tau(tau_), beta(beta_) {
    if (!(sigma > 0.0)) throw std::invalid_argument("KernelParams: sigma must be > 0");
    if (!(tau > 0.0)) throw std::invalid_argument("KernelParams: tau must be > 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("KernelParams: beta must be >= 0");
  }
};

struct Sample {
  SpatioTemporalPoint z;
  double cf;
};

/// Sliding window of the most recent L observation steps. Entries are kept
/// oldest step first and, within a step, in push order (agents by index), so
/// the flattened regressor/observation matrices follow the dataset layout
/// used by the predictor. Holds at most `agents` entries per step; when a new
/// step beyond the window opens, the oldest step is dropped.
class SampleBuffer {
 public:
  SampleBuffer(int window_steps, int agents);

  /// Append one observation. z.t must be >= the newest stored step time;
  /// a larger t opens a new step. cf must lie in [0, 1].
  void push(const SpatioTemporalPoint& z, double cf);

  int size() const { return static_cast<int>(samples_.size()); }
  bool empty() const { return samples_.empty(); }
  /// True once the window holds agents * window_steps samples.
  bool full() const { return size() == window_steps_ * agents_; }
  int window_steps() const { return window_steps_; }
  int agents() const { return agents_; }
  double newest_time() const;

  const std::deque<Sample>& entries() const { return samples_; }

  /// 3 x N regressor matrix, oldest step first.
  Eigen::Matrix3Xd regressor_matrix() const;
  /// 1 x N observation row, same ordering.
  Eigen::RowVectorXd observation_row() const;

 private:
  int window_steps_;
  int agents_;
  std::deque<Sample> samples_;
  std::deque<std::pair<double, int>> step_counts_;  // (time, entries in step)
};

double kernel(const SpatioTemporalPoint& a, const SpatioTemporalPoint& b,
              const KernelParams& kp);

/// N x N kernel Gram matrix of the buffer contents (symmetric, unit
/// diagonal, positive semidefinite).
Eigen::MatrixXd gram(const SampleBuffer& buf, const KernelParams& kp);

/// Kernel row between a query point and every buffer entry.
Eigen::RowVectorXd cross_kernel(const SpatioTemporalPoint& z,
                                const SampleBuffer& buf,
                                const KernelParams& kp);

/// Optimal kriging weights for one query: lambda minimizes the kernelized
/// dissimilarity objective subject to the sum-to-one constraint; J is the
/// objective value at the minimizer (>= 0 up to solver tolerance).
/// one_step_ahead records whether the query time lies strictly beyond the
/// newest buffer step (the intended forecasting use).
struct KrigingSolution {
  Eigen::VectorXd lambda;
  double J;
  bool one_step_ahead;
};

/// Shared state for solving many queries against one buffer snapshot: the
/// Gram-dependent system matrix is assembled and factorized once, then each
/// query costs one kernel row and one back-substitution.
class KrigingSystem {
 public:
  KrigingSystem(const SampleBuffer& buf, const KernelParams& kp);

  KrigingSolution solve(const SpatioTemporalPoint& z) const;
  /// Predicted value Y * lambda for a previously computed solution.
  double predict_from(const KrigingSolution& sol) const;

  int n() const { return n_; }
  double newest_time() const { return newest_t_; }
  const KernelParams& params() const { return kp_; }

 private:
  KernelParams kp_;
  int n_;
  double newest_t_;
  Eigen::Matrix3Xd regressors_;
  Eigen::RowVectorXd observations_;
  Eigen::MatrixXd quad_;  // H = 2 (beta I + K), ridge-free
  Eigen::PartialPivLU<Eigen::MatrixXd> kkt_lu_;  // bordered system factor

  Eigen::RowVectorXd kernel_row(const SpatioTemporalPoint& z) const;
};

KrigingSolution solve_weights(const SpatioTemporalPoint& z,
                              const SampleBuffer& buf, const KernelParams& kp);

struct Prediction {
  double cf_hat;
  double J;
  bool one_step_ahead;
};

/// One-step-ahead prediction at position q for step t_pred. The value is the
/// lambda-weighted average of the buffered observations and is not clamped.
Prediction predict(const Eigen::Vector2d& q, double t_pred,
                   const SampleBuffer& buf, const KernelParams& kp);

/// Dissimilarity of the prediction regressor evaluated at every cell center
/// for prediction step t_pred. Used as the importance function for coverage.
struct DissimilarityMap {
  MissionGrid grid;
  double t_pred;
  std::vector<double> values;

  DissimilarityMap(const MissionGrid& g, double t)
      : grid(g), t_pred(t), values(static_cast<size_t>(g.cells()), 0.0) {}

  double operator[](int lin) const { return values[static_cast<size_t>(lin)]; }
  double& operator[](int lin) { return values[static_cast<size_t>(lin)]; }

  GridScalarField as_field() const {
    GridScalarField f(grid);
    f.values = values;
    return f;
  }
};

DissimilarityMap dissimilarity_map(const MissionGrid& grid, double t_pred,
                                   const SampleBuffer& buf,
                                   const KernelParams& kp);

/// Whole-grid sweep producing both the prediction and the dissimilarity map
/// from one shared factorization (the per-cell solves are identical; only the
/// kernel row changes).
struct FieldPrediction {
  PredictionGrid prediction;
  DissimilarityMap dissimilarity;
};

FieldPrediction predict_field(const MissionGrid& grid, int t_pred,
                              const SampleBuffer& buf, const KernelParams& kp);

/// Coordinate-free dissimilarity of a vector d against the columns of D:
/// minimize (1-gamma) sum_i w_i lambda_i^2 + gamma sum_i |lambda_i| subject
/// to D lambda = d and sum lambda = 1. Throws "infeasible" when d lies
/// outside the affine hull of the columns.
struct GeneralDissimilarity {
  double J;
  Eigen::VectorXd lambda;
};

GeneralDissimilarity dissimilarity_general(const Eigen::VectorXd& d,
                                           const Eigen::MatrixXd& D,
                                           const Eigen::VectorXd& w,
                                           double gamma);

}  // namespace krigcov
