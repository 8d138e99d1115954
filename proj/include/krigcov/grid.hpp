#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <utility>
#include <vector>

namespace krigcov {

/// Uniform rectangular discretization of the mission space Q.
///
/// Cells are indexed (i, j) with i along q1 and j along q2; the linear index
/// is j * nx + i, matching one block-CSV row per j. Cell centers lie strictly
/// inside the bounds. Spatial integrals over Q are discrete sums over cell
/// centers weighted by the (uniform) cell area.
class MissionGrid {
 public:
  MissionGrid(double q1_min, double q1_max, double q2_min, double q2_max,
              int nx, int ny)
      : q1_min_(q1_min), q1_max_(q1_max), q2_min_(q2_min), q2_max_(q2_max),
        nx_(nx), ny_(ny) {
    if (!(q1_min < q1_max) || !(q2_min < q2_max))
      throw std::invalid_argument("MissionGrid: bounds must satisfy min < max");
    if (nx < 1 || ny < 1)
      throw std::invalid_argument("MissionGrid: cell counts must be >= 1");
  }

  double q1_min() const { return q1_min_; }
  double q1_max() const { return q1_max_; }
  double q2_min() const { return q2_min_; }
  double q2_max() const { return q2_max_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cells() const { return nx_ * ny_; }

  double dx() const { return (q1_max_ - q1_min_) / nx_; }
  double dy() const { return (q2_max_ - q2_min_) / ny_; }
  double cell_area() const { return dx() * dy(); }
  double area() const { return (q1_max_ - q1_min_) * (q2_max_ - q2_min_); }

  int linear_index(int i, int j) const { return j * nx_ + i; }
  std::pair<int, int> cell_of(int lin) const { return {lin % nx_, lin / nx_}; }

  Eigen::Vector2d cell_center(int i, int j) const {
    return {q1_min_ + (i + 0.5) * dx(), q2_min_ + (j + 0.5) * dy()};
  }
  Eigen::Vector2d cell_center(int lin) const {
    auto [i, j] = cell_of(lin);
    return cell_center(i, j);
  }

  /// Clamp a position onto the closed region Q.
  Eigen::Vector2d clamp(const Eigen::Vector2d& q) const {
    return {std::min(std::max(q.x(), q1_min_), q1_max_),
            std::min(std::max(q.y(), q2_min_), q2_max_)};
  }

  bool contains(const Eigen::Vector2d& q) const {
    return q.x() >= q1_min_ && q.x() <= q1_max_ && q.y() >= q2_min_ &&
           q.y() <= q2_max_;
  }

  /// Linear index of the cell whose center is nearest to q. Positions outside
  /// Q are clamped to the boundary first. Ties resolve to the lowest linear
  /// index (round half down on the continuous cell coordinate).
  int nearest_cell(const Eigen::Vector2d& q) const {
    const Eigen::Vector2d c = clamp(q);
    const double cx = (c.x() - q1_min_) / dx() - 0.5;
    const double cy = (c.y() - q2_min_) / dy() - 0.5;
    int i = static_cast<int>(std::ceil(cx - 0.5));
    int j = static_cast<int>(std::ceil(cy - 0.5));
    i = std::min(std::max(i, 0), nx_ - 1);
    j = std::min(std::max(j, 0), ny_ - 1);
    return linear_index(i, j);
  }

  bool same_shape(const MissionGrid& o) const {
    return q1_min_ == o.q1_min_ && q1_max_ == o.q1_max_ &&
           q2_min_ == o.q2_min_ && q2_max_ == o.q2_max_ && nx_ == o.nx_ &&
           ny_ == o.ny_;
  }

 private:
  double q1_min_, q1_max_, q2_min_, q2_max_;
  int nx_, ny_;
};

/// Scalar field sampled on grid cell centers (information maps, importance
/// maps, snapshots). Values are stored linearly, index j * nx + i.
struct GridScalarField {
  MissionGrid grid;
  std::vector<double> values;

  explicit GridScalarField(const MissionGrid& g, double fill = 0.0)
      : grid(g), values(static_cast<size_t>(g.cells()), fill) {}

  double operator[](int lin) const { return values[static_cast<size_t>(lin)]; }
  double& operator[](int lin) { return values[static_cast<size_t>(lin)]; }
  double at(int i, int j) const { return values[static_cast<size_t>(grid.linear_index(i, j))]; }
  double& at(int i, int j) { return values[static_cast<size_t>(grid.linear_index(i, j))]; }
};

}  // namespace krigcov
