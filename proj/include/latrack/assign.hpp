#pragma once

#include "latrack/core.hpp"
#include "latrack/mlp.hpp"

#include <utility>
#include <vector>

namespace latrack {

/// Track-by-detection cost table. Entries are model costs in [-1, 1];
/// gated cells keep their value but are excluded from assignment.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int rows, int cols)
      : rows_(rows),
        cols_(cols),
        costs_(Eigen::MatrixXd::Zero(rows, cols)),
        gated_(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, false)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double cost(int i, int j) const { return costs_(i, j); }
  bool gated(int i, int j) const { return gated_(i, j); }

  void set(int i, int j, double cost) { costs_(i, j) = cost; }
  void set_gated(int i, int j) { gated_(i, j) = true; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  Eigen::MatrixXd costs_;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> gated_;
};

struct Match {
  int track = 0;
  int detection = 0;
  double cost = 0.0;
};

/// Assignment outcome: matches plus the leftover index sets. Matches and
/// unmatched sets partition both index ranges.
struct AssignmentResult {
  std::vector<Match> matches;
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

/// Minimum-total-cost assignment of min(rows, cols) pairs on a rectangular
/// matrix of finite costs. Returns (row, col) pairs sorted by row.
std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& costs);

/// Substitutes gated cells (and any cell above c_max) with a large finite
/// sentinel, solves, then drops sentinel matches back into the unmatched
/// sets. No returned match ever costs more than c_max.
AssignmentResult gate_and_assign(const CostMatrix& costs, double c_max);

/// Evaluates the regressor on every (track, detection) pair in one batched
/// forward call and gates entries above c_max. History-only feature blocks
/// are computed once per track and shared across that row.
CostMatrix build_cost_matrix(const std::vector<Track>& tracks,
                             const std::vector<Detection>& detections,
                             const MlpModel& model, int window,
                             const FrameDimensions& frame, double c_max);

}  // namespace latrack
