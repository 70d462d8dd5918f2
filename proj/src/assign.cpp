#include "latrack/assign.hpp"

#include "latrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace latrack {

namespace {

// Potential-based shortest augmenting path solver; needs rows <= cols.
// Returns col index per row.
std::vector<int> solve_rows_leq_cols(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based; p[j] = row matched to column j, column 0 is virtual.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& costs) {
  if (costs.rows() == 0 || costs.cols() == 0) return {};
  if (!costs.allFinite()) {
    throw std::invalid_argument("hungarian: cost matrix must be finite");
  }

  std::vector<std::pair<int, int>> pairs;
  if (costs.rows() <= costs.cols()) {
    const std::vector<int> row_to_col = solve_rows_leq_cols(costs);
    for (int i = 0; i < static_cast<int>(row_to_col.size()); ++i) {
      pairs.emplace_back(i, row_to_col[i]);
    }
  } else {
    const std::vector<int> col_to_row = solve_rows_leq_cols(costs.transpose());
    for (int j = 0; j < static_cast<int>(col_to_row.size()); ++j) {
      pairs.emplace_back(col_to_row[j], j);
    }
    std::sort(pairs.begin(), pairs.end());
  }
  return pairs;
}

AssignmentResult gate_and_assign(const CostMatrix& costs, double c_max) {
  AssignmentResult result;
  const int rows = costs.rows();
  const int cols = costs.cols();

  std::vector<char> track_matched(rows, 0);
  std::vector<char> detection_matched(cols, 0);

  if (!costs.empty()) {
    // Any single sentinel exceeds the spread of every real assignment, so
    // the solver first minimizes how many gated cells it is forced onto.
    const double sentinel = static_cast<double>(rows + cols + 1);
    Eigen::MatrixXd solver_costs(rows, cols);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> blocked(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        blocked(i, j) = costs.gated(i, j) || costs.cost(i, j) > c_max;
        solver_costs(i, j) = blocked(i, j) ? sentinel : costs.cost(i, j);
      }
    }

    for (const auto& [i, j] : hungarian(solver_costs)) {
      if (blocked(i, j)) continue;  // forced onto a gated cell, drop it
      result.matches.push_back(Match{i, j, costs.cost(i, j)});
      track_matched[i] = 1;
      detection_matched[j] = 1;
    }
  }

  for (int i = 0; i < rows; ++i) {
    if (!track_matched[i]) result.unmatched_tracks.push_back(i);
  }
  for (int j = 0; j < cols; ++j) {
    if (!detection_matched[j]) result.unmatched_detections.push_back(j);
  }
  return result;
}

CostMatrix build_cost_matrix(const std::vector<Track>& tracks,
                             const std::vector<Detection>& detections,
                             const MlpModel& model, int window,
                             const FrameDimensions& frame, double c_max) {
  const int rows = static_cast<int>(tracks.size());
  const int cols = static_cast<int>(detections.size());
  if (rows == 0 || cols == 0) return CostMatrix(rows, cols);

  const int dim = window_feature_dim(window);
  if (model.input_dim != dim) {
    throw std::invalid_argument("build_cost_matrix: model expects " +
                                std::to_string(model.input_dim) + " inputs, window " +
                                std::to_string(window) + " produces " + std::to_string(dim));
  }

  const long descriptor_dim = tracks.front().newest().appearance.size();
  for (const Detection& det : detections) {
    if (!det.appearance.has_value()) {
      throw std::invalid_argument("build_cost_matrix: detection without appearance descriptor");
    }
    if (det.appearance->size() != descriptor_dim) {
      throw std::invalid_argument("build_cost_matrix: descriptor dimension mismatch");
    }
  }

  // Pair (i, j) lives in row i*cols + j of the batch.
  Eigen::MatrixXd batch(static_cast<long>(rows) * cols, dim);
  std::vector<double> row_buffer(static_cast<std::size_t>(dim));
  for (int i = 0; i < rows; ++i) {
    track_tail_features(tracks[i], window, frame, row_buffer.data() + kPairFeatureDim);
    for (int j = 0; j < cols; ++j) {
      pair_features(detections[j].box, *detections[j].appearance, tracks[i].newest(),
                    tracks[i].loss_counter, frame, row_buffer.data());
      batch.row(static_cast<long>(i) * cols + j) =
          Eigen::Map<const Eigen::RowVectorXd>(row_buffer.data(), dim);
    }
  }

  const Eigen::VectorXd costs = forward(model, batch);

  CostMatrix matrix(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double c = costs(static_cast<long>(i) * cols + j);
      matrix.set(i, j, c);
      if (c > c_max) matrix.set_gated(i, j);
    }
  }
  return matrix;
}

}  // namespace latrack
