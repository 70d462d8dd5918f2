#pragma once

#include "latrack/core.hpp"

#include <Eigen/Dense>

#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace latrack::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline BoundingBox random_box(std::mt19937_64& rng) {
  return BoundingBox{uniform(rng, -200.0, 2000.0), uniform(rng, -200.0, 1200.0),
                     uniform(rng, 10.0, 300.0), uniform(rng, 0.2, 3.0)};
}

inline Descriptor unit_descriptor(std::mt19937_64& rng, int dim) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  Descriptor d(dim);
  for (int i = 0; i < dim; ++i) d(i) = normal(rng);
  d.normalize();
  return d;
}

inline TargetState make_state(const BoundingBox& box, const Descriptor& appearance, int frame) {
  return TargetState{box, appearance, frame};
}

inline Detection make_detection(int frame, const BoundingBox& box, const Descriptor& appearance,
                                double confidence = 1.0, int ordinal = 0) {
  Detection det;
  det.frame = frame;
  det.ordinal = ordinal;
  det.box = box;
  det.confidence = confidence;
  det.appearance = appearance;
  return det;
}

/// Exhaustive minimum-cost assignment over all injective row-to-column
/// maps; factorial oracle for the Hungarian solver, usable up to ~8x8.
/// The returned total re-sums the winning pairs in ascending row order so
/// it is bit-comparable with a solver total accumulated the same way.
inline double brute_force_assignment(const Eigen::MatrixXd& costs,
                                     std::vector<std::pair<int, int>>* best_pairs = nullptr) {
  const int rows = static_cast<int>(costs.rows());
  const int cols = static_cast<int>(costs.cols());
  if (rows == 0 || cols == 0) {
    if (best_pairs) best_pairs->clear();
    return 0.0;
  }

  const bool transpose = rows > cols;
  const int n = transpose ? cols : rows;
  const int m = transpose ? rows : cols;
  const auto at = [&](int i, int j) { return transpose ? costs(j, i) : costs(i, j); };

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> current(n, -1), chosen(n, -1);
  std::vector<char> used(m, 0);

  const auto recurse = [&](auto&& self, int row, double total) -> void {
    if (row == n) {
      if (total < best) {
        best = total;
        chosen = current;
      }
      return;
    }
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      current[row] = j;
      self(self, row + 1, total + at(row, j));
      used[j] = 0;
    }
  };
  recurse(recurse, 0, 0.0);

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    pairs.emplace_back(transpose ? chosen[i] : i, transpose ? i : chosen[i]);
  }
  std::sort(pairs.begin(), pairs.end());
  double canonical = 0.0;
  for (const auto& [i, j] : pairs) canonical += costs(i, j);
  if (best_pairs) *best_pairs = std::move(pairs);
  return canonical;
}

}  // namespace latrack::testing
