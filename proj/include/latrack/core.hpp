#pragma once

#include <Eigen/Dense>

#include <deque>
#include <optional>
#include <stdexcept>

namespace latrack {

using Descriptor = Eigen::VectorXf;

/// Frame size in pixels; normalizes absolute box coordinates in the
/// feature extractor.
struct FrameDimensions {
  int width = 0;
  int height = 0;

  bool valid() const { return width > 0 && height > 0; }
};

/// Axis-aligned box in center parameterization: (u, v) center in pixels,
/// h height in pixels, r aspect ratio (width / height). Boxes may extend
/// past the frame borders; nothing clamps them.
struct BoundingBox {
  double u = 0.0;
  double v = 0.0;
  double h = 0.0;
  double r = 0.0;

  double width() const { return r * h; }
  bool valid() const { return h > 0.0 && r > 0.0; }
};

/// Corner box (left, top, width, height), the layout detection files use.
struct CornerBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// Converts a corner box to center parameterization.
/// Throws std::invalid_argument for non-positive width or height.
BoundingBox corner_to_state(double x, double y, double w, double h);

/// Exact inverse of corner_to_state.
CornerBox state_to_corner(const BoundingBox& box);

/// Intersection over union, in [0, 1]. Symmetric; 1 for identical boxes,
/// 0 for disjoint ones.
double iou(const BoundingBox& a, const BoundingBox& b);

/// One detector output on a single frame.
struct Detection {
  int frame = 0;    // 1-based frame index
  int ordinal = 0;  // row index within the frame in the source file
  BoundingBox box;
  double confidence = 0.0;  // in [0, 1]
  std::optional<Descriptor> appearance;
};

/// Observed state of a tracked target.
struct TargetState {
  BoundingBox box;
  Descriptor appearance;
  int frame = 0;  // frame the observation came from
};

// New tracks stay tentative for their first three tracking iterations;
// the third consecutive association (creation included) confirms them.
inline constexpr int kTentativeAge = 3;

/// A tracked target. Keeps a bounded ring of its most recent observed
/// states, oldest first and newest last; the oldest state is evicted
/// once the ring is full.
class Track {
 public:
  Track(int id, TargetState seed, std::size_t history_capacity)
      : loss_counter(0),
        hits(1),
        age(1),
        tentative(true),
        id_(id),
        capacity_(history_capacity) {
    if (id <= 0) throw std::invalid_argument("track id must be positive");
    if (capacity_ == 0) throw std::invalid_argument("history capacity must be positive");
    history_.push_back(std::move(seed));
  }

  /// Appends a newly associated observation, evicting the oldest state
  /// when the ring is at capacity.
  void push_state(TargetState state) {
    if (history_.size() == capacity_) history_.pop_front();
    history_.push_back(std::move(state));
  }

  int id() const { return id_; }
  const std::deque<TargetState>& history() const { return history_; }
  const TargetState& newest() const { return history_.back(); }
  const TargetState& oldest() const { return history_.front(); }

  int loss_counter;  // consecutive iterations without an association
  int hits;          // successful associations, creation included
  int age;           // tracking iterations participated in, creation included
  bool tentative;

 private:
  int id_;
  std::size_t capacity_;
  std::deque<TargetState> history_;
};

}  // namespace latrack
