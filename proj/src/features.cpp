#include "latrack/features.hpp"

#include <cmath>

namespace latrack {

double cosine_distance(const Descriptor& a, const Descriptor& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_distance: descriptor dimensions differ");
  }
  if (a.size() == 0) {
    throw std::invalid_argument("cosine_distance: empty descriptors");
  }
  const double na = a.cast<double>().norm();
  const double nb = b.cast<double>().norm();
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine_distance: degenerate zero-norm descriptor");
  }
  const double cosine = a.cast<double>().dot(b.cast<double>()) / (na * nb);
  // Guard against rounding pushing the result a hair outside [0, 2].
  return std::min(2.0, std::max(0.0, 1.0 - cosine));
}

void pair_features(const BoundingBox& newer_box, const Descriptor& newer_appearance,
                   const TargetState& older, double staleness,
                   const FrameDimensions& frame, double* out) {
  if (!frame.valid()) throw std::invalid_argument("pair_features: invalid frame dimensions");
  if (!newer_box.valid() || !older.box.valid()) {
    throw std::invalid_argument("pair_features: invalid box");
  }
  if (newer_appearance.size() == 0 || older.appearance.size() == 0) {
    throw std::invalid_argument("pair_features: missing appearance descriptor");
  }

  const BoundingBox& ob = older.box;
  out[0] = ob.u / frame.width;
  out[1] = ob.v / frame.height;
  out[2] = ob.h / frame.height;
  out[3] = ob.r;
  out[4] = (newer_box.u - ob.u) / ob.h;
  out[5] = (newer_box.v - ob.v) / ob.h;
  out[6] = (newer_box.h - ob.h) / ob.h;
  out[7] = newer_box.r - ob.r;
  out[8] = cosine_distance(newer_appearance, older.appearance);
  out[9] = staleness;
}

Eigen::VectorXd pair_features(const BoundingBox& newer_box,
                              const Descriptor& newer_appearance,
                              const TargetState& older, double staleness,
                              const FrameDimensions& frame) {
  Eigen::VectorXd f(kPairFeatureDim);
  pair_features(newer_box, newer_appearance, older, staleness, frame, f.data());
  return f;
}

void track_tail_features(const Track& track, int window,
                         const FrameDimensions& frame, double* out) {
  if (window < 2) throw std::invalid_argument("window must hold at least two entities");
  const auto& history = track.history();
  if (history.empty()) throw std::invalid_argument("track history is empty");

  const int newest = static_cast<int>(history.size()) - 1;
  for (int block = 1; block <= window - 2; ++block) {
    const int newer_idx = newest - (block - 1);
    const int older_idx = newer_idx - 1;
    double* dst = out + (block - 1) * kPairFeatureDim;
    if (older_idx >= 0) {
      const TargetState& newer = history[newer_idx];
      const TargetState& older = history[older_idx];
      const double staleness = newer.frame - older.frame - 1;
      pair_features(newer.box, newer.appearance, older, staleness, frame, dst);
    } else {
      // Pad with a self-pair of the oldest state: all deltas zero.
      const TargetState& oldest = history.front();
      pair_features(oldest.box, oldest.appearance, oldest, 0.0, frame, dst);
    }
  }
}

void window_features_into(const Track& track, const Detection& candidate,
                          int window, const FrameDimensions& frame, double* out) {
  if (window < 2) throw std::invalid_argument("window must hold at least two entities");
  if (!candidate.appearance.has_value()) {
    throw std::invalid_argument("window_features: detection has no appearance descriptor");
  }
  pair_features(candidate.box, *candidate.appearance, track.newest(),
                track.loss_counter, frame, out);
  track_tail_features(track, window, frame, out + kPairFeatureDim);
}

Eigen::VectorXd window_features(const Track& track, const Detection& candidate,
                                int window, const FrameDimensions& frame) {
  Eigen::VectorXd g(window_feature_dim(window));
  window_features_into(track, candidate, window, frame, g.data());
  return g;
}

}  // namespace latrack
