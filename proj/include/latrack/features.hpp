#pragma once

#include "latrack/core.hpp"

namespace latrack {

// One pairwise block: [u, v, h, r, du, dv, dh, dr, da, dt].
inline constexpr int kPairFeatureDim = 10;

/// 1 - cos(angle) between two descriptors, in [0, 2]. Throws for
/// mismatched dimensions or zero-norm inputs.
double cosine_distance(const Descriptor& a, const Descriptor& b);

/// Dimension of the sliding-window feature vector for a window of
/// `window` entities (one candidate plus window-1 track states).
inline int window_feature_dim(int window) { return kPairFeatureDim * (window - 1); }

/// Writes the pairwise feature block between a newer observation and an
/// older state into out[0..9]. The absolute part is the older element's
/// geometry, u and v normalized by frame width/height and h by frame
/// height; positional and height deltas are divided by the older height
/// so they stay scale free. `staleness` counts iterations the pair spans
/// beyond a consecutive-frame association.
void pair_features(const BoundingBox& newer_box, const Descriptor& newer_appearance,
                   const TargetState& older, double staleness,
                   const FrameDimensions& frame, double* out);

/// Convenience wrapper returning the 10-vector.
Eigen::VectorXd pair_features(const BoundingBox& newer_box,
                              const Descriptor& newer_appearance,
                              const TargetState& older, double staleness,
                              const FrameDimensions& frame);

/// Writes the history-only tail of the window vector (blocks 1..window-2,
/// 10*(window-2) values) into `out`. Consecutive history states are paired
/// newest first; their staleness is the gap between their frame indices
/// minus one. Tracks younger than the window are padded by replicating the
/// oldest available state with staleness zero, which zeroes every delta.
void track_tail_features(const Track& track, int window,
                         const FrameDimensions& frame, double* out);

/// Writes the full sliding-window vector for (track, candidate) into
/// out[0..10*(window-1)-1]: the candidate-vs-newest block (staleness =
/// the track's loss counter) followed by the history tail.
void window_features_into(const Track& track, const Detection& candidate,
                          int window, const FrameDimensions& frame, double* out);

/// Convenience wrapper returning the 10*(window-1) vector.
Eigen::VectorXd window_features(const Track& track, const Detection& candidate,
                                int window, const FrameDimensions& frame);

}  // namespace latrack
