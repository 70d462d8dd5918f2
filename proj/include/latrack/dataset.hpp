#pragma once

#include "latrack/core.hpp"
#include "latrack/mlp.hpp"
#include "latrack/tracker.hpp"

#include <cstdint>
#include <vector>

namespace latrack {

/// One annotated target state. The ordinal is the row index within its
/// frame in the source file and keys descriptor sidecars.
struct GroundTruthState {
  int frame = 0;
  BoundingBox box;
  Descriptor appearance;  // size 0 when no descriptor is attached
  int ordinal = -1;
};

struct GroundTruthTrack {
  int id = 0;
  std::vector<GroundTruthState> states;  // frames strictly increasing

  int first_frame() const { return states.front().frame; }
  int last_frame() const { return states.back().frame; }
};

/// A sampled association: a window history taken from one annotated track
/// plus a displaced candidate state. Label -1 means same identity,
/// +1 a different one.
struct AssociationExample {
  std::vector<TargetState> anchor;  // window-1 consecutive states, oldest first
  TargetState candidate;
  int displacement = 0;  // candidate.frame - anchor.back().frame, always >= 1
  double label = 0.0;
  int anchor_id = 0;
  int candidate_id = 0;
};

/// Samples `count` labeled associations from annotated tracks. Positives
/// take the candidate from the anchor's own track, negatives from another
/// track at a nearby frame; the share of positives lands within 1% of
/// positive_fraction (which may be 1 to request positives only). The
/// temporal displacement is drawn uniformly over the states available
/// strictly inside the anchor track's remaining span. Fully reproducible
/// from the seed.
std::vector<AssociationExample> sample_examples(const std::vector<GroundTruthTrack>& tracks,
                                                int window, long count,
                                                double positive_fraction, std::uint64_t seed);

/// Turns sampled associations into regression rows: the sliding-window
/// features of (anchor history, candidate) with the head-block staleness
/// set to displacement - 1, paired with the example's label.
LabeledDataset featurize_examples(const std::vector<AssociationExample>& examples,
                                  const FrameDimensions& frame);

struct SyntheticSpec {
  int target_count = 10;
  int frame_count = 600;
  double motion_sigma = 0.5;  // std of the per-frame motion and detector jitter, px
  double drop_rate = 0.0;     // per-detection miss probability
  double fp_rate = 0.0;       // expected clutter detections per target per frame
  double descriptor_separation = 1.0;  // 0 = identical target descriptors, 1 = independent
  std::uint64_t seed = 0;
  FrameDimensions frame{1920, 1080};
  int descriptor_dim = 16;
  double descriptor_noise = 0.05;  // per-frame descriptor rotation angle std, radians
};

/// A generated benchmark: ground truth, per-frame detections and, for each
/// detection, the id of the target it came from (0 for clutter).
struct SyntheticSequence {
  std::vector<GroundTruthTrack> tracks;
  std::vector<FrameDetections> frames;
  std::vector<std::vector<int>> source_ids;
  FrameDimensions frame;
};

/// Constant-velocity targets with truncated Gaussian jitter, bouncing off
/// the frame borders. Each target carries a persistent unit descriptor
/// perturbed a little every frame; detections are the ground-truth boxes
/// with jitter, thinned at drop_rate, plus random clutter at fp_rate.
/// Deterministic given the spec.
SyntheticSequence generate_synthetic_sequence(const SyntheticSpec& spec);

/// Seeded train/validation split, stratified by label so both parts keep
/// the dataset's class balance. Returns (train, validation).
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data,
                                                           double validation_fraction,
                                                           std::uint64_t seed);

}  // namespace latrack
