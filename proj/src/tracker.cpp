#include "latrack/tracker.hpp"

#include <algorithm>

namespace latrack {

void TrackerConfig::validate() const {
  if (l_max < 1) throw std::invalid_argument("l_max must be at least 1");
  if (window < 2) throw std::invalid_argument("window must hold at least two entities");
  if (min_confidence < 0.0 || min_confidence > 1.0) {
    throw std::invalid_argument("min_confidence must lie in [0, 1]");
  }
  if (!frame.valid()) throw std::invalid_argument("frame dimensions must be positive");
}

CostMatrix ModelCostEstimator::estimate(const std::vector<Track>& tracks,
                                        const std::vector<Detection>& detections,
                                        const TrackerConfig& cfg) const {
  return build_cost_matrix(tracks, detections, *model_, cfg.window, cfg.frame, cfg.c_max);
}

CostMatrix FunctionCostEstimator::estimate(const std::vector<Track>& tracks,
                                           const std::vector<Detection>& detections,
                                           const TrackerConfig& cfg) const {
  CostMatrix matrix(static_cast<int>(tracks.size()), static_cast<int>(detections.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const double c = fn_(tracks[i], detections[j]);
      matrix.set(static_cast<int>(i), static_cast<int>(j), c);
      if (c > cfg.c_max) matrix.set_gated(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return matrix;
}

std::vector<OutputRecord> step(TrackerState& state, int frame_index,
                               const std::vector<Detection>& detections,
                               const CostEstimator& estimator, const TrackerConfig& cfg) {
  cfg.validate();
  state.iteration += 1;
  for (Track& track : state.tracks) track.age += 1;

  std::vector<Detection> retained;
  retained.reserve(detections.size());
  for (const Detection& det : detections) {
    if (det.frame != frame_index) {
      throw std::invalid_argument("step: detection frame does not match the current frame");
    }
    if (det.confidence < cfg.min_confidence) continue;
    if (!det.appearance.has_value()) {
      // No silent zero descriptors; the caller must attach one first.
      throw std::invalid_argument("step: detection without appearance descriptor");
    }
    retained.push_back(det);
  }

  AssignmentResult assignment;
  if (!state.tracks.empty() && !retained.empty()) {
    assignment = gate_and_assign(estimator.estimate(state.tracks, retained, cfg), cfg.c_max);
  } else {
    for (std::size_t i = 0; i < state.tracks.size(); ++i) {
      assignment.unmatched_tracks.push_back(static_cast<int>(i));
    }
    for (std::size_t j = 0; j < retained.size(); ++j) {
      assignment.unmatched_detections.push_back(static_cast<int>(j));
    }
  }

  for (const Match& match : assignment.matches) {
    Track& track = state.tracks[match.track];
    const Detection& det = retained[match.detection];
    track.push_state(TargetState{det.box, *det.appearance, det.frame});
    track.loss_counter = 0;
    track.hits += 1;
    if (track.tentative && track.hits >= kTentativeAge) track.tentative = false;
  }

  std::vector<char> dead(state.tracks.size(), 0);
  for (int index : assignment.unmatched_tracks) {
    Track& track = state.tracks[index];
    track.loss_counter += 1;
    if (track.tentative || track.loss_counter > cfg.l_max) dead[index] = 1;
  }
  if (!state.tracks.empty()) {
    std::size_t keep = 0;
    for (std::size_t i = 0; i < state.tracks.size(); ++i) {
      if (!dead[i]) {
        if (keep != i) state.tracks[keep] = std::move(state.tracks[i]);
        ++keep;
      }
    }
    state.tracks.erase(state.tracks.begin() + keep, state.tracks.end());
  }

  for (int index : assignment.unmatched_detections) {
    const Detection& det = retained[index];
    state.tracks.emplace_back(state.next_id++,
                              TargetState{det.box, *det.appearance, det.frame},
                              static_cast<std::size_t>(cfg.window));
  }

  std::vector<OutputRecord> records;
  for (const Track& track : state.tracks) {
    if (track.tentative) continue;
    records.push_back(OutputRecord{frame_index, track.id(), state_to_corner(track.newest().box)});
  }
  return records;
}

std::vector<OutputRecord> run_sequence(const std::vector<FrameDetections>& frames,
                                       const CostEstimator& estimator,
                                       const TrackerConfig& cfg) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame <= frames[i - 1].frame) {
      throw std::invalid_argument("run_sequence: frame indices must be strictly ascending");
    }
  }

  TrackerState state;
  std::vector<OutputRecord> records;
  if (frames.empty()) return records;

  static const std::vector<Detection> kNoDetections;
  std::size_t next_group = 0;
  for (int frame = frames.front().frame; frame <= frames.back().frame; ++frame) {
    const std::vector<Detection>* detections = &kNoDetections;
    if (next_group < frames.size() && frames[next_group].frame == frame) {
      detections = &frames[next_group].detections;
      ++next_group;
    }
    std::vector<OutputRecord> frame_records = step(state, frame, *detections, estimator, cfg);
    records.insert(records.end(), frame_records.begin(), frame_records.end());
  }
  return records;
}

}  // namespace latrack
