#pragma once

#include "latrack/core.hpp"
#include "latrack/dataset.hpp"
#include "latrack/tracker.hpp"

#include <functional>
#include <map>
#include <vector>

namespace latrack {

/// CLEAR-MOT summary of one sequence. The accuracy identity
/// mota = 1 - (fn + fp + idsw) / gt holds exactly (and may go negative);
/// motp is the mean IoU of matched pairs, higher is better.
struct EvalReport {
  double mota = 0.0;
  double motp = 0.0;
  double mt = 0.0;  // fraction of trajectories covered >= 80% of their span
  double ml = 0.0;  // fraction covered <= 20%
  long idsw = 0;
  long fm = 0;
  long fp = 0;
  long fn = 0;
  long gt = 0;           // total ground-truth boxes
  long matches = 0;      // total matched pairs
  long trajectories = 0; // ground-truth trajectory count
  double hz = 0.0;       // tracking-only throughput, when measured
};

struct IdBox {
  int id = 0;
  BoundingBox box;
};

/// Correspondence memory carried across frames: pairings still active
/// from the previous frame, plus each ground truth's most recent matched
/// hypothesis for switch counting.
struct MatchState {
  std::map<int, int> active;
  std::map<int, int> last_matched;
};

struct FrameCounts {
  long matched = 0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  double iou_sum = 0.0;
  std::map<int, int> correspondences;  // gt id -> hyp id this frame
};

/// Matches one frame: pairings surviving from the previous frame are kept
/// when their IoU still clears the threshold, the remainder is solved by
/// minimum-cost assignment on 1 - IoU restricted to IoU >= threshold.
/// A switch is counted when a ground truth's matched hypothesis id differs
/// from the one at its most recent matched frame.
FrameCounts match_frame(const std::vector<IdBox>& gt, const std::vector<IdBox>& hyp,
                        MatchState& state, double iou_threshold);

/// Scores tracking output against annotated tracks. Throws on duplicate
/// (frame, id) result rows.
EvalReport evaluate(const std::vector<GroundTruthTrack>& gt,
                    const std::vector<OutputRecord>& results, double iou_threshold);

struct ThroughputStats {
  double mean_hz = 0.0;
  double std_hz = 0.0;
  std::vector<double> runs_hz;
};

/// Wall-clock throughput of `tracking_run` in processed frames per second,
/// repeated `repetitions` times (at least 3). Descriptor extraction must
/// happen before the closure so only the tracking loop is timed. An empty
/// sequence reports 0 Hz.
ThroughputStats measure_throughput(long frame_count, int repetitions,
                                   const std::function<void()>& tracking_run);

}  // namespace latrack
