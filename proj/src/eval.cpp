#include "latrack/eval.hpp"

#include "latrack/assign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

namespace latrack {

FrameCounts match_frame(const std::vector<IdBox>& gt, const std::vector<IdBox>& hyp,
                        MatchState& state, double iou_threshold) {
  FrameCounts counts;

  // Deterministic tie handling: process both sides in ascending id order.
  std::vector<IdBox> gt_sorted = gt;
  std::vector<IdBox> hyp_sorted = hyp;
  std::sort(gt_sorted.begin(), gt_sorted.end(), [](const IdBox& a, const IdBox& b) { return a.id < b.id; });
  std::sort(hyp_sorted.begin(), hyp_sorted.end(), [](const IdBox& a, const IdBox& b) { return a.id < b.id; });

  std::vector<char> gt_done(gt_sorted.size(), 0);
  std::vector<char> hyp_done(hyp_sorted.size(), 0);

  const auto record_match = [&](std::size_t gi, std::size_t hi, double overlap) {
    gt_done[gi] = 1;
    hyp_done[hi] = 1;
    counts.matched += 1;
    counts.iou_sum += overlap;
    const int gt_id = gt_sorted[gi].id;
    const int hyp_id = hyp_sorted[hi].id;
    counts.correspondences[gt_id] = hyp_id;
    const auto last = state.last_matched.find(gt_id);
    if (last != state.last_matched.end() && last->second != hyp_id) counts.idsw += 1;
    state.last_matched[gt_id] = hyp_id;
  };

  // Keep the previous frame's pairings while they still overlap enough.
  for (std::size_t gi = 0; gi < gt_sorted.size(); ++gi) {
    const auto prior = state.active.find(gt_sorted[gi].id);
    if (prior == state.active.end()) continue;
    for (std::size_t hi = 0; hi < hyp_sorted.size(); ++hi) {
      if (hyp_done[hi] || hyp_sorted[hi].id != prior->second) continue;
      const double overlap = iou(gt_sorted[gi].box, hyp_sorted[hi].box);
      if (overlap >= iou_threshold) record_match(gi, hi, overlap);
      break;
    }
  }

  // Assign the rest by minimum 1 - IoU, forbidding pairs under the threshold.
  std::vector<std::size_t> free_gt, free_hyp;
  for (std::size_t gi = 0; gi < gt_sorted.size(); ++gi) {
    if (!gt_done[gi]) free_gt.push_back(gi);
  }
  for (std::size_t hi = 0; hi < hyp_sorted.size(); ++hi) {
    if (!hyp_done[hi]) free_hyp.push_back(hi);
  }
  if (!free_gt.empty() && !free_hyp.empty()) {
    const double forbidden = static_cast<double>(free_gt.size() + free_hyp.size() + 1);
    Eigen::MatrixXd costs(free_gt.size(), free_hyp.size());
    Eigen::MatrixXd overlaps(free_gt.size(), free_hyp.size());
    for (std::size_t a = 0; a < free_gt.size(); ++a) {
      for (std::size_t b = 0; b < free_hyp.size(); ++b) {
        const double overlap = iou(gt_sorted[free_gt[a]].box, hyp_sorted[free_hyp[b]].box);
        overlaps(a, b) = overlap;
        costs(a, b) = overlap >= iou_threshold ? 1.0 - overlap : forbidden;
      }
    }
    for (const auto& [a, b] : hungarian(costs)) {
      if (costs(a, b) >= forbidden) continue;
      record_match(free_gt[a], free_hyp[b], overlaps(a, b));
    }
  }

  counts.fn = static_cast<long>(gt_sorted.size()) - counts.matched;
  counts.fp = static_cast<long>(hyp_sorted.size()) - counts.matched;
  state.active = counts.correspondences;
  return counts;
}

EvalReport evaluate(const std::vector<GroundTruthTrack>& gt,
                    const std::vector<OutputRecord>& results, double iou_threshold) {
  std::map<int, std::vector<IdBox>> gt_frames;
  std::map<int, long> gt_span;
  for (const GroundTruthTrack& track : gt) {
    for (const GroundTruthState& s : track.states) {
      gt_frames[s.frame].push_back(IdBox{track.id, s.box});
      gt_span[track.id] += 1;
    }
  }

  std::map<int, std::vector<IdBox>> hyp_frames;
  std::set<std::pair<int, int>> seen;
  for (const OutputRecord& record : results) {
    if (!seen.insert({record.frame, record.id}).second) {
      throw std::invalid_argument("evaluate: duplicate result row for frame " +
                                  std::to_string(record.frame) + ", id " +
                                  std::to_string(record.id));
    }
    hyp_frames[record.frame].push_back(
        IdBox{record.id, corner_to_state(record.box.x, record.box.y, record.box.w, record.box.h)});
  }

  std::set<int> all_frames;
  for (const auto& [frame, boxes] : gt_frames) all_frames.insert(frame);
  for (const auto& [frame, boxes] : hyp_frames) all_frames.insert(frame);

  EvalReport report;
  MatchState state;
  std::map<int, long> matched_count;
  std::map<int, char> in_gap, ever_matched;
  static const std::vector<IdBox> kEmpty;

  for (int frame : all_frames) {
    const auto git = gt_frames.find(frame);
    const auto hit = hyp_frames.find(frame);
    const std::vector<IdBox>& gt_boxes = git != gt_frames.end() ? git->second : kEmpty;
    const std::vector<IdBox>& hyp_boxes = hit != hyp_frames.end() ? hit->second : kEmpty;

    const FrameCounts counts = match_frame(gt_boxes, hyp_boxes, state, iou_threshold);
    report.fp += counts.fp;
    report.fn += counts.fn;
    report.idsw += counts.idsw;
    report.matches += counts.matched;
    report.motp += counts.iou_sum;

    // Fragmentations: a trajectory resuming after a covered-then-lost gap.
    for (const IdBox& box : gt_boxes) {
      const bool matched = counts.correspondences.count(box.id) > 0;
      if (matched) {
        if (in_gap[box.id]) report.fm += 1;
        in_gap[box.id] = 0;
        ever_matched[box.id] = 1;
        matched_count[box.id] += 1;
      } else if (ever_matched[box.id]) {
        in_gap[box.id] = 1;
      }
    }
  }

  report.gt = 0;
  for (const auto& [id, span] : gt_span) report.gt += span;
  report.motp = report.matches > 0 ? report.motp / static_cast<double>(report.matches) : 0.0;
  report.mota = report.gt > 0
                    ? 1.0 - static_cast<double>(report.fn + report.fp + report.idsw) /
                                static_cast<double>(report.gt)
                    : 0.0;

  report.trajectories = static_cast<long>(gt_span.size());
  long mostly_tracked = 0, mostly_lost = 0;
  for (const auto& [id, span] : gt_span) {
    const double coverage = static_cast<double>(matched_count[id]) / static_cast<double>(span);
    if (coverage >= 0.8) mostly_tracked += 1;
    if (coverage <= 0.2) mostly_lost += 1;
  }
  if (!gt_span.empty()) {
    report.mt = static_cast<double>(mostly_tracked) / static_cast<double>(gt_span.size());
    report.ml = static_cast<double>(mostly_lost) / static_cast<double>(gt_span.size());
  }
  return report;
}

ThroughputStats measure_throughput(long frame_count, int repetitions,
                                   const std::function<void()>& tracking_run) {
  ThroughputStats stats;
  const int reps = std::max(3, repetitions);
  if (frame_count <= 0) {
    stats.runs_hz.assign(reps, 0.0);
    return stats;
  }

  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    tracking_run();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    stats.runs_hz.push_back(static_cast<double>(frame_count) /
                            std::max(elapsed.count(), 1e-9));
  }

  double sum = 0.0;
  for (double hz : stats.runs_hz) sum += hz;
  stats.mean_hz = sum / stats.runs_hz.size();
  double var = 0.0;
  for (double hz : stats.runs_hz) var += (hz - stats.mean_hz) * (hz - stats.mean_hz);
  stats.std_hz = stats.runs_hz.size() > 1
                     ? std::sqrt(var / static_cast<double>(stats.runs_hz.size() - 1))
                     : 0.0;
  return stats;
}

}  // namespace latrack
