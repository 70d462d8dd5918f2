#pragma once

#include "latrack/assign.hpp"
#include "latrack/core.hpp"

#include <functional>
#include <vector>

namespace latrack {

struct TrackerConfig {
  int l_max = 3;                // loss-counter threshold for deletion
  double c_max = 0.0;           // association cost gate
  int window = 5;               // entities per sliding window
  double min_confidence = 0.3;  // detection confidence gate
  FrameDimensions frame;

  void validate() const;
};

/// Produces the gated track-by-detection cost table for one frame. Lets
/// tests and oracles stand in for the learned model. Implementations must
/// be safe to call concurrently from independent sequences.
class CostEstimator {
 public:
  virtual ~CostEstimator() = default;
  virtual CostMatrix estimate(const std::vector<Track>& tracks,
                              const std::vector<Detection>& detections,
                              const TrackerConfig& cfg) const = 0;
};

/// Batched regression-model estimator used by the real pipeline.
class ModelCostEstimator final : public CostEstimator {
 public:
  explicit ModelCostEstimator(const MlpModel& model) : model_(&model) {}

  CostMatrix estimate(const std::vector<Track>& tracks,
                      const std::vector<Detection>& detections,
                      const TrackerConfig& cfg) const override;

 private:
  const MlpModel* model_;
};

/// Wraps a per-pair cost function; handy for injecting oracles in tests.
class FunctionCostEstimator final : public CostEstimator {
 public:
  using CostFn = std::function<double(const Track&, const Detection&)>;
  explicit FunctionCostEstimator(CostFn fn) : fn_(std::move(fn)) {}

  CostMatrix estimate(const std::vector<Track>& tracks,
                      const std::vector<Detection>& detections,
                      const TrackerConfig& cfg) const override;

 private:
  CostFn fn_;
};

/// One confirmed-track report: corner box of track `id` on `frame`.
struct OutputRecord {
  int frame = 0;
  int id = 0;
  CornerBox box;
};

struct TrackerState {
  std::vector<Track> tracks;
  int next_id = 1;
  int iteration = 0;
};

/// Advances the tracker by one frame: filters low-confidence detections,
/// solves the gated assignment, folds matched detections into their
/// tracks, retires missed tracks (tentatives immediately, confirmed ones
/// past l_max) and spawns tentative tracks for leftover detections.
/// Returns records for every confirmed live track on this frame.
std::vector<OutputRecord> step(TrackerState& state, int frame_index,
                               const std::vector<Detection>& detections,
                               const CostEstimator& estimator, const TrackerConfig& cfg);

/// Detections of one frame, used as sequence input.
struct FrameDetections {
  int frame = 0;
  std::vector<Detection> detections;
};

/// Runs step() over a whole sequence. Input groups must be strictly
/// ascending by frame; index gaps are processed as empty frames so loss
/// counters keep advancing.
std::vector<OutputRecord> run_sequence(const std::vector<FrameDetections>& frames,
                                       const CostEstimator& estimator,
                                       const TrackerConfig& cfg);

}  // namespace latrack
