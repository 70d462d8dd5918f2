#pragma once

#include "latrack/dataset.hpp"
#include "latrack/eval.hpp"
#include "latrack/mlp.hpp"
#include "latrack/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace latrack {

/// Reads a detection file (CSV rows frame, id, left, top, width, height,
/// confidence, ...), drops rows under min_confidence and groups the rest
/// by frame in ascending order, keeping within-frame row order. Each
/// detection's ordinal is its raw row position within the frame, counted
/// before the confidence filter, so descriptor sidecars stay aligned no
/// matter the threshold. Parse and validation errors name the line.
std::vector<FrameDetections> parse_detections(const std::filesystem::path& path,
                                              double min_confidence);

void write_detections(const std::filesystem::path& path,
                      const std::vector<FrameDetections>& frames);

/// Result files: frame, id, left, top, width, height, 1, -1, -1, -1.
void write_results(const std::filesystem::path& path, const std::vector<OutputRecord>& records);
std::vector<OutputRecord> parse_results(const std::filesystem::path& path);

/// Ground-truth files share the detection layout with real target ids.
/// Ordinals are row positions within each frame, keying gt sidecars.
std::vector<GroundTruthTrack> parse_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<GroundTruthTrack>& tracks);

/// One sidecar record: the descriptor of detection `ordinal` on `frame`.
struct DescriptorRecord {
  int frame = 0;
  int ordinal = 0;
  Descriptor descriptor;
};

/// Binary sidecar: magic, version, descriptor dimension and record count,
/// then (frame, ordinal, dimension little-endian 32-bit floats) records.
void write_descriptor_sidecar(const std::filesystem::path& path,
                              const std::vector<DescriptorRecord>& records);
std::vector<DescriptorRecord> read_descriptor_sidecar(const std::filesystem::path& path);

/// Attaches sidecar descriptors to every detection, matching on
/// (frame, ordinal). A retained detection without a record is an error
/// naming the frame and ordinal; no silent fallbacks.
void attach_descriptors(std::vector<FrameDetections>& frames,
                        const std::filesystem::path& sidecar_path);

/// Same, for ground-truth states.
void attach_gt_descriptors(std::vector<GroundTruthTrack>& tracks,
                           const std::filesystem::path& sidecar_path);

/// Interleaved 8-bit RGB image, row major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height bytes

  bool valid() const {
    return width > 0 && height > 0 &&
           pixels.size() == static_cast<std::size_t>(3) * width * height;
  }
};

inline constexpr int kHistogramDim = 512;  // 8 x 8 x 8 RGB bins

/// Appearance fallback when no learned descriptors are available: an
/// 8x8x8 RGB histogram over the box crop (intersected with the image),
/// L2 normalized. Throws if the crop misses the image entirely.
Descriptor histogram_descriptor(const RgbImage& image, const CornerBox& box);

/// Association dataset CSV: header f0..f{d-1},label then one example per
/// row, '.' decimal and ',' separators throughout.
void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

/// Training trace CSV: epoch,mean_loss.
void write_loss_trace(const std::filesystem::path& path, const std::vector<double>& trace);

/// Evaluation CSV: one row per sequence plus an aggregate row.
void write_report_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, EvalReport>>& reports,
                      const EvalReport& aggregate);

std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& reports,
                                const EvalReport& aggregate);

/// Folds per-sequence counters into one report, recomputing the ratios.
EvalReport aggregate_reports(const std::vector<std::pair<std::string, EvalReport>>& reports);

}  // namespace latrack
