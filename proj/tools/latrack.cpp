// Command-line surface for the tracking pipeline: synthetic benchmarks,
// association-dataset building, regressor training, tracking, CLEAR-MOT
// evaluation and throughput measurement.

#include "latrack/dataset.hpp"
#include "latrack/eval.hpp"
#include "latrack/features.hpp"
#include "latrack/io.hpp"
#include "latrack/mlp.hpp"
#include "latrack/tracker.hpp"

#include <CLI11.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace latrack;

namespace {

FrameDimensions parse_frame_size(const std::string& text) {
  int width = 0, height = 0;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> width >> sep >> height) || (sep != 'x' && sep != 'X' && sep != ',') ||
      width <= 0 || height <= 0) {
    throw CLI::ValidationError("--frame-size", "expected WIDTHxHEIGHT, got '" + text + "'");
  }
  return FrameDimensions{width, height};
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> widths;
  if (text.empty() || text == "none") return widths;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    widths.push_back(std::stoi(item));
    if (widths.back() <= 0) {
      throw CLI::ValidationError("--hidden", "layer widths must be positive");
    }
  }
  return widths;
}

RgbImage load_image(const fs::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw std::runtime_error("cannot read image " + path.string());
  RgbImage image;
  image.width = bgr.cols;
  image.height = bgr.rows;
  image.pixels.resize(static_cast<std::size_t>(3) * bgr.cols * bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const std::size_t at = (static_cast<std::size_t>(y) * bgr.cols + x) * 3;
      image.pixels[at + 0] = row[x][2];
      image.pixels[at + 1] = row[x][1];
      image.pixels[at + 2] = row[x][0];
    }
  }
  return image;
}

fs::path frame_image_path(const fs::path& dir, int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d", frame);
  for (const char* ext : {".jpg", ".png", ".jpeg", ".ppm"}) {
    fs::path candidate = dir / (std::string(name) + ext);
    if (fs::exists(candidate)) return candidate;
  }
  throw std::runtime_error("no image for frame " + std::to_string(frame) + " under " +
                           dir.string());
}

void attach_histogram_descriptors(std::vector<FrameDetections>& frames, const fs::path& dir) {
  for (FrameDetections& group : frames) {
    if (group.detections.empty()) continue;
    const RgbImage image = load_image(frame_image_path(dir, group.frame));
    for (Detection& det : group.detections) {
      det.appearance = histogram_descriptor(image, state_to_corner(det.box));
    }
  }
}

std::vector<DescriptorRecord> sidecar_from_frames(const std::vector<FrameDetections>& frames) {
  std::vector<DescriptorRecord> records;
  for (const FrameDetections& group : frames) {
    for (const Detection& det : group.detections) {
      records.push_back(DescriptorRecord{det.frame, det.ordinal, *det.appearance});
    }
  }
  return records;
}

std::vector<DescriptorRecord> sidecar_from_tracks(const std::vector<GroundTruthTrack>& tracks) {
  std::vector<DescriptorRecord> records;
  for (const GroundTruthTrack& track : tracks) {
    for (const GroundTruthState& state : track.states) {
      records.push_back(DescriptorRecord{state.frame, state.ordinal, state.appearance});
    }
  }
  return records;
}

int run_synth(const SyntheticSpec& spec, const fs::path& out_dir) {
  const SyntheticSequence seq = generate_synthetic_sequence(spec);
  fs::create_directories(out_dir);
  write_ground_truth(out_dir / "gt.txt", seq.tracks);
  write_descriptor_sidecar(out_dir / "gt.dsc", sidecar_from_tracks(seq.tracks));
  write_detections(out_dir / "det.txt", seq.frames);
  write_descriptor_sidecar(out_dir / "det.dsc", sidecar_from_frames(seq.frames));

  long detections = 0;
  for (const FrameDetections& group : seq.frames) detections += group.detections.size();
  std::cout << "wrote " << seq.tracks.size() << " targets over " << spec.frame_count
            << " frames, " << detections << " detections, to " << out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking-by-detection pipeline with a learned association cost"};
  app.require_subcommand(1);

  // --- synth ---------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark sequence");
  SyntheticSpec synth_spec;
  std::string synth_frame_size = "1920x1080";
  std::string synth_out = "synth";
  synth->add_option("--targets", synth_spec.target_count, "Number of targets")->check(CLI::PositiveNumber);
  synth->add_option("--frames", synth_spec.frame_count, "Number of frames")->check(CLI::PositiveNumber);
  synth->add_option("--motion-sigma", synth_spec.motion_sigma, "Motion/detector jitter std, px");
  synth->add_option("--drop-rate", synth_spec.drop_rate, "Detection miss probability")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--fp-rate", synth_spec.fp_rate, "Clutter rate per target per frame")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--descriptor-separation", synth_spec.descriptor_separation,
                    "0 = identical target descriptors, 1 = independent")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--descriptor-dim", synth_spec.descriptor_dim, "Descriptor dimension");
  synth->add_option("--descriptor-noise", synth_spec.descriptor_noise, "Per-frame descriptor angle std");
  synth->add_option("--seed", synth_spec.seed, "RNG seed");
  synth->add_option("--frame-size", synth_frame_size, "Frame size as WIDTHxHEIGHT");
  synth->add_option("--output-dir", synth_out, "Output directory");

  // --- build-dataset -------------------------------------------------
  auto* build = app.add_subcommand("build-dataset", "Sample an association dataset from ground truth");
  std::vector<std::string> build_gt, build_gt_dsc;
  std::string build_frame_size, build_out = "dataset.csv";
  int build_window = 5;
  long build_count = 130000;
  double build_pos_fraction = 0.5;
  std::uint64_t build_seed = 0;
  build->add_option("--gt", build_gt, "Ground-truth file(s)")->required();
  build->add_option("--gt-descriptors", build_gt_dsc, "Descriptor sidecar per ground-truth file")->required();
  build->add_option("--frame-size", build_frame_size, "Frame size as WIDTHxHEIGHT")->required();
  build->add_option("--window", build_window, "Sliding-window entity count")->check(CLI::Range(2, 64));
  build->add_option("--count", build_count, "Examples to sample")->check(CLI::PositiveNumber);
  build->add_option("--positive-fraction", build_pos_fraction, "Share of positive examples");
  build->add_option("--seed", build_seed, "RNG seed");
  build->add_option("--output", build_out, "Output CSV");

  // --- train ----------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train the association-cost regressor");
  std::string train_dataset, train_out = "model.bin", train_trace = "loss_trace.csv";
  std::string train_hidden = "7";
  TrainConfig train_cfg;
  bool train_grid = false;
  int train_folds = 3;
  double train_val_fraction = 0.2;
  train_cmd->add_option("--dataset", train_dataset, "Dataset CSV")->required();
  train_cmd->add_option("--output", train_out, "Model file to write");
  train_cmd->add_option("--loss-trace", train_trace, "Per-epoch loss CSV to write");
  train_cmd->add_option("--hidden", train_hidden, "Hidden widths, comma separated ('none' for linear)");
  train_cmd->add_option("--lr", train_cfg.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--momentum", train_cfg.momentum, "SGD momentum")->check(CLI::Range(0.0, 0.999));
  train_cmd->add_option("--epochs", train_cfg.epochs, "Training epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", train_cfg.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--beta", train_cfg.smooth_l1_beta, "Smooth-L1 transition point")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_cfg.seed, "RNG seed");
  train_cmd->add_flag("--grid-search", train_grid, "Cross-validated search over hidden layouts");
  train_cmd->add_option("--folds", train_folds, "Cross-validation folds")->check(CLI::Range(2, 64));
  train_cmd->add_option("--val-fraction", train_val_fraction, "Validation split share");

  // --- track ----------------------------------------------------------
  auto* track_cmd = app.add_subcommand("track", "Run the tracker over a detection file");
  std::string track_dets, track_dsc, track_images, track_model, track_out = "results.txt";
  std::string track_frame_size;
  TrackerConfig track_cfg;
  track_cmd->add_option("--detections", track_dets, "Detection file")->required();
  auto* dsc_opt = track_cmd->add_option("--descriptors", track_dsc, "Descriptor sidecar");
  auto* img_opt = track_cmd->add_option("--images", track_images, "Frame image directory (histogram fallback)");
  dsc_opt->excludes(img_opt);
  track_cmd->add_option("--model", track_model, "Trained model file")->required();
  track_cmd->add_option("--output", track_out, "Result file to write");
  track_cmd->add_option("--lmax", track_cfg.l_max, "Loss-counter threshold")->check(CLI::PositiveNumber);
  track_cmd->add_option("--cmax", track_cfg.c_max, "Association cost gate");
  track_cmd->add_option("--window", track_cfg.window, "Sliding-window entity count")->check(CLI::Range(2, 64));
  track_cmd->add_option("--min-conf", track_cfg.min_confidence, "Detection confidence gate")
      ->check(CLI::Range(0.0, 1.0));
  track_cmd->add_option("--frame-size", track_frame_size, "Frame size as WIDTHxHEIGHT")->required();

  // --- evaluate -------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "Score result files against ground truth");
  std::vector<std::string> eval_gt, eval_results;
  std::string eval_out;
  double eval_iou = 0.5;
  eval_cmd->add_option("--gt", eval_gt, "Ground-truth file(s)")->required();
  eval_cmd->add_option("--results", eval_results, "Result file(s), paired with --gt order")->required();
  eval_cmd->add_option("--iou", eval_iou, "IoU threshold for matching")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--output", eval_out, "Report CSV to write");

  // --- bench ----------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "Measure tracking-only throughput on a synthetic workload");
  SyntheticSpec bench_spec;
  bench_spec.target_count = 20;
  bench_spec.drop_rate = 0.05;
  bench_spec.fp_rate = 0.05;
  bench_spec.seed = 1;
  std::string bench_model;
  int bench_reps = 3;
  TrackerConfig bench_cfg;
  bench_cmd->add_option("--targets", bench_spec.target_count, "Targets in the workload")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--frames", bench_spec.frame_count, "Frames in the workload")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--drop-rate", bench_spec.drop_rate, "Detection miss probability")->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_option("--fp-rate", bench_spec.fp_rate, "Clutter rate")->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_option("--seed", bench_spec.seed, "RNG seed");
  bench_cmd->add_option("--model", bench_model, "Model file (random weights when omitted)");
  bench_cmd->add_option("--reps", bench_reps, "Timing repetitions (minimum 3)");
  bench_cmd->add_option("--window", bench_cfg.window, "Sliding-window entity count")->check(CLI::Range(2, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      synth_spec.frame = parse_frame_size(synth_frame_size);
      return run_synth(synth_spec, synth_out);
    }

    if (build->parsed()) {
      if (build_gt.size() != build_gt_dsc.size()) {
        std::cerr << "error: --gt and --gt-descriptors must be paired\n";
        return 1;
      }
      const FrameDimensions frame = parse_frame_size(build_frame_size);
      std::vector<GroundTruthTrack> tracks;
      int id_offset = 0;
      for (std::size_t i = 0; i < build_gt.size(); ++i) {
        std::vector<GroundTruthTrack> part = parse_ground_truth(build_gt[i]);
        attach_gt_descriptors(part, build_gt_dsc[i]);
        // Re-id tracks from later files so identities never collide.
        int max_id = id_offset;
        for (GroundTruthTrack& track : part) {
          track.id += id_offset;
          max_id = std::max(max_id, track.id);
          tracks.push_back(std::move(track));
        }
        id_offset = max_id;
      }
      const auto examples =
          sample_examples(tracks, build_window, build_count, build_pos_fraction, build_seed);
      const LabeledDataset data = featurize_examples(examples, frame);
      write_dataset_csv(build_out, data);
      long positives = 0;
      for (long i = 0; i < data.size(); ++i) positives += data.labels(i) < 0.0 ? 1 : 0;
      std::cout << "wrote " << data.size() << " examples (" << positives << " positive, dim "
                << data.dim() << ") to " << build_out << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      const LabeledDataset data = read_dataset_csv(train_dataset);
      auto [train_part, val_part] = stratified_split(data, train_val_fraction, train_cfg.seed);

      std::vector<int> hidden = parse_hidden(train_hidden);
      if (train_grid) {
        std::vector<std::vector<int>> grid;
        for (int depth : {1, 2}) {
          for (int width : {4, 7, 10, 16}) {
            grid.push_back(std::vector<int>(depth, width));
          }
        }
        const GridSearchResult result = grid_search_cv(train_part, grid, train_folds, train_cfg);
        for (std::size_t cell = 0; cell < grid.size(); ++cell) {
          std::cout << "grid cell " << cell << " [";
          for (std::size_t l = 0; l < grid[cell].size(); ++l) {
            std::cout << (l ? "," : "") << grid[cell][l];
          }
          std::cout << "] mean cv mse: " << result.cell_mse[cell] << "\n";
        }
        hidden = result.best_hidden;
        std::cout << "selected hidden layout: [";
        for (std::size_t l = 0; l < hidden.size(); ++l) std::cout << (l ? "," : "") << hidden[l];
        std::cout << "]\n";
      }

      MlpModel model = MlpModel::init(data.dim(), hidden, train_cfg.seed);
      const std::vector<double> trace = train(model, train_part, train_cfg);
      write_loss_trace(train_trace, trace);
      save_model(model, train_out);
      std::cout << "train examples: " << train_part.size()
                << ", validation examples: " << val_part.size() << "\n";
      std::cout << "final epoch mean loss: " << trace.back() << "\n";
      std::cout << "validation mse: " << mse(model, val_part) << "\n";
      std::cout << "model written to " << train_out << "\n";
      return 0;
    }

    if (track_cmd->parsed()) {
      track_cfg.frame = parse_frame_size(track_frame_size);
      const MlpModel model = load_model(track_model);
      if (model.input_dim != window_feature_dim(track_cfg.window)) {
        std::cerr << "error: model expects " << model.input_dim << " inputs but --window "
                  << track_cfg.window << " produces " << window_feature_dim(track_cfg.window)
                  << "\n";
        return 1;
      }
      std::vector<FrameDetections> frames = parse_detections(track_dets, track_cfg.min_confidence);
      if (!track_dsc.empty()) {
        attach_descriptors(frames, track_dsc);
      } else if (!track_images.empty()) {
        attach_histogram_descriptors(frames, track_images);
      } else {
        std::cerr << "error: need --descriptors or --images to attach appearance\n";
        return 1;
      }
      const ModelCostEstimator estimator(model);
      const std::vector<OutputRecord> records = run_sequence(frames, estimator, track_cfg);
      write_results(track_out, records);
      std::cout << "wrote " << records.size() << " records to " << track_out << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      if (eval_gt.size() != eval_results.size()) {
        std::cerr << "error: --gt and --results must be paired\n";
        return 1;
      }
      std::vector<std::pair<std::string, EvalReport>> reports;
      for (std::size_t i = 0; i < eval_gt.size(); ++i) {
        const auto gt = parse_ground_truth(eval_gt[i]);
        const auto results = parse_results(eval_results[i]);
        reports.emplace_back(fs::path(eval_results[i]).stem().string(),
                             evaluate(gt, results, eval_iou));
      }
      const EvalReport aggregate = aggregate_reports(reports);
      std::cout << format_report_table(reports, aggregate);
      if (!eval_out.empty()) write_report_csv(eval_out, reports, aggregate);
      return 0;
    }

    if (bench_cmd->parsed()) {
      const SyntheticSequence seq = generate_synthetic_sequence(bench_spec);
      bench_cfg.frame = bench_spec.frame;
      MlpModel model;
      if (!bench_model.empty()) {
        model = load_model(bench_model);
        if (model.input_dim != window_feature_dim(bench_cfg.window)) {
          std::cerr << "error: model does not match --window " << bench_cfg.window << "\n";
          return 1;
        }
      } else {
        model = MlpModel::init(window_feature_dim(bench_cfg.window), {7}, bench_spec.seed);
      }
      const ModelCostEstimator estimator(model);

      // Descriptors already live on the detections; only the loop is timed.
      const ThroughputStats stats =
          measure_throughput(bench_spec.frame_count, bench_reps,
                             [&] { run_sequence(seq.frames, estimator, bench_cfg); });
      std::printf("tracking speed: %.1f Hz mean, %.1f Hz std over %zu runs (%d targets, %d frames)\n",
                  stats.mean_hz, stats.std_hz, stats.runs_hz.size(), bench_spec.target_count,
                  bench_spec.frame_count);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
