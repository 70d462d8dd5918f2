#include "latrack/io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace latrack;
using namespace latrack::testing;

namespace {

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() /
                    ("latrack_io_" + std::to_string(counter_++))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("parse_detections filters, groups and keeps raw ordinals") {
  TempDir dir;
  const auto path = dir.file("det.txt");
  write_text(path,
             "1,-1,10,20,30,40,0.9,-1,-1,-1\n"
             "1,-1,50,60,30,40,0.2,-1,-1,-1\n"
             "1,-1,90,20,30,40,0.3,-1,-1,-1\n"
             "3,-1,10,20,30,40,0.8,-1,-1,-1\n"
             "2,-1,10,20,30,40,0.7,-1,-1,-1\n");

  const auto frames = parse_detections(path, 0.3);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].frame == 1);
  CHECK(frames[1].frame == 2);
  CHECK(frames[2].frame == 3);

  // The 0.2 row is dropped but still consumed ordinal 1.
  REQUIRE(frames[0].detections.size() == 2);
  CHECK(frames[0].detections[0].ordinal == 0);
  CHECK(frames[0].detections[1].ordinal == 2);
  CHECK(frames[0].detections[1].confidence == doctest::Approx(0.3));
  CHECK(frames[0].detections[0].box.u == doctest::Approx(25.0));
}

TEST_CASE("parse_detections failure modes") {
  TempDir dir;
  const auto empty = dir.file("empty.txt");
  write_text(empty, "");
  CHECK(parse_detections(empty, 0.3).empty());

  const auto malformed = dir.file("bad.txt");
  write_text(malformed, "1,-1,10,20,30,40,0.9,-1,-1,-1\n1,-1,oops,20,30,40,0.9,-1,-1,-1\n");
  CHECK_THROWS_WITH_AS(parse_detections(malformed, 0.0), doctest::Contains(":2:"),
                       std::runtime_error);

  const auto negative = dir.file("neg.txt");
  write_text(negative, "1,-1,10,20,-5,40,0.9,-1,-1,-1\n");
  CHECK_THROWS_WITH_AS(parse_detections(negative, 0.0), doctest::Contains("positive"),
                       std::runtime_error);

  const auto short_row = dir.file("short.txt");
  write_text(short_row, "1,-1,10,20\n");
  CHECK_THROWS_WITH_AS(parse_detections(short_row, 0.0), doctest::Contains("columns"),
                       std::runtime_error);

  CHECK_THROWS_AS(parse_detections(dir.file("missing.txt"), 0.0), std::runtime_error);
}

TEST_CASE("detection write/parse round-trip is lossless") {
  auto rng = make_rng(81);
  std::vector<FrameDetections> frames;
  for (int f = 1; f <= 5; ++f) {
    FrameDetections group;
    group.frame = f;
    for (int d = 0; d < 3; ++d) {
      Detection det = make_detection(f, random_box(rng), Descriptor(), uniform(rng, 0.31, 1.0), d);
      det.appearance.reset();
      group.detections.push_back(det);
    }
    frames.push_back(group);
  }

  TempDir dir;
  const auto path = dir.file("roundtrip.txt");
  write_detections(path, frames);
  const auto parsed = parse_detections(path, 0.3);
  REQUIRE(parsed.size() == frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    REQUIRE(parsed[f].detections.size() == frames[f].detections.size());
    for (std::size_t d = 0; d < frames[f].detections.size(); ++d) {
      const Detection& a = frames[f].detections[d];
      const Detection& b = parsed[f].detections[d];
      // The corner/center conversion reorders additions, so values agree
      // to rounding; the file text itself is written exactly.
      CHECK(std::abs(a.box.u - b.box.u) < 1e-9);
      CHECK(std::abs(a.box.v - b.box.v) < 1e-9);
      CHECK(a.box.h == b.box.h);
      CHECK(std::abs(a.box.r - b.box.r) < 1e-12);
      CHECK(a.confidence == b.confidence);
      CHECK(a.ordinal == b.ordinal);
    }
  }
}

TEST_CASE("result write/parse round-trip") {
  std::vector<OutputRecord> records{
      OutputRecord{1, 3, CornerBox{10.25, 20.5, 30.125, 40.0625}},
      OutputRecord{2, 3, CornerBox{11.5, 21.5, 30.125, 40.0625}},
  };
  TempDir dir;
  const auto path = dir.file("results.txt");
  write_results(path, records);
  const auto parsed = parse_results(path);
  REQUIRE(parsed.size() == 2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parsed[i].frame == records[i].frame);
    CHECK(parsed[i].id == records[i].id);
    CHECK(parsed[i].box.x == records[i].box.x);
    CHECK(parsed[i].box.y == records[i].box.y);
    CHECK(parsed[i].box.w == records[i].box.w);
    CHECK(parsed[i].box.h == records[i].box.h);
  }
}

TEST_CASE("ground-truth write/parse keeps tracks, frames and ordinals") {
  std::vector<GroundTruthTrack> tracks(2);
  tracks[0].id = 1;
  tracks[1].id = 2;
  for (int f = 1; f <= 4; ++f) {
    GroundTruthState a;
    a.frame = f;
    a.box = corner_to_state(10.0 * f, 20, 30, 40);
    a.ordinal = 0;
    tracks[0].states.push_back(a);
    GroundTruthState b;
    b.frame = f;
    b.box = corner_to_state(500, 100.0 + f, 25, 50);
    b.ordinal = 1;
    tracks[1].states.push_back(b);
  }

  TempDir dir;
  const auto path = dir.file("gt.txt");
  write_ground_truth(path, tracks);
  const auto parsed = parse_ground_truth(path);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].id == 1);
  CHECK(parsed[1].id == 2);
  REQUIRE(parsed[0].states.size() == 4);
  CHECK(parsed[0].states[2].frame == 3);
  CHECK(parsed[0].states[2].ordinal == 0);
  CHECK(parsed[1].states[2].ordinal == 1);
  CHECK(std::abs(parsed[0].states[2].box.u - tracks[0].states[2].box.u) < 1e-9);

  // Duplicate (frame, id) rows are rejected.
  write_text(path, "1,5,10,10,5,5,1,1,1\n1,5,20,20,5,5,1,1,1\n");
  CHECK_THROWS_WITH_AS(parse_ground_truth(path), doctest::Contains("twice"), std::runtime_error);
}

TEST_CASE("descriptor sidecar round-trip and attachment") {
  auto rng = make_rng(82);
  std::vector<DescriptorRecord> records;
  for (int f = 1; f <= 3; ++f) {
    for (int d = 0; d < 2; ++d) {
      records.push_back(DescriptorRecord{f, d, unit_descriptor(rng, 8)});
    }
  }

  TempDir dir;
  const auto path = dir.file("desc.dsc");
  write_descriptor_sidecar(path, records);
  const auto loaded = read_descriptor_sidecar(path);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].frame == records[i].frame);
    CHECK(loaded[i].ordinal == records[i].ordinal);
    CHECK((loaded[i].descriptor - records[i].descriptor).norm() == 0.0f);
  }

  std::vector<FrameDetections> frames;
  for (int f = 1; f <= 3; ++f) {
    FrameDetections group;
    group.frame = f;
    for (int d = 0; d < 2; ++d) {
      Detection det = make_detection(f, random_box(rng), Descriptor(), 0.9, d);
      det.appearance.reset();
      group.detections.push_back(det);
    }
    frames.push_back(group);
  }
  attach_descriptors(frames, path);
  for (const auto& group : frames) {
    for (const Detection& det : group.detections) {
      REQUIRE(det.appearance.has_value());
      CHECK(det.appearance->size() == 8);
    }
  }

  // A retained detection without a record fails hard.
  frames[0].detections[0].ordinal = 9;
  CHECK_THROWS_WITH_AS(attach_descriptors(frames, path), doctest::Contains("ordinal 9"),
                       std::runtime_error);
}

TEST_CASE("descriptor sidecar failure modes") {
  auto rng = make_rng(83);
  std::vector<DescriptorRecord> records{DescriptorRecord{1, 0, unit_descriptor(rng, 8)},
                                        DescriptorRecord{1, 1, unit_descriptor(rng, 8)}};
  TempDir dir;
  const auto path = dir.file("desc.dsc");
  write_descriptor_sidecar(path, records);

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 4);
  CHECK_THROWS_WITH_AS(read_descriptor_sidecar(path), doctest::Contains("unexpected end"),
                       std::runtime_error);

  records[1].ordinal = 0;  // now duplicates record 0
  write_descriptor_sidecar(path, records);
  std::vector<FrameDetections> frames;
  CHECK_THROWS_WITH_AS(attach_descriptors(frames, path), doctest::Contains("duplicate"),
                       std::runtime_error);

  records[1].descriptor = unit_descriptor(rng, 4);
  CHECK_THROWS_AS(write_descriptor_sidecar(path, records), std::invalid_argument);
}

TEST_CASE("histogram descriptor of a uniform crop has one dominant bin") {
  RgbImage image;
  image.width = 16;
  image.height = 16;
  image.pixels.assign(3 * 16 * 16, 0);
  for (int i = 0; i < 16 * 16; ++i) {
    image.pixels[3 * i + 0] = 200;  // red channel -> bin 6
    image.pixels[3 * i + 1] = 100;  // green -> bin 3
    image.pixels[3 * i + 2] = 30;   // blue -> bin 0
  }

  const Descriptor d = histogram_descriptor(image, CornerBox{2, 2, 8, 8});
  REQUIRE(d.size() == kHistogramDim);
  CHECK(d.norm() == doctest::Approx(1.0));
  const int bin = (200 >> 5) * 64 + (100 >> 5) * 8 + (30 >> 5);
  CHECK(d(bin) == doctest::Approx(1.0));

  // Two-color crop splits the mass between two bins, each 1/sqrt(2).
  for (int y = 0; y < 16; ++y) {
    for (int x = 8; x < 16; ++x) {
      const std::size_t at = 3 * (y * 16 + x);
      image.pixels[at + 0] = 10;
      image.pixels[at + 1] = 10;
      image.pixels[at + 2] = 10;
    }
  }
  const Descriptor two = histogram_descriptor(image, CornerBox{0, 0, 16, 16});
  CHECK(two(bin) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(two(0) == doctest::Approx(1.0 / std::sqrt(2.0)));

  CHECK_THROWS_AS(histogram_descriptor(image, CornerBox{100, 100, 5, 5}), std::invalid_argument);
}

TEST_CASE("dataset CSV round-trip is exact") {
  auto rng = make_rng(84);
  LabeledDataset data;
  data.features.resize(20, 7);
  data.labels.resize(20);
  for (long i = 0; i < 20; ++i) {
    for (int c = 0; c < 7; ++c) data.features(i, c) = uniform(rng, -3, 3);
    data.labels(i) = i % 2 == 0 ? -1.0 : 1.0;
  }

  TempDir dir;
  const auto path = dir.file("dataset.csv");
  write_dataset_csv(path, data);
  const LabeledDataset parsed = read_dataset_csv(path);
  REQUIRE(parsed.size() == 20);
  REQUIRE(parsed.dim() == 7);
  CHECK((parsed.features - data.features).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((parsed.labels - data.labels).lpNorm<Eigen::Infinity>() == 0.0);

  write_text(path, "f0,f1\n0.5,0.5\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(path), doctest::Contains("label"), std::runtime_error);
  write_text(path, "f0,label\n0.5,0.7\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(path), doctest::Contains("label"), std::runtime_error);
}

TEST_CASE("loss trace and report files") {
  TempDir dir;
  const auto trace_path = dir.file("trace.csv");
  write_loss_trace(trace_path, {0.5, 0.25, 0.125});
  std::ifstream in(trace_path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,mean_loss");
  std::getline(in, line);
  CHECK(line == "1,0.5");
  std::getline(in, line);
  CHECK(line == "2,0.25");

  EvalReport a;
  a.mota = 0.9;
  a.motp = 0.8;
  a.idsw = 2;
  a.gt = 100;
  a.fn = 6;
  a.fp = 2;
  a.matches = 94;
  a.trajectories = 5;
  a.mt = 0.8;
  const std::vector<std::pair<std::string, EvalReport>> reports{{"seq-a", a}, {"seq-b", a}};
  const EvalReport total = aggregate_reports(reports);
  CHECK(total.gt == 200);
  CHECK(total.idsw == 4);
  CHECK(total.mota == doctest::Approx(1.0 - 20.0 / 200.0));
  CHECK(total.motp == doctest::Approx(0.8));
  CHECK(total.mt == doctest::Approx(0.8));

  const auto report_path = dir.file("report.csv");
  write_report_csv(report_path, reports, total);
  std::ifstream rin(report_path);
  std::getline(rin, line);
  CHECK(line == "sequence,mota,motp,mt,ml,idsw,fm,fp,fn,gt,hz");
  int rows = 0;
  while (std::getline(rin, line)) ++rows;
  CHECK(rows == 3);

  const std::string table = format_report_table(reports, total);
  CHECK(table.find("OVERALL") != std::string::npos);
  CHECK(table.find("seq-a") != std::string::npos);
}
