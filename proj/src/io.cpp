#include "latrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace latrack {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? comma : comma - start);
    // Trim surrounding whitespace.
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, long line, const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& field, const std::filesystem::path& path, long line) {
  double value = 0.0;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
    parse_fail(path, line, "expected a number, got '" + field + "'");
  }
  return value;
}

long parse_long(const std::string& field, const std::filesystem::path& path, long line) {
  long value = 0;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
    parse_fail(path, line, "expected an integer, got '" + field + "'");
  }
  return value;
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, std::ios::trunc | mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<FrameDetections> parse_detections(const std::filesystem::path& path,
                                              double min_confidence) {
  std::ifstream in = open_in(path);
  std::map<int, std::vector<Detection>> grouped;
  std::map<int, int> next_ordinal;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 7) parse_fail(path, line_no, "expected at least 7 columns");

    const long frame = parse_long(fields[0], path, line_no);
    if (frame < 1) parse_fail(path, line_no, "frame index must be >= 1");
    const double left = parse_double(fields[2], path, line_no);
    const double top = parse_double(fields[3], path, line_no);
    const double width = parse_double(fields[4], path, line_no);
    const double height = parse_double(fields[5], path, line_no);
    const double confidence = parse_double(fields[6], path, line_no);
    if (width <= 0.0 || height <= 0.0) {
      parse_fail(path, line_no, "box width and height must be positive");
    }

    const int ordinal = next_ordinal[static_cast<int>(frame)]++;
    if (confidence < min_confidence) continue;

    Detection det;
    det.frame = static_cast<int>(frame);
    det.ordinal = ordinal;
    det.box = corner_to_state(left, top, width, height);
    det.confidence = std::clamp(confidence, 0.0, 1.0);
    grouped[det.frame].push_back(std::move(det));
  }

  std::vector<FrameDetections> frames;
  frames.reserve(grouped.size());
  for (auto& [frame, detections] : grouped) {
    frames.push_back(FrameDetections{frame, std::move(detections)});
  }
  return frames;
}

void write_detections(const std::filesystem::path& path,
                      const std::vector<FrameDetections>& frames) {
  std::ofstream out = open_out(path);
  for (const FrameDetections& group : frames) {
    for (const Detection& det : group.detections) {
      const CornerBox box = state_to_corner(det.box);
      out << group.frame << ",-1," << format_double(box.x) << ',' << format_double(box.y) << ','
          << format_double(box.w) << ',' << format_double(box.h) << ','
          << format_double(det.confidence) << ",-1,-1,-1\n";
    }
  }
}

void write_results(const std::filesystem::path& path, const std::vector<OutputRecord>& records) {
  std::ofstream out = open_out(path);
  for (const OutputRecord& record : records) {
    out << record.frame << ',' << record.id << ',' << format_double(record.box.x) << ','
        << format_double(record.box.y) << ',' << format_double(record.box.w) << ','
        << format_double(record.box.h) << ",1,-1,-1,-1\n";
  }
}

std::vector<OutputRecord> parse_results(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<OutputRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 6) parse_fail(path, line_no, "expected at least 6 columns");
    OutputRecord record;
    record.frame = static_cast<int>(parse_long(fields[0], path, line_no));
    record.id = static_cast<int>(parse_long(fields[1], path, line_no));
    record.box.x = parse_double(fields[2], path, line_no);
    record.box.y = parse_double(fields[3], path, line_no);
    record.box.w = parse_double(fields[4], path, line_no);
    record.box.h = parse_double(fields[5], path, line_no);
    if (record.frame < 1) parse_fail(path, line_no, "frame index must be >= 1");
    if (record.box.w <= 0.0 || record.box.h <= 0.0) {
      parse_fail(path, line_no, "box width and height must be positive");
    }
    records.push_back(record);
  }
  return records;
}

std::vector<GroundTruthTrack> parse_ground_truth(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::map<int, GroundTruthTrack> tracks;
  std::map<int, int> next_ordinal;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 6) parse_fail(path, line_no, "expected at least 6 columns");

    const long frame = parse_long(fields[0], path, line_no);
    const long id = parse_long(fields[1], path, line_no);
    if (frame < 1) parse_fail(path, line_no, "frame index must be >= 1");
    if (id < 1) parse_fail(path, line_no, "target id must be >= 1");
    const double left = parse_double(fields[2], path, line_no);
    const double top = parse_double(fields[3], path, line_no);
    const double width = parse_double(fields[4], path, line_no);
    const double height = parse_double(fields[5], path, line_no);
    if (width <= 0.0 || height <= 0.0) {
      parse_fail(path, line_no, "box width and height must be positive");
    }

    GroundTruthState state;
    state.frame = static_cast<int>(frame);
    state.box = corner_to_state(left, top, width, height);
    state.ordinal = next_ordinal[state.frame]++;
    GroundTruthTrack& track = tracks[static_cast<int>(id)];
    track.id = static_cast<int>(id);
    track.states.push_back(std::move(state));
  }

  std::vector<GroundTruthTrack> result;
  result.reserve(tracks.size());
  for (auto& [id, track] : tracks) {
    std::sort(track.states.begin(), track.states.end(),
              [](const GroundTruthState& a, const GroundTruthState& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < track.states.size(); ++i) {
      if (track.states[i].frame == track.states[i - 1].frame) {
        throw std::runtime_error(path.string() + ": target " + std::to_string(id) +
                                 " appears twice on frame " +
                                 std::to_string(track.states[i].frame));
      }
    }
    result.push_back(std::move(track));
  }
  return result;
}

void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<GroundTruthTrack>& tracks) {
  struct Row {
    int frame;
    int ordinal;
    int id;
    CornerBox box;
  };
  std::vector<Row> rows;
  for (const GroundTruthTrack& track : tracks) {
    for (const GroundTruthState& state : track.states) {
      rows.push_back(Row{state.frame, state.ordinal, track.id, state_to_corner(state.box)});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    if (a.ordinal != b.ordinal) return a.ordinal < b.ordinal;
    return a.id < b.id;
  });

  std::ofstream out = open_out(path);
  for (const Row& row : rows) {
    out << row.frame << ',' << row.id << ',' << format_double(row.box.x) << ','
        << format_double(row.box.y) << ',' << format_double(row.box.w) << ','
        << format_double(row.box.h) << ",1,1,1\n";
  }
}

namespace {

constexpr char kSidecarMagic[8] = {'L', 'A', 'T', 'R', 'K', 'D', 'S', 'C'};
constexpr std::uint32_t kSidecarVersion = 1;

void sidecar_read(std::ifstream& in, void* data, std::size_t size, std::size_t& offset,
                  const std::filesystem::path& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (in.gcount() != static_cast<std::streamsize>(size)) {
    throw std::runtime_error(path.string() + ": parse error at byte " + std::to_string(offset) +
                             ": unexpected end of file");
  }
  offset += size;
}

}  // namespace

void write_descriptor_sidecar(const std::filesystem::path& path,
                              const std::vector<DescriptorRecord>& records) {
  std::uint32_t dim = records.empty() ? 0 : static_cast<std::uint32_t>(records.front().descriptor.size());
  for (const DescriptorRecord& record : records) {
    if (static_cast<std::uint32_t>(record.descriptor.size()) != dim) {
      throw std::invalid_argument("sidecar records must share one descriptor dimension");
    }
  }

  std::ofstream out = open_out(path, std::ios::binary);
  out.write(kSidecarMagic, sizeof(kSidecarMagic));
  out.write(reinterpret_cast<const char*>(&kSidecarVersion), sizeof(kSidecarVersion));
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  const std::uint64_t count = records.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const DescriptorRecord& record : records) {
    const std::uint32_t frame = static_cast<std::uint32_t>(record.frame);
    const std::uint32_t ordinal = static_cast<std::uint32_t>(record.ordinal);
    out.write(reinterpret_cast<const char*>(&frame), sizeof(frame));
    out.write(reinterpret_cast<const char*>(&ordinal), sizeof(ordinal));
    out.write(reinterpret_cast<const char*>(record.descriptor.data()),
              static_cast<std::streamsize>(sizeof(float) * dim));
  }
  if (!out) throw std::runtime_error("failed while writing " + path.string());
}

std::vector<DescriptorRecord> read_descriptor_sidecar(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::size_t offset = 0;

  char magic[8];
  sidecar_read(in, magic, sizeof(magic), offset, path);
  if (std::memcmp(magic, kSidecarMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + ": parse error at byte 0: bad magic");
  }
  std::uint32_t version = 0;
  sidecar_read(in, &version, sizeof(version), offset, path);
  if (version != kSidecarVersion) {
    throw std::runtime_error(path.string() + ": unsupported sidecar version " +
                             std::to_string(version));
  }
  std::uint32_t dim = 0;
  sidecar_read(in, &dim, sizeof(dim), offset, path);
  std::uint64_t count = 0;
  sidecar_read(in, &count, sizeof(count), offset, path);
  if (count > 0 && (dim == 0 || dim > (1u << 20))) {
    throw std::runtime_error(path.string() + ": implausible descriptor dimension " +
                             std::to_string(dim));
  }

  std::vector<DescriptorRecord> records;
  records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    DescriptorRecord record;
    std::uint32_t frame = 0, ordinal = 0;
    sidecar_read(in, &frame, sizeof(frame), offset, path);
    sidecar_read(in, &ordinal, sizeof(ordinal), offset, path);
    record.frame = static_cast<int>(frame);
    record.ordinal = static_cast<int>(ordinal);
    record.descriptor.resize(dim);
    sidecar_read(in, record.descriptor.data(), sizeof(float) * dim, offset, path);
    records.push_back(std::move(record));
  }

  char extra = 0;
  in.read(&extra, 1);
  if (in.gcount() != 0) {
    throw std::runtime_error(path.string() + ": parse error at byte " + std::to_string(offset) +
                             ": trailing data");
  }
  return records;
}

namespace {

std::map<std::pair<int, int>, Descriptor> sidecar_index(const std::filesystem::path& path) {
  std::map<std::pair<int, int>, Descriptor> index;
  for (DescriptorRecord& record : read_descriptor_sidecar(path)) {
    const auto key = std::make_pair(record.frame, record.ordinal);
    if (!index.emplace(key, std::move(record.descriptor)).second) {
      throw std::runtime_error(path.string() + ": duplicate record for frame " +
                               std::to_string(record.frame) + ", ordinal " +
                               std::to_string(record.ordinal));
    }
  }
  return index;
}

}  // namespace

void attach_descriptors(std::vector<FrameDetections>& frames,
                        const std::filesystem::path& sidecar_path) {
  const auto index = sidecar_index(sidecar_path);
  for (FrameDetections& group : frames) {
    for (Detection& det : group.detections) {
      const auto it = index.find({det.frame, det.ordinal});
      if (it == index.end()) {
        throw std::runtime_error(sidecar_path.string() + ": no descriptor for frame " +
                                 std::to_string(det.frame) + ", detection ordinal " +
                                 std::to_string(det.ordinal));
      }
      det.appearance = it->second;
    }
  }
}

void attach_gt_descriptors(std::vector<GroundTruthTrack>& tracks,
                           const std::filesystem::path& sidecar_path) {
  const auto index = sidecar_index(sidecar_path);
  for (GroundTruthTrack& track : tracks) {
    for (GroundTruthState& state : track.states) {
      const auto it = index.find({state.frame, state.ordinal});
      if (it == index.end()) {
        throw std::runtime_error(sidecar_path.string() + ": no descriptor for frame " +
                                 std::to_string(state.frame) + ", ordinal " +
                                 std::to_string(state.ordinal));
      }
      state.appearance = it->second;
    }
  }
}

Descriptor histogram_descriptor(const RgbImage& image, const CornerBox& box) {
  if (!image.valid()) throw std::invalid_argument("histogram_descriptor: invalid image");
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  const int x1 = std::min(image.width, static_cast<int>(std::ceil(box.x + box.w)));
  const int y1 = std::min(image.height, static_cast<int>(std::ceil(box.y + box.h)));
  if (x0 >= x1 || y0 >= y1) {
    throw std::invalid_argument("histogram_descriptor: box does not intersect the image");
  }

  Descriptor histogram = Descriptor::Zero(kHistogramDim);
  for (int y = y0; y < y1; ++y) {
    const std::uint8_t* row = image.pixels.data() + static_cast<std::size_t>(3) * image.width * y;
    for (int x = x0; x < x1; ++x) {
      const std::uint8_t r = row[3 * x + 0];
      const std::uint8_t g = row[3 * x + 1];
      const std::uint8_t b = row[3 * x + 2];
      histogram((r >> 5) * 64 + (g >> 5) * 8 + (b >> 5)) += 1.0f;
    }
  }
  histogram.normalize();
  return histogram;
}

void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  std::ofstream out = open_out(path);
  for (int c = 0; c < data.dim(); ++c) out << 'f' << c << ',';
  out << "label\n";
  for (long i = 0; i < data.size(); ++i) {
    for (int c = 0; c < data.dim(); ++c) out << format_double(data.features(i, c)) << ',';
    out << format_double(data.labels(i)) << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing " + path.string());
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty dataset file");
  const std::vector<std::string> header = split_csv(line);
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(path.string() + ":1: header must list feature columns then 'label'");
  }
  const int dim = static_cast<int>(header.size()) - 1;

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv(line);
    if (static_cast<int>(fields.size()) != dim + 1) {
      parse_fail(path, line_no, "expected " + std::to_string(dim + 1) + " columns");
    }
    std::vector<double> row(dim + 1);
    for (int c = 0; c <= dim; ++c) row[c] = parse_double(fields[c], path, line_no);
    if (row[dim] != -1.0 && row[dim] != 1.0) {
      parse_fail(path, line_no, "label must be -1 or 1");
    }
    rows.push_back(std::move(row));
  }

  LabeledDataset data;
  data.features.resize(static_cast<long>(rows.size()), dim);
  data.labels.resize(static_cast<long>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < dim; ++c) data.features(static_cast<long>(i), c) = rows[i][c];
    data.labels(static_cast<long>(i)) = rows[i][dim];
  }
  return data;
}

void write_loss_trace(const std::filesystem::path& path, const std::vector<double>& trace) {
  std::ofstream out = open_out(path);
  out << "epoch,mean_loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << (i + 1) << ',' << format_double(trace[i]) << '\n';
  }
}

namespace {

void report_row(std::ostream& out, const std::string& name, const EvalReport& r) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), "%.6f,%.6f,%.6f,%.6f,%ld,%ld,%ld,%ld,%ld,%.2f",
                r.mota, r.motp, r.mt, r.ml, r.idsw, r.fm, r.fp, r.fn, r.gt, r.hz);
  out << name << ',' << buffer << '\n';
}

}  // namespace

EvalReport aggregate_reports(const std::vector<std::pair<std::string, EvalReport>>& reports) {
  EvalReport total;
  double motp_weighted = 0.0;
  double mt_weighted = 0.0, ml_weighted = 0.0;
  for (const auto& [name, r] : reports) {
    total.fp += r.fp;
    total.fn += r.fn;
    total.idsw += r.idsw;
    total.fm += r.fm;
    total.gt += r.gt;
    total.matches += r.matches;
    total.trajectories += r.trajectories;
    motp_weighted += r.motp * static_cast<double>(r.matches);
    mt_weighted += r.mt * static_cast<double>(r.trajectories);
    ml_weighted += r.ml * static_cast<double>(r.trajectories);
  }
  total.mota = total.gt > 0
                   ? 1.0 - static_cast<double>(total.fn + total.fp + total.idsw) /
                               static_cast<double>(total.gt)
                   : 0.0;
  total.motp = total.matches > 0 ? motp_weighted / static_cast<double>(total.matches) : 0.0;
  if (total.trajectories > 0) {
    total.mt = mt_weighted / static_cast<double>(total.trajectories);
    total.ml = ml_weighted / static_cast<double>(total.trajectories);
  }
  return total;
}

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, EvalReport>>& reports,
                      const EvalReport& aggregate) {
  std::ofstream out = open_out(path);
  out << "sequence,mota,motp,mt,ml,idsw,fm,fp,fn,gt,hz\n";
  for (const auto& [name, report] : reports) report_row(out, name, report);
  report_row(out, "OVERALL", aggregate);
}

std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& reports,
                                const EvalReport& aggregate) {
  std::ostringstream out;
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), "%-16s %7s %7s %6s %6s %6s %6s %7s %7s %9s %9s\n",
                "sequence", "MOTA", "MOTP", "MT", "ML", "IDSW", "FM", "FP", "FN", "GT", "Hz");
  out << buffer;
  const auto emit = [&](const std::string& name, const EvalReport& r) {
    std::snprintf(buffer, sizeof(buffer),
                  "%-16s %7.3f %7.3f %5.1f%% %5.1f%% %6ld %6ld %7ld %7ld %9ld %9.1f\n",
                  name.c_str(), r.mota, r.motp, 100.0 * r.mt, 100.0 * r.ml, r.idsw, r.fm, r.fp,
                  r.fn, r.gt, r.hz);
    out << buffer;
  };
  for (const auto& [name, report] : reports) emit(name, report);
  emit("OVERALL", aggregate);
  return out.str();
}

}  // namespace latrack
