#include "latrack/dataset.hpp"

#include "latrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace latrack {

namespace {

// Candidate displacements stay strictly inside the anchor track's span,
// so negatives are capped to a hard window this many frames wide.
constexpr int kHardNegativeSpan = 4;

struct AnchorSite {
  int track = 0;
  int end = 0;  // index of the anchor's newest state
};

std::vector<TargetState> copy_anchor(const GroundTruthTrack& track, int end, int window) {
  std::vector<TargetState> anchor;
  anchor.reserve(window - 1);
  for (int k = end - (window - 2); k <= end; ++k) {
    const GroundTruthState& s = track.states[k];
    anchor.push_back(TargetState{s.box, s.appearance, s.frame});
  }
  return anchor;
}

TargetState to_target_state(const GroundTruthState& s) {
  return TargetState{s.box, s.appearance, s.frame};
}

Descriptor random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  Descriptor d(dim);
  do {
    for (int i = 0; i < dim; ++i) d(i) = normal(rng);
  } while (d.norm() < 1e-6f);
  d.normalize();
  return d;
}

Descriptor rotate_towards_random(std::mt19937_64& rng, const Descriptor& v, double angle) {
  if (angle == 0.0) return v;
  Descriptor r = random_unit(rng, static_cast<int>(v.size()));
  Descriptor ortho = r - r.dot(v) * v;
  const float norm = ortho.norm();
  if (norm < 1e-6f) return v;
  ortho /= norm;
  Descriptor out = static_cast<float>(std::cos(angle)) * v +
                   static_cast<float>(std::sin(angle)) * ortho;
  out.normalize();
  return out;
}

}  // namespace

std::vector<AssociationExample> sample_examples(const std::vector<GroundTruthTrack>& tracks,
                                                int window, long count,
                                                double positive_fraction, std::uint64_t seed) {
  if (window < 2) throw std::invalid_argument("sample_examples: window must be at least 2");
  if (count < 0) throw std::invalid_argument("sample_examples: negative count");
  if (!(positive_fraction > 0.0) || positive_fraction > 1.0) {
    throw std::invalid_argument("sample_examples: positive_fraction must lie in (0, 1]");
  }

  // Anchors need window-1 consecutive states; positives additionally need a
  // later same-track state strictly before the track's final frame.
  std::vector<AnchorSite> positive_sites;
  std::vector<AnchorSite> negative_sites;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const int size = static_cast<int>(tracks[t].states.size());
    for (int end = window - 2; end < size; ++end) {
      if (end <= size - 3) positive_sites.push_back({static_cast<int>(t), end});
      if (end <= size - 2) negative_sites.push_back({static_cast<int>(t), end});
    }
  }

  const long n_pos = std::lround(static_cast<double>(count) * positive_fraction);
  const long n_neg = count - n_pos;
  if (n_pos > 0 && positive_sites.empty()) {
    throw std::invalid_argument("sample_examples: no track is long enough for the window");
  }
  if (n_neg > 0 && (negative_sites.empty() || tracks.size() < 2)) {
    throw std::invalid_argument("sample_examples: negatives need two overlapping tracks");
  }

  // Frame -> states across all tracks, for negative candidate lookup.
  std::map<int, std::vector<std::pair<int, int>>> by_frame;
  if (n_neg > 0) {
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      for (std::size_t s = 0; s < tracks[t].states.size(); ++s) {
        by_frame[tracks[t].states[s].frame].emplace_back(static_cast<int>(t),
                                                         static_cast<int>(s));
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<AssociationExample> examples;
  examples.reserve(count);

  for (long k = 0; k < n_pos; ++k) {
    const AnchorSite site =
        positive_sites[std::uniform_int_distribution<std::size_t>(0, positive_sites.size() - 1)(rng)];
    const GroundTruthTrack& track = tracks[site.track];
    const int size = static_cast<int>(track.states.size());
    const int candidate_index =
        std::uniform_int_distribution<int>(site.end + 1, size - 2)(rng);

    AssociationExample ex;
    ex.anchor = copy_anchor(track, site.end, window);
    ex.candidate = to_target_state(track.states[candidate_index]);
    ex.displacement = ex.candidate.frame - ex.anchor.back().frame;
    ex.label = -1.0;
    ex.anchor_id = track.id;
    ex.candidate_id = track.id;
    examples.push_back(std::move(ex));
  }

  long produced_neg = 0;
  long attempts = 0;
  const long max_attempts = 200 * std::max(n_neg, 1L);
  while (produced_neg < n_neg) {
    if (++attempts > max_attempts) {
      throw std::invalid_argument("sample_examples: could not find enough negative candidates");
    }
    const AnchorSite site =
        negative_sites[std::uniform_int_distribution<std::size_t>(0, negative_sites.size() - 1)(rng)];
    const GroundTruthTrack& track = tracks[site.track];
    const int anchor_frame = track.states[site.end].frame;
    const int span_end = track.last_frame();  // candidate frames stay below this

    // Prefer temporally close candidates; fall back to the whole span.
    std::vector<std::pair<int, int>> candidates;
    const auto gather = [&](int lo, int hi) {
      candidates.clear();
      for (auto it = by_frame.lower_bound(lo); it != by_frame.end() && it->first <= hi; ++it) {
        for (const auto& ref : it->second) {
          if (ref.first != site.track) candidates.push_back(ref);
        }
      }
    };
    gather(anchor_frame + 1, std::min(anchor_frame + kHardNegativeSpan, span_end - 1));
    if (candidates.empty()) gather(anchor_frame + 1, span_end - 1);
    if (candidates.empty()) continue;

    const auto& [ct, cs] =
        candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];

    AssociationExample ex;
    ex.anchor = copy_anchor(track, site.end, window);
    ex.candidate = to_target_state(tracks[ct].states[cs]);
    ex.displacement = ex.candidate.frame - anchor_frame;
    ex.label = 1.0;
    ex.anchor_id = track.id;
    ex.candidate_id = tracks[ct].id;
    examples.push_back(std::move(ex));
    ++produced_neg;
  }

  std::shuffle(examples.begin(), examples.end(), rng);
  return examples;
}

LabeledDataset featurize_examples(const std::vector<AssociationExample>& examples,
                                  const FrameDimensions& frame) {
  LabeledDataset data;
  if (examples.empty()) return data;

  const int window = static_cast<int>(examples.front().anchor.size()) + 1;
  const int dim = window_feature_dim(window);
  data.features.resize(static_cast<long>(examples.size()), dim);
  data.labels.resize(static_cast<long>(examples.size()));

  for (std::size_t i = 0; i < examples.size(); ++i) {
    const AssociationExample& ex = examples[i];
    if (static_cast<int>(ex.anchor.size()) + 1 != window) {
      throw std::invalid_argument("featurize_examples: inconsistent anchor lengths");
    }
    if (ex.displacement < 1) {
      throw std::invalid_argument("featurize_examples: displacement must be at least 1");
    }

    Track track(1, ex.anchor.front(), static_cast<std::size_t>(window));
    for (std::size_t k = 1; k < ex.anchor.size(); ++k) track.push_state(ex.anchor[k]);
    track.loss_counter = ex.displacement - 1;

    Detection candidate;
    candidate.frame = ex.candidate.frame;
    candidate.box = ex.candidate.box;
    candidate.confidence = 1.0;
    candidate.appearance = ex.candidate.appearance;

    Eigen::VectorXd row(dim);
    window_features_into(track, candidate, window, frame, row.data());
    data.features.row(static_cast<long>(i)) = row.transpose();
    data.labels(static_cast<long>(i)) = ex.label;
  }
  return data;
}

SyntheticSequence generate_synthetic_sequence(const SyntheticSpec& spec) {
  if (spec.target_count < 1) throw std::invalid_argument("synthetic: need at least one target");
  if (spec.frame_count < 1) throw std::invalid_argument("synthetic: need at least one frame");
  if (spec.drop_rate < 0.0 || spec.drop_rate > 1.0) {
    throw std::invalid_argument("synthetic: drop_rate must lie in [0, 1]");
  }
  if (spec.fp_rate < 0.0 || spec.fp_rate > 1.0) {
    throw std::invalid_argument("synthetic: fp_rate must lie in [0, 1]");
  }
  if (spec.motion_sigma < 0.0) throw std::invalid_argument("synthetic: negative motion sigma");
  if (spec.descriptor_separation < 0.0 || spec.descriptor_separation > 1.0) {
    throw std::invalid_argument("synthetic: descriptor_separation must lie in [0, 1]");
  }
  if (spec.descriptor_dim < 2) throw std::invalid_argument("synthetic: descriptor_dim must be >= 2");
  if (!spec.frame.valid()) throw std::invalid_argument("synthetic: invalid frame dimensions");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto gaussian = [&](double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
  };

  struct Target {
    double u, v, du, dv, h, r;
    Descriptor base;
  };

  const double margin = 30.0;
  const double lo_u = margin, hi_u = spec.frame.width - margin;
  const double lo_v = margin, hi_v = spec.frame.height - margin;

  const Descriptor common = random_unit(rng, spec.descriptor_dim);
  std::vector<Target> targets;
  targets.reserve(spec.target_count);
  for (int i = 0; i < spec.target_count; ++i) {
    Target t;
    t.u = lo_u + unit(rng) * (hi_u - lo_u);
    t.v = lo_v + unit(rng) * (hi_v - lo_v);
    const double speed = 1.0 + 3.0 * unit(rng);
    const double heading = 2.0 * std::numbers::pi * unit(rng);
    t.du = speed * std::cos(heading);
    t.dv = speed * std::sin(heading);
    t.h = 60.0 + 100.0 * unit(rng);
    t.r = 0.35 + 0.25 * unit(rng);

    Descriptor own = random_unit(rng, spec.descriptor_dim);
    Descriptor blended = static_cast<float>(1.0 - spec.descriptor_separation) * common +
                         static_cast<float>(spec.descriptor_separation) * own;
    while (blended.norm() < 1e-6f) {
      own = random_unit(rng, spec.descriptor_dim);
      blended = static_cast<float>(1.0 - spec.descriptor_separation) * common +
                static_cast<float>(spec.descriptor_separation) * own;
    }
    blended.normalize();
    t.base = blended;
    targets.push_back(std::move(t));
  }

  SyntheticSequence seq;
  seq.frame = spec.frame;
  seq.tracks.resize(spec.target_count);
  for (int i = 0; i < spec.target_count; ++i) seq.tracks[i].id = i + 1;
  seq.frames.resize(spec.frame_count);
  seq.source_ids.resize(spec.frame_count);

  for (int f = 1; f <= spec.frame_count; ++f) {
    FrameDetections& frame_dets = seq.frames[f - 1];
    frame_dets.frame = f;
    std::vector<int>& sources = seq.source_ids[f - 1];

    for (int i = 0; i < spec.target_count; ++i) {
      Target& t = targets[i];
      const Descriptor descriptor =
          rotate_towards_random(rng, t.base, gaussian(spec.descriptor_noise));

      GroundTruthState state;
      state.frame = f;
      state.box = BoundingBox{t.u, t.v, t.h, t.r};
      state.appearance = descriptor;
      state.ordinal = i;
      seq.tracks[i].states.push_back(state);

      if (unit(rng) >= spec.drop_rate) {
        Detection det;
        det.frame = f;
        det.box = BoundingBox{t.u + gaussian(spec.motion_sigma),
                              t.v + gaussian(spec.motion_sigma),
                              std::max(1.0, t.h + gaussian(spec.motion_sigma)), t.r};
        det.confidence = 0.55 + 0.45 * unit(rng);
        det.appearance = descriptor;
        frame_dets.detections.push_back(std::move(det));
        sources.push_back(i + 1);
      }
    }

    for (int i = 0; i < spec.target_count; ++i) {
      if (unit(rng) < spec.fp_rate) {
        Detection det;
        det.frame = f;
        det.box = BoundingBox{lo_u + unit(rng) * (hi_u - lo_u),
                              lo_v + unit(rng) * (hi_v - lo_v),
                              60.0 + 100.0 * unit(rng), 0.35 + 0.25 * unit(rng)};
        det.confidence = 0.4 + 0.4 * unit(rng);
        det.appearance = random_unit(rng, spec.descriptor_dim);
        frame_dets.detections.push_back(std::move(det));
        sources.push_back(0);
      }
    }

    for (std::size_t d = 0; d < frame_dets.detections.size(); ++d) {
      frame_dets.detections[d].ordinal = static_cast<int>(d);
    }

    // Constant velocity plus jitter truncated at three sigma, reflecting
    // off the borders so the displacement bound survives the bounce.
    for (Target& t : targets) {
      const double radius =
          std::min(std::abs(gaussian(spec.motion_sigma)), 3.0 * spec.motion_sigma);
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      double nu = t.u + t.du + radius * std::cos(angle);
      double nv = t.v + t.dv + radius * std::sin(angle);
      if (nu < lo_u) { nu = 2.0 * lo_u - nu; t.du = -t.du; }
      if (nu > hi_u) { nu = 2.0 * hi_u - nu; t.du = -t.du; }
      if (nv < lo_v) { nv = 2.0 * lo_v - nv; t.dv = -t.dv; }
      if (nv > hi_v) { nv = 2.0 * hi_v - nv; t.dv = -t.dv; }
      t.u = nu;
      t.v = nv;
    }
  }
  return seq;
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data,
                                                           double validation_fraction,
                                                           std::uint64_t seed) {
  if (!(validation_fraction > 0.0) || !(validation_fraction < 1.0)) {
    throw std::invalid_argument("stratified_split: fraction must lie in (0, 1)");
  }

  std::vector<long> negatives, positives;
  for (long i = 0; i < data.size(); ++i) {
    (data.labels(i) < 0.0 ? negatives : positives).push_back(i);
  }

  std::mt19937_64 rng(seed);
  std::vector<long> train_idx, val_idx;
  for (std::vector<long>* group : {&negatives, &positives}) {
    std::shuffle(group->begin(), group->end(), rng);
    const long val_count = std::lround(validation_fraction * static_cast<double>(group->size()));
    for (long i = 0; i < static_cast<long>(group->size()); ++i) {
      (i < val_count ? val_idx : train_idx).push_back((*group)[i]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  const auto take = [&](const std::vector<long>& idx) {
    LabeledDataset part;
    part.features.resize(static_cast<long>(idx.size()), data.dim());
    part.labels.resize(static_cast<long>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      part.features.row(static_cast<long>(i)) = data.features.row(idx[i]);
      part.labels(static_cast<long>(i)) = data.labels(idx[i]);
    }
    return part;
  };
  return {take(train_idx), take(val_idx)};
}

}  // namespace latrack
