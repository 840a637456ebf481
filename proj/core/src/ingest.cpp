#include "focus/ingest.hpp"

#include <cmath>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/text_io.hpp"

namespace focus {

bool pixel_diff(const DetectedObject& prev, const DetectedObject& cur, double eps) {
  if (prev.pixel_signature.size() != cur.pixel_signature.size()) {
    throw Error(Errc::SignatureLengthMismatch,
                fmt::format("objects {} and {} have signatures of length {} and {}", prev.object_id,
                            cur.object_id, prev.pixel_signature.size(), cur.pixel_signature.size()));
  }
  if (eps < 0.0) return false;
  const auto gap = cur.frame_id >= prev.frame_id ? cur.frame_id - prev.frame_id : prev.frame_id - cur.frame_id;
  if (gap > 1) return false;
  if (prev.pixel_signature.empty()) return true;
  double total = 0.0;
  for (std::size_t i = 0; i < cur.pixel_signature.size(); ++i) {
    total += std::abs(cur.pixel_signature[i] - prev.pixel_signature[i]);
  }
  return total / static_cast<double>(cur.pixel_signature.size()) <= eps;
}

std::string IngestReport::to_text() const {
  return fmt::format(
      "profile={}\nobjects_seen={}\nobjects_classified={}\nobjects_deduped={}\nclusters_emitted={}\n"
      "ingest_cost_units={}\ngt_inferences={}\ndistance_computations={}\nwithin_distance_budget={}\n",
      profile_id, objects_seen, objects_classified, objects_deduped, clusters_emitted,
      text::format_fixed6(ingest_cost_units), gt_inferences, distance_computations,
      within_distance_budget ? "yes" : "no");
}

IngestResult ingest_objects(std::span<const DetectedObject> objects, const StreamHeader& header,
                            const Config& cfg, const Classifier& classifier, const IngestOptions& options) {
  const auto& profile = classifier.profile();
  if (profile.kind == ProfileKind::GroundTruth) {
    throw Error(Errc::InvalidConfig, "ingest must not run the ground-truth classifier");
  }
  if (cfg.k < 1 || cfg.k > profile.output_length()) {
    throw Error(Errc::KOutOfRange, fmt::format("k={} outside [1, {}]", cfg.k, profile.output_length()));
  }

  ClusterEngine engine(header.dim, cfg.t, cfg.m, options.record_inserts);
  IngestReport report;
  report.profile_id = profile.id;
  ClusterId prev_cluster = 0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& obj = objects[i];
    ++report.objects_seen;
    if (i > 0 && pixel_diff(objects[i - 1], obj, options.pixel_eps)) {
      engine.attach(obj.object_id, obj.frame_id, prev_cluster);
      ++report.objects_deduped;
      continue;
    }
    const auto ranked = classifier.classify(obj, cfg.k);
    ++report.objects_classified;
    prev_cluster = engine.insert(obj.object_id, obj.frame_id, ranked.feature, ranked.top(cfg.k));
  }

  report.distance_computations = engine.distance_computations();
  report.within_distance_budget = engine.distance_budget(report.objects_seen);
  report.ingest_cost_units = static_cast<double>(report.objects_classified) * profile.cost_units;

  IngestResult result;
  result.inserts = engine.inserts();
  IndexHeader h;
  h.stream_id = header.stream_id;
  h.dim = header.dim;
  h.vocabulary = header.vocabulary;
  h.objects = objects.size();
  h.config = cfg;
  if (profile.kind == ProfileKind::Specialized) {
    for (auto c : profile.class_set) {
      if (!c.is_other()) h.specialized_classes.push_back(c);
    }
  }
  auto clusters = engine.finalize();
  report.clusters_emitted = clusters.size();
  result.index = TopKIndex::build(std::move(clusters), std::move(h));
  result.report = report;
  return result;
}

IngestResult ingest_stream(const ObjectStream& stream, const Config& cfg, const ProfileRegistry& profiles,
                           const IngestOptions& options) {
  validate_config(cfg, profiles);
  if (stream.header.vocabulary != profiles.vocabulary()) {
    throw Error(Errc::InvalidConfig, fmt::format("stream vocabulary {} differs from registry vocabulary {}",
                                                 stream.header.vocabulary, profiles.vocabulary()));
  }
  SyntheticClassifier classifier(profiles.at(cfg.profile_id), options.seed, stream.header.stream_id);
  return ingest_objects(stream.objects, stream.header, cfg, classifier, options);
}

}  // namespace focus
