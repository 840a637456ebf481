#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "focus/classifier.hpp"
#include "focus/clustering.hpp"
#include "focus/config.hpp"
#include "focus/index.hpp"
#include "focus/profile.hpp"
#include "focus/stream.hpp"

namespace focus {

/// Negative eps turns pixel differencing off.
inline constexpr double kPixelDiffOff = -1.0;

/// True iff the objects sit in the same or adjacent frames and their pixel
/// signatures differ by at most `eps` in mean absolute value.
bool pixel_diff(const DetectedObject& prev, const DetectedObject& cur, double eps);

struct IngestOptions {
  double pixel_eps = 0.01;
  std::uint64_t seed = 0;
  bool record_inserts = false;
};

struct IngestReport {
  std::uint64_t objects_seen = 0;
  std::uint64_t objects_classified = 0;
  std::uint64_t objects_deduped = 0;
  std::uint64_t clusters_emitted = 0;
  double ingest_cost_units = 0.0;
  std::uint64_t gt_inferences = 0;
  std::uint64_t distance_computations = 0;
  bool within_distance_budget = true;
  std::string profile_id;

  std::string to_text() const;
};

struct IngestResult {
  TopKIndex index;
  IngestReport report;
  std::vector<InsertRecord> inserts;  // filled when requested
};

/// Ingests with the configured profile from the registry.
IngestResult ingest_stream(const ObjectStream& stream, const Config& cfg, const ProfileRegistry& profiles,
                           const IngestOptions& options = {});

/// Lower-level form taking an explicit classifier; the tuner feeds it a
/// precomputed one. `objects` must be in stream order.
IngestResult ingest_objects(std::span<const DetectedObject> objects, const StreamHeader& header,
                            const Config& cfg, const Classifier& classifier, const IngestOptions& options);

}  // namespace focus
