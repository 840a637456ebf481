#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "focus/stream.hpp"

namespace focus {

/// Parameters of a synthetic detected-object stream. Objects come in tracks
/// (one physical object seen over consecutive frames); features cluster by
/// class, then by track.
struct StreamSpec {
  std::string stream_id = "synthetic";
  std::uint64_t n_objects = 10000;
  double fps = 30.0;
  std::uint32_t vocabulary = 1000;
  std::uint32_t class_subset = 100;  // C classes drawn from the vocabulary
  double zipf_s = 2.5;
  double duplicate_rate = 0.2;
  double duplicate_eps = 0.01;  // duplicates stay within eps/2 of their predecessor
  /// When set, a stream with too few adjacent same-track pairs gets as many
  /// duplicates as fit instead of an InvalidSpec error (low-fps streams).
  bool cap_duplicates = false;
  std::size_t dim = 64;
  std::size_t signature_length = 16;
  double class_sigma = 1.0;     // spread of per-class mean vectors
  double instance_sigma = 3.0;  // track identity around its class mean
  double frame_sigma = 0.05;    // per-appearance jitter around the track identity
  double track_min_s = 0.5;
  double track_max_s = 3.0;
  double concurrency = 2.0;  // mean tracks on screen
  std::uint64_t seed = 1;

  void validate() const;
  std::string to_text() const;
  /// Unknown keys are errors; missing keys keep their defaults.
  static StreamSpec parse(std::string_view text);
  static StreamSpec load(const std::filesystem::path& path);

  bool operator==(const StreamSpec&) const = default;
};

/// Class probabilities in Zipf rank order, as (class, p) pairs.
std::vector<std::pair<ClassId, double>> zipf_classes(const StreamSpec& spec);

/// Splits `n` into integer counts proportional to `weights`, handing leftover
/// units to the largest fractional parts (ties to the lower index).
std::vector<std::uint64_t> largest_remainder(std::uint64_t n, const std::vector<double>& weights);

ObjectStream generate_stream(const StreamSpec& spec);

/// Fraction of objects whose nearest other object (L2 on features) shares
/// its class. Brute force over at most `limit` leading objects.
double nearest_neighbor_same_class(const ObjectStream& stream, std::size_t limit = 5000);

}  // namespace focus
