#include "focus/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/random.hpp"
#include "focus/text_io.hpp"

namespace focus {

void StreamSpec::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::InvalidSpec, what); };
  if (!(fps >= 1.0)) bad("fps must be at least 1");
  if (vocabulary == 0) bad("vocabulary must be positive");
  if (class_subset == 0 || class_subset > vocabulary) bad("class_subset must lie in [1, vocabulary]");
  if (!(zipf_s >= 0.0)) bad("zipf_s must be non-negative");
  if (!(duplicate_rate >= 0.0 && duplicate_rate < 1.0)) bad("duplicate_rate must lie in [0, 1)");
  if (!(duplicate_eps > 0.0)) bad("duplicate_eps must be positive");
  if (dim == 0) bad("dim must be positive");
  if (signature_length == 0) bad("signature_length must be positive");
  if (!(class_sigma >= 0.0 && instance_sigma >= 0.0 && frame_sigma >= 0.0)) bad("sigmas must be non-negative");
  if (!(track_min_s > 0.0 && track_max_s >= track_min_s)) bad("track lifetimes must satisfy 0 < min <= max");
  if (!(concurrency > 0.0)) bad("concurrency must be positive");
  if (stream_id.empty() || stream_id.find_first_of("\n|=") != std::string::npos) bad("invalid stream_id");
}

std::string StreamSpec::to_text() const {
  std::string out;
  out += fmt::format("stream_id={}\nn_objects={}\nfps={}\nvocabulary={}\nclass_subset={}\n", stream_id, n_objects,
                     text::format_sig9(fps), vocabulary, class_subset);
  out += fmt::format("zipf_s={}\nduplicate_rate={}\nduplicate_eps={}\ndim={}\nsignature_length={}\n",
                     text::format_sig9(zipf_s), text::format_sig9(duplicate_rate), text::format_sig9(duplicate_eps),
                     dim, signature_length);
  out += fmt::format("class_sigma={}\ninstance_sigma={}\nframe_sigma={}\ntrack_min_s={}\ntrack_max_s={}\n",
                     text::format_sig9(class_sigma), text::format_sig9(instance_sigma),
                     text::format_sig9(frame_sigma), text::format_sig9(track_min_s), text::format_sig9(track_max_s));
  out += fmt::format("concurrency={}\ncap_duplicates={}\nseed={}\n", text::format_sig9(concurrency),
                     cap_duplicates ? 1 : 0, seed);
  return out;
}

StreamSpec StreamSpec::parse(std::string_view body) {
  StreamSpec s;
  for (const auto& [key, value] : text::parse_key_values(body)) {
    if (key == "stream_id") s.stream_id = value;
    else if (key == "n_objects") s.n_objects = text::parse_u64(value);
    else if (key == "fps") s.fps = text::parse_double(value);
    else if (key == "vocabulary") s.vocabulary = text::parse_u32(value);
    else if (key == "class_subset") s.class_subset = text::parse_u32(value);
    else if (key == "zipf_s") s.zipf_s = text::parse_double(value);
    else if (key == "duplicate_rate") s.duplicate_rate = text::parse_double(value);
    else if (key == "duplicate_eps") s.duplicate_eps = text::parse_double(value);
    else if (key == "dim") s.dim = text::parse_u64(value);
    else if (key == "signature_length") s.signature_length = text::parse_u64(value);
    else if (key == "class_sigma") s.class_sigma = text::parse_double(value);
    else if (key == "instance_sigma") s.instance_sigma = text::parse_double(value);
    else if (key == "frame_sigma") s.frame_sigma = text::parse_double(value);
    else if (key == "track_min_s") s.track_min_s = text::parse_double(value);
    else if (key == "track_max_s") s.track_max_s = text::parse_double(value);
    else if (key == "concurrency") s.concurrency = text::parse_double(value);
    else if (key == "seed") s.seed = text::parse_u64(value);
    else if (key == "cap_duplicates") s.cap_duplicates = value == "1" || value == "true" || value == "yes";
    else throw Error(Errc::InvalidSpec, fmt::format("unknown stream spec key '{}'", key));
  }
  s.validate();
  return s;
}

StreamSpec StreamSpec::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

std::vector<std::uint64_t> largest_remainder(std::uint64_t n, const std::vector<double>& weights) {
  std::vector<std::uint64_t> out(weights.size(), 0);
  if (weights.empty()) return out;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> frac(weights.size());
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i] / total;
    out[i] = static_cast<std::uint64_t>(std::floor(exact));
    frac[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t j = 0; assigned < n; ++j, ++assigned) ++out[order[j % order.size()]];
  return out;
}

std::vector<std::pair<ClassId, double>> zipf_classes(const StreamSpec& spec) {
  Rng rng(mix_seed(spec.seed, 11));
  std::vector<std::uint32_t> pool(spec.vocabulary);
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<std::pair<ClassId, double>> out;
  double norm = 0.0;
  for (std::uint32_t i = 0; i < spec.class_subset; ++i) {
    const auto j = std::uniform_int_distribution<std::uint32_t>(i, spec.vocabulary - 1)(rng);
    std::swap(pool[i], pool[j]);
    const double w = std::pow(static_cast<double>(i + 1), -spec.zipf_s);
    out.emplace_back(ClassId{pool[i]}, w);
    norm += w;
  }
  for (auto& [_, p] : out) p /= norm;
  return out;
}

namespace {

struct Track {
  ClassId cls;
  std::size_t class_rank = 0;
  std::uint64_t length = 0;
  std::uint64_t start = 0;
};

double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

}  // namespace

ObjectStream generate_stream(const StreamSpec& spec) {
  spec.validate();
  ObjectStream stream;
  stream.header = StreamHeader{spec.stream_id, spec.fps, spec.dim, spec.vocabulary, spec.signature_length};
  if (spec.n_objects == 0) return stream;

  const auto classes = zipf_classes(spec);
  std::vector<double> weights;
  for (const auto& [_, p] : classes) weights.push_back(p);
  const auto counts = largest_remainder(spec.n_objects, weights);

  // Tracks: each class's objects split into lifetimes of [min, max] seconds.
  Rng track_rng(mix_seed(spec.seed, 12));
  const auto len_lo = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(spec.track_min_s * spec.fps)));
  const auto len_hi =
      std::max<std::uint64_t>(len_lo, static_cast<std::uint64_t>(std::llround(spec.track_max_s * spec.fps)));
  std::vector<Track> tracks;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::uint64_t left = counts[c];
    while (left > 0) {
      const auto len = std::min(left, std::uniform_int_distribution<std::uint64_t>(len_lo, len_hi)(track_rng));
      tracks.push_back({classes[c].first, c, len, 0});
      left -= len;
    }
  }
  std::shuffle(tracks.begin(), tracks.end(), track_rng);
  const double mean_len = static_cast<double>(spec.n_objects) / static_cast<double>(tracks.size());
  std::exponential_distribution<double> gap(spec.concurrency / mean_len);
  double clock = 0.0;
  for (auto& t : tracks) {
    t.start = static_cast<std::uint64_t>(clock);
    clock += gap(track_rng);
  }

  std::map<std::uint64_t, std::vector<std::size_t>> frames;
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    for (std::uint64_t a = 0; a < tracks[j].length; ++a) frames[tracks[j].start + a].push_back(j);
  }

  // Feature model: class mean, then track identity, then per-appearance jitter.
  Rng feat_rng(mix_seed(spec.seed, 13));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> class_mean(classes.size(), std::vector<double>(spec.dim));
  for (auto& m : class_mean) {
    for (auto& v : m) v = spec.class_sigma * unit(feat_rng);
  }
  std::vector<std::vector<double>> identity(tracks.size(), std::vector<double>(spec.dim));
  std::vector<std::vector<double>> sig_base(tracks.size(), std::vector<double>(spec.signature_length));
  Rng sig_rng(mix_seed(spec.seed, 14));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    for (std::size_t d = 0; d < spec.dim; ++d) {
      identity[j][d] = class_mean[tracks[j].class_rank][d] + spec.instance_sigma * unit(feat_rng);
    }
    for (auto& v : sig_base[j]) v = u01(sig_rng);
  }

  // Serpentine order inside frames keeps a continuing track at the seam
  // between consecutive frames, which is where near-duplicates can occur.
  std::vector<std::size_t> track_of;
  track_of.reserve(spec.n_objects);
  bool ascending = true;
  for (auto& [frame, ids] : frames) {
    std::sort(ids.begin(), ids.end());
    if (!ascending) std::reverse(ids.begin(), ids.end());
    ascending = !ascending;
    for (auto j : ids) {
      DetectedObject o;
      o.object_id = stream.objects.size();
      o.frame_id = frame;
      o.timestamp_s = static_cast<double>(frame) / spec.fps;
      o.true_class = tracks[j].cls;
      std::vector<double> f(spec.dim);
      for (std::size_t d = 0; d < spec.dim; ++d) f[d] = identity[j][d] + spec.frame_sigma * unit(feat_rng);
      o.feature = FeatureVector(std::move(f));
      stream.objects.push_back(std::move(o));
      track_of.push_back(j);
    }
  }

  const auto n = stream.objects.size();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i < n; ++i) {
    if (track_of[i] == track_of[i - 1] && stream.objects[i].frame_id == stream.objects[i - 1].frame_id + 1) {
      candidates.push_back(i);
    }
  }
  auto want = static_cast<std::size_t>(std::llround(spec.duplicate_rate * static_cast<double>(n)));
  if (spec.cap_duplicates) want = std::min(want, candidates.size());
  if (candidates.size() < want) {
    throw Error(Errc::InvalidSpec, fmt::format("only {} duplicate positions available, {} requested; raise "
                                               "track_max_s or lower concurrency",
                                               candidates.size(), want));
  }
  Rng dup_rng(mix_seed(spec.seed, 15));
  std::shuffle(candidates.begin(), candidates.end(), dup_rng);
  std::vector<bool> is_dup(n, false);
  for (std::size_t i = 0; i < want; ++i) is_dup[candidates[i]] = true;

  std::uniform_real_distribution<double> wiggle(-0.2, 0.2);
  std::uniform_real_distribution<double> near(-spec.duplicate_eps / 2.0, spec.duplicate_eps / 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& sig = stream.objects[i].pixel_signature;
    sig.resize(spec.signature_length);
    if (is_dup[i]) {
      const auto& prev = stream.objects[i - 1].pixel_signature;
      for (std::size_t d = 0; d < sig.size(); ++d) sig[d] = prev[d] + near(sig_rng);
      continue;
    }
    const auto& base = sig_base[track_of[i]];
    const bool adjacent = i > 0 && stream.objects[i].frame_id <= stream.objects[i - 1].frame_id + 1;
    do {
      for (std::size_t d = 0; d < sig.size(); ++d) sig[d] = base[d] + wiggle(sig_rng);
    } while (adjacent && mean_abs_diff(sig, stream.objects[i - 1].pixel_signature) <= spec.duplicate_eps);
  }
  return stream;
}

double nearest_neighbor_same_class(const ObjectStream& stream, std::size_t limit) {
  const auto n = std::min(limit, stream.objects.size());
  if (n < 2) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = squared_l2_distance(stream.objects[i].feature.values(), stream.objects[j].feature.values());
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (stream.objects[best_j].true_class == stream.objects[i].true_class) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(n);
}

}  // namespace focus
