#include "focus/index.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <zlib.h>

#include "focus/error.hpp"
#include "focus/text_io.hpp"

namespace focus {

namespace {

constexpr std::string_view kMagic = "FOCUSIDX/1";
constexpr std::string_view kMagicPrefix = "FOCUSIDX/";
constexpr std::string_view kClustersMarker = "[CLUSTERS]";
constexpr std::string_view kPostingsMarker = "[POSTINGS]";
constexpr std::string_view kCrcPrefix = "CRC32:";

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks to stay portable for large files.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto len = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

TopKIndex TopKIndex::build(std::vector<Cluster> clusters, IndexHeader header) {
  TopKIndex idx;
  idx.header_ = std::move(header);
  std::sort(idx.header_.specialized_classes.begin(), idx.header_.specialized_classes.end());
  for (auto& c : clusters) {
    const auto id = c.cluster_id;
    c.sealed = true;
    if (!idx.clusters_.emplace(id, std::move(c)).second) {
      throw Error(Errc::DuplicateClusterId, fmt::format("cluster id {} appears twice", id));
    }
  }
  // clusters_ iterates ascending, so every posting list comes out sorted.
  for (const auto& [id, c] : idx.clusters_) {
    for (const auto& [cls, rank] : c.class_ranks) idx.postings_[cls].push_back(id);
  }
  return idx;
}

std::vector<ClusterId> TopKIndex::lookup(ClassId cls, std::uint32_t k_x) const {
  if (k_x < 1 || k_x > header_.config.k) {
    throw Error(Errc::KxTooLarge, fmt::format("k_x={} outside [1, {}]", k_x, header_.config.k));
  }
  std::vector<ClusterId> out;
  for (auto id : postings(cls)) {
    if (clusters_.at(id).class_ranks.at(cls) <= k_x) out.push_back(id);
  }
  return out;
}

std::span<const ClusterId> TopKIndex::postings(ClassId cls) const {
  auto it = postings_.find(cls);
  if (it == postings_.end()) return {};
  return it->second;
}

const Cluster& TopKIndex::cluster(ClusterId id) const {
  auto it = clusters_.find(id);
  if (it == clusters_.end()) throw Error(Errc::FormatError, fmt::format("no cluster {}", id));
  return it->second;
}

bool TopKIndex::indexes_directly(ClassId cls) const {
  if (!is_specialized()) return !cls.is_other();
  if (cls.is_other()) return true;
  return std::binary_search(header_.specialized_classes.begin(), header_.specialized_classes.end(), cls);
}

std::size_t TopKIndex::record_count() const noexcept {
  std::size_t n = clusters_.size();
  for (const auto& [_, ids] : postings_) n += ids.size();
  return n;
}

std::string TopKIndex::to_text() const {
  const auto v = header_.vocabulary;
  std::string out;
  out += kMagic;
  out += '\n';
  out += fmt::format("stream_id={}\ndim={}\nvocabulary={}\nobjects={}\n", header_.stream_id, header_.dim, v,
                     header_.objects);
  out += header_.config.to_text();
  std::vector<std::uint64_t> spec;
  for (auto c : header_.specialized_classes) spec.push_back(encode_class(c, v));
  out += fmt::format("specialized_classes={}\nclusters={}\n", text::join_u64(spec), clusters_.size());

  out += kClustersMarker;
  out += '\n';
  for (const auto& [id, c] : clusters_) {
    out += fmt::format("{}|{}|", id, c.centroid_member_id);
    out += text::join_sig9(c.centroid.values());
    out += '|';
    out += text::join_u64(c.member_object_ids);
    out += '|';
    out += text::join_u64(c.frame_ids);
    out += '|';
    bool first = true;
    for (const auto& [cls, rank] : c.class_ranks) {
      if (!first) out += ',';
      first = false;
      out += fmt::format("{}:{}", encode_class(cls, v), rank);
    }
    out += '\n';
  }
  out += kPostingsMarker;
  out += '\n';
  for (const auto& [cls, ids] : postings_) {
    out += fmt::format("{}|", encode_class(cls, v));
    out += text::join_u64(ids);
    out += '\n';
  }
  out += fmt::format("{}{:08x}\n", kCrcPrefix, crc_of(out));
  return out;
}

TopKIndex TopKIndex::parse(std::string_view body) {
  if (!body.starts_with(kMagicPrefix)) throw Error(Errc::FormatError, "not a focus index file");
  const auto first_nl = body.find('\n');
  const auto magic = text::trim(body.substr(0, first_nl));
  if (magic != kMagic) {
    throw Error(Errc::FormatVersionMismatch, fmt::format("unsupported index version '{}'", magic));
  }

  // The checksum line is last; everything before it is covered.
  auto content = body;
  while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) content.remove_suffix(1);
  const auto crc_line_start = content.rfind('\n');
  if (crc_line_start == std::string_view::npos) throw Error(Errc::ChecksumMismatch, "index has no checksum");
  const auto crc_line = text::trim(content.substr(crc_line_start + 1));
  if (!crc_line.starts_with(kCrcPrefix)) throw Error(Errc::ChecksumMismatch, "index checksum line missing");
  const auto covered = body.substr(0, crc_line_start + 1);
  const auto hex = crc_line.substr(kCrcPrefix.size());
  std::uint32_t stored = 0;
  {
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), stored, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size()) {
      throw Error(Errc::ChecksumMismatch, "index checksum is not hexadecimal");
    }
  }
  if (stored != crc_of(covered)) throw Error(Errc::ChecksumMismatch, "index checksum does not match contents");

  const auto lines = text::split(covered, '\n');
  std::size_t i = 1;
  std::string header_text;
  for (; i < lines.size() && text::trim(lines[i]) != kClustersMarker; ++i) {
    header_text.append(lines[i]);
    header_text.push_back('\n');
  }
  if (i == lines.size()) throw Error(Errc::FormatError, "index lacks [CLUSTERS] section");
  auto kv = text::parse_key_values(header_text);
  auto take = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(Errc::FormatError, fmt::format("index header missing '{}'", key));
    auto value = it->second;
    kv.erase(it);
    return value;
  };

  IndexHeader h;
  h.stream_id = take("stream_id");
  h.dim = text::parse_u64(take("dim"));
  h.vocabulary = text::parse_u32(take("vocabulary"));
  h.objects = text::parse_u64(take("objects"));
  const auto v = h.vocabulary;
  for (auto raw : text::parse_u64_csv(take("specialized_classes"))) {
    h.specialized_classes.push_back(decode_class(static_cast<std::uint32_t>(raw), v));
  }
  const auto declared_clusters = text::parse_u64(take("clusters"));
  std::string cfg_text;
  for (const auto& [key, value] : kv) cfg_text += fmt::format("{}={}\n", key, value);
  h.config = Config::parse(cfg_text);

  std::vector<Cluster> clusters;
  for (++i; i < lines.size() && text::trim(lines[i]) != kPostingsMarker; ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = text::split(line, '|');
    if (f.size() != 6) throw Error(Errc::FormatError, "cluster record needs 6 fields");
    Cluster c;
    c.cluster_id = text::parse_u64(f[0]);
    c.centroid_member_id = text::parse_u64(f[1]);
    c.centroid = FeatureVector(text::parse_double_csv(f[2]));
    c.member_object_ids = text::parse_u64_csv(f[3]);
    c.frame_ids = text::parse_u64_csv(f[4]);
    c.sealed = true;
    if (c.centroid.dimension() != h.dim) {
      throw Error(Errc::DimensionMismatch, fmt::format("cluster {} centroid dimension mismatch", c.cluster_id));
    }
    if (c.member_object_ids.empty() || c.member_object_ids.size() != c.frame_ids.size()) {
      throw Error(Errc::FormatError, fmt::format("cluster {} has inconsistent members", c.cluster_id));
    }
    if (!text::trim(f[5]).empty()) {
      for (auto entry : text::split(f[5], ',')) {
        const auto colon = entry.find(':');
        if (colon == std::string_view::npos) throw Error(Errc::FormatError, "class entry needs class:rank");
        const auto cls = decode_class(text::parse_u32(entry.substr(0, colon)), v);
        c.class_ranks[cls] = text::parse_u32(entry.substr(colon + 1));
      }
    }
    clusters.push_back(std::move(c));
  }
  if (i == lines.size()) throw Error(Errc::FormatError, "index lacks [POSTINGS] section");
  if (clusters.size() != declared_clusters) throw Error(Errc::FormatError, "cluster count mismatch");

  auto idx = build(std::move(clusters), std::move(h));
  // Stored postings must agree with the ones implied by the cluster records.
  std::map<ClassId, std::vector<ClusterId>> stored_postings;
  for (++i; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = text::split(line, '|');
    if (f.size() != 2) throw Error(Errc::FormatError, "posting record needs 2 fields");
    stored_postings[decode_class(text::parse_u32(f[0]), v)] = text::parse_u64_csv(f[1]);
  }
  if (stored_postings != idx.postings_) {
    throw Error(Errc::FormatError, "postings disagree with cluster class sets");
  }
  return idx;
}

TopKIndex TopKIndex::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

void TopKIndex::save(const std::filesystem::path& path) const { text::write_file_atomic(path, to_text()); }

}  // namespace focus
