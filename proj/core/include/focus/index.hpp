#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "focus/clustering.hpp"
#include "focus/config.hpp"
#include "focus/types.hpp"

namespace focus {

struct IndexHeader {
  std::string stream_id;
  std::size_t dim = 0;
  std::uint32_t vocabulary = 1000;
  std::uint64_t objects = 0;
  Config config;
  /// Kept classes of a specialized ingest profile (without OTHER); empty for
  /// generic profiles. Queries for classes outside it go through OTHER.
  std::vector<ClassId> specialized_classes;

  bool operator==(const IndexHeader&) const = default;
};

/// Class -> cluster postings plus the sealed cluster records.
class TopKIndex {
 public:
  TopKIndex() = default;

  static TopKIndex build(std::vector<Cluster> clusters, IndexHeader header);

  /// Clusters listing `cls` at best rank <= k_x, ascending.
  std::vector<ClusterId> lookup(ClassId cls, std::uint32_t k_x) const;
  std::span<const ClusterId> postings(ClassId cls) const;

  const IndexHeader& header() const noexcept { return header_; }
  const Cluster& cluster(ClusterId id) const;
  const std::map<ClusterId, Cluster>& clusters() const noexcept { return clusters_; }
  const std::map<ClassId, std::vector<ClusterId>>& all_postings() const noexcept { return postings_; }

  bool is_specialized() const noexcept { return !header_.specialized_classes.empty(); }
  /// Whether `cls` is answered by its own postings rather than via OTHER.
  bool indexes_directly(ClassId cls) const;

  /// Cluster records plus posting entries.
  std::size_t record_count() const noexcept;

  std::string to_text() const;
  static TopKIndex parse(std::string_view text);
  static TopKIndex load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const TopKIndex&) const = default;

 private:
  IndexHeader header_;
  std::map<ClusterId, Cluster> clusters_;
  std::map<ClassId, std::vector<ClusterId>> postings_;
};

}  // namespace focus
