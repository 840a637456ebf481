#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "focus/types.hpp"

namespace focus {

struct StreamHeader {
  std::string stream_id = "stream";
  double fps = 30.0;
  std::size_t dim = 64;
  std::uint32_t vocabulary = 1000;
  std::size_t signature_length = 16;

  bool operator==(const StreamHeader&) const = default;
};

/// An ordered sequence of detected objects plus its header. Frames with no
/// moving objects are simply absent.
struct ObjectStream {
  StreamHeader header;
  std::vector<DetectedObject> objects;

  /// Checks ordering and dimension invariants; throws on violation.
  void validate() const;

  std::string to_text() const;
  static ObjectStream parse(std::string_view text);
  static ObjectStream load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Object lookup by id, used by the query-time ground-truth verifier.
class ObjectStore {
 public:
  explicit ObjectStore(std::span<const DetectedObject> objects);
  explicit ObjectStore(const ObjectStream& stream) : ObjectStore(std::span<const DetectedObject>(stream.objects)) {}
  const DetectedObject& at(ObjectId id) const;
  std::size_t size() const noexcept { return objects_.size(); }

 private:
  std::span<const DetectedObject> objects_;
  std::vector<std::pair<ObjectId, std::size_t>> by_id_;
};

/// GT-label histogram over a stream.
std::map<ClassId, std::uint64_t> class_histogram(const ObjectStream& stream);

}  // namespace focus
