#include "focus/stream.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/text_io.hpp"

namespace focus {

namespace {
constexpr std::string_view kMagic = "FOCUSSTREAM/1";
constexpr std::string_view kObjectsMarker = "[OBJECTS]";
}  // namespace

void ObjectStream::validate() const {
  if (header.fps < 1.0) throw Error(Errc::InvalidSpec, "fps must be at least 1");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.feature.dimension() != header.dim) {
      throw Error(Errc::DimensionMismatch, fmt::format("object {} has feature dimension {}, stream declares {}",
                                                       o.object_id, o.feature.dimension(), header.dim));
    }
    if (o.pixel_signature.size() != header.signature_length) {
      throw Error(Errc::SignatureLengthMismatch, fmt::format("object {} signature length {}, stream declares {}",
                                                             o.object_id, o.pixel_signature.size(),
                                                             header.signature_length));
    }
    if (i > 0) {
      const auto& prev = objects[i - 1];
      if (o.object_id <= prev.object_id) {
        throw Error(Errc::FormatError, fmt::format("object ids must strictly increase ({} after {})",
                                                   o.object_id, prev.object_id));
      }
      if (o.frame_id < prev.frame_id) {
        throw Error(Errc::FormatError, fmt::format("frame ids must not decrease (object {})", o.object_id));
      }
    }
  }
}

std::string ObjectStream::to_text() const {
  std::string out;
  out.reserve(objects.size() * (header.dim + header.signature_length) * 12 + 256);
  out += kMagic;
  out += '\n';
  out += fmt::format("stream_id={}\nfps={}\ndim={}\nvocabulary={}\nsignature_length={}\nobjects={}\n",
                     header.stream_id, text::format_sig9(header.fps), header.dim, header.vocabulary,
                     header.signature_length, objects.size());
  out += kObjectsMarker;
  out += '\n';
  for (const auto& o : objects) {
    out += std::to_string(o.object_id);
    out += '|';
    out += std::to_string(o.frame_id);
    out += '|';
    out += o.true_class ? std::to_string(encode_class(*o.true_class, header.vocabulary)) : std::string("-");
    out += '|';
    out += text::join_sig9(o.pixel_signature);
    out += '|';
    out += text::join_sig9(o.feature.values());
    out += '\n';
  }
  return out;
}

ObjectStream ObjectStream::parse(std::string_view body) {
  const auto lines = text::split(body, '\n');
  if (lines.empty() || text::trim(lines[0]) != kMagic) {
    throw Error(Errc::FormatError, "not a focus stream file (missing FOCUSSTREAM/1)");
  }
  std::size_t i = 1;
  std::string header_text;
  for (; i < lines.size() && text::trim(lines[i]) != kObjectsMarker; ++i) {
    header_text.append(lines[i]);
    header_text.push_back('\n');
  }
  if (i == lines.size()) throw Error(Errc::FormatError, "stream file lacks [OBJECTS] section");
  const auto kv = text::parse_key_values(header_text);
  auto req = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(Errc::FormatError, fmt::format("stream header missing '{}'", key));
    return it->second;
  };

  ObjectStream s;
  s.header.stream_id = req("stream_id");
  s.header.fps = text::parse_double(req("fps"));
  s.header.dim = text::parse_u64(req("dim"));
  s.header.vocabulary = text::parse_u32(req("vocabulary"));
  s.header.signature_length = text::parse_u64(req("signature_length"));
  const auto declared = kv.count("objects") ? text::parse_u64(kv.at("objects")) : 0;

  for (++i; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = text::split(line, '|');
    if (fields.size() != 5) {
      throw Error(Errc::FormatError, fmt::format("stream record needs 5 fields: '{}'", line.substr(0, 60)));
    }
    DetectedObject o;
    o.object_id = text::parse_u64(fields[0]);
    o.frame_id = text::parse_u64(fields[1]);
    o.timestamp_s = static_cast<double>(o.frame_id) / s.header.fps;
    if (text::trim(fields[2]) != "-") {
      const auto raw = text::parse_u32(fields[2]);
      if (raw >= s.header.vocabulary) {
        throw Error(Errc::FormatError, fmt::format("object {} class {} outside vocabulary", o.object_id, raw));
      }
      o.true_class = ClassId{raw};
    }
    o.pixel_signature = text::parse_double_csv(fields[3]);
    o.feature = FeatureVector(text::parse_double_csv(fields[4]));
    s.objects.push_back(std::move(o));
  }
  if (kv.count("objects") && declared != s.objects.size()) {
    throw Error(Errc::FormatError, fmt::format("stream declares {} objects, found {}", declared, s.objects.size()));
  }
  s.validate();
  return s;
}

ObjectStream ObjectStream::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

void ObjectStream::save(const std::filesystem::path& path) const { text::write_file_atomic(path, to_text()); }

ObjectStore::ObjectStore(std::span<const DetectedObject> objects) : objects_(objects) {
  by_id_.reserve(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) by_id_.emplace_back(objects[i].object_id, i);
  std::sort(by_id_.begin(), by_id_.end());
}

const DetectedObject& ObjectStore::at(ObjectId id) const {
  auto it = std::lower_bound(by_id_.begin(), by_id_.end(), std::make_pair(id, std::size_t{0}));
  if (it == by_id_.end() || it->first != id) {
    throw Error(Errc::FormatError, fmt::format("object {} not present in the stream", id));
  }
  return objects_[it->second];
}

std::map<ClassId, std::uint64_t> class_histogram(const ObjectStream& stream) {
  std::map<ClassId, std::uint64_t> h;
  for (const auto& o : stream.objects) {
    if (o.true_class) ++h[*o.true_class];
  }
  return h;
}

}  // namespace focus
