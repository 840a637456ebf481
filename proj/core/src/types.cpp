#include "focus/types.hpp"

#include <cassert>
#include <cmath>

#include "focus/error.hpp"

namespace focus {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownProfile: return "UnknownProfile";
    case Errc::KOutOfRange: return "KOutOfRange";
    case Errc::NonPositiveM: return "NonPositiveM";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::MissingTrueClass: return "MissingTrueClass";
    case Errc::EmptyHistogram: return "EmptyHistogram";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DuplicateClusterId: return "DuplicateClusterId";
    case Errc::KxTooLarge: return "KxTooLarge";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::NonMonotoneSchedule: return "NonMonotoneSchedule";
    case Errc::SignatureLengthMismatch: return "SignatureLengthMismatch";
    case Errc::EmptySample: return "EmptySample";
    case Errc::NoViableConfig: return "NoViableConfig";
    case Errc::EmptyViableSet: return "EmptyViableSet";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::IoError: return "IoError";
    case Errc::FormatError: return "FormatError";
    case Errc::FormatVersionMismatch: return "FormatVersionMismatch";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

std::uint32_t encode_class(ClassId c, std::uint32_t vocabulary) noexcept {
  return c.is_other() ? vocabulary : c.value;
}

ClassId decode_class(std::uint32_t raw, std::uint32_t vocabulary) noexcept {
  return raw == vocabulary ? kOtherClass : ClassId{raw};
}

std::string class_label(ClassId c) {
  return c.is_other() ? std::string("OTHER") : std::to_string(c.value);
}

double squared_l2_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_l2_distance(a, b));
}

double CostModel::cost_of(const std::string& profile_id) const {
  auto it = cost_per_inference.find(profile_id);
  if (it == cost_per_inference.end()) {
    throw Error(Errc::UnknownProfile, "no cost registered for profile '" + profile_id + "'");
  }
  return it->second;
}

}  // namespace focus
