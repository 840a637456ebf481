#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small helpers shared by the line-oriented file formats.
namespace focus::text {

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

double parse_double(std::string_view s);
std::uint64_t parse_u64(std::string_view s);
std::uint32_t parse_u32(std::string_view s);
std::vector<double> parse_double_csv(std::string_view s);
std::vector<std::uint64_t> parse_u64_csv(std::string_view s);

/// Nine significant digits; parse(format(x)) re-formats to the same text.
std::string format_sig9(double v);
/// Fixed six decimals, used by the config and profile formats.
std::string format_fixed6(double v);
std::string join_sig9(std::span<const double> values);
std::string join_u64(std::span<const std::uint64_t> values);

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
std::map<std::string, std::string> parse_key_values(std::string_view body);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file then renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace focus::text
