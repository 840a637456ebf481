#include "focus/text_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "focus/error.hpp"

namespace focus::text {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

namespace {

template <typename T>
T parse_number(std::string_view s, const char* what) {
  s = trim(s);
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(Errc::FormatError, fmt::format("cannot parse {} from '{}'", what, s));
  }
  return value;
}

}  // namespace

double parse_double(std::string_view s) { return parse_number<double>(s, "real"); }
std::uint64_t parse_u64(std::string_view s) { return parse_number<std::uint64_t>(s, "integer"); }
std::uint32_t parse_u32(std::string_view s) { return parse_number<std::uint32_t>(s, "integer"); }

std::vector<double> parse_double_csv(std::string_view s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (auto part : split(s, ',')) out.push_back(parse_double(part));
  return out;
}

std::vector<std::uint64_t> parse_u64_csv(std::string_view s) {
  std::vector<std::uint64_t> out;
  if (trim(s).empty()) return out;
  for (auto part : split(s, ',')) out.push_back(parse_u64(part));
  return out;
}

std::string format_sig9(double v) {
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.9g}", v);
}

std::string format_fixed6(double v) { return fmt::format("{:.6f}", v); }

std::string join_sig9(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += format_sig9(values[i]);
  }
  return out;
}

std::string join_u64(std::span<const std::uint64_t> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(values[i]);
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(std::string_view body) {
  std::map<std::string, std::string> out;
  for (auto raw : split(body, '\n')) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::FormatError, fmt::format("expected key=value, got '{}'", line));
    }
    out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::IoError, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "rename to '" + path.string() + "' failed: " + ec.message());
}

}  // namespace focus::text
