#pragma once
// File formats: trace streams, representative-set documents and small
// text helpers shared by the CLI and the dataset/regression writers.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "baseplace/pattern.hpp"

namespace baseplace {

inline constexpr int kFormatVersion = 1;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(file), line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

std::string format_g17(double v);
std::vector<double> parse_csv_doubles(std::string_view line);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string digest(std::string_view bytes);

/// {format_version, tool_version, config_digest}
nlohmann::json provenance(const std::string& config_digest);

// One JSON object per line: {"t": s, "arm": "L"|"R", "p": [x,y,z], "q": [w,x,y,z]}.
struct TraceRecord {
  double t = 0.0;
  std::string arm = "R";
  Pose pose;
};

std::string trace_line(const TraceRecord& r);
TraceRecord parse_trace_line(std::string_view line);
void write_traces(const std::filesystem::path& path, const std::vector<TraceRecord>& records);
/// Streams records to `sink`; malformed lines raise ParseError with the line number.
std::size_t read_traces(const std::filesystem::path& path,
                        const std::function<void(const TraceRecord&)>& sink);

nlohmann::json repset_to_json(const RepresentativeSet& s);
RepresentativeSet repset_from_json(const nlohmann::json& j);

}  // namespace baseplace
