#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gripsim {

// Deterministic text output: every float is rendered with %.9g, lines end
// with LF, and CSV fields follow RFC 4180 quoting. Two runs on the same
// input must produce byte-identical files.

std::string format_float(double v);

class CsvWriter {
 public:
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(const char* s) { return cell(std::string(s)); }
  CsvWriter& cell(double v) { return raw(format_float(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(long v) { return raw(std::to_string(v)); }
  CsvWriter& cell(bool v) { return raw(v ? "true" : "false"); }
  void end_row();
  const std::string& str() const { return out_; }
  void write(const std::filesystem::path& file) const;

 private:
  CsvWriter& raw(const std::string& s);
  std::string out_;
  bool row_open_ = false;
};

// Serializes JSON with %.9g floats (non-finite values become the strings
// "inf"/"-inf"/"nan"), 2-space indentation and a trailing newline.
std::string dump_json(const nlohmann::ordered_json& j);
void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& j);

void write_text(const std::filesystem::path& file, const std::string& text);

// stderr logger gated by GRIPSIM_LOG in {error, info, debug}; default error.
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };
LogLevel log_level();
void log(LogLevel level, const std::string& msg);
inline void log_info(const std::string& msg) { log(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::Debug, msg); }

}  // namespace gripsim
