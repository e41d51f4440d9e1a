#include "gripsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "gripsim/common.hpp"

namespace gripsim {

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

CsvWriter& CsvWriter::raw(const std::string& s) {
  if (row_open_) out_ += ',';
  out_ += s;
  row_open_ = true;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  const bool needs_quote = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quote) return raw(s);
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return raw(quoted);
}

void CsvWriter::end_row() {
  out_ += '\n';
  row_open_ = false;
}

void CsvWriter::write(const std::filesystem::path& file) const { write_text(file, out_); }

namespace {

void dump_value(const nlohmann::ordered_json& j, std::string& out, int depth) {
  using value_t = nlohmann::ordered_json::value_t;
  const std::string pad(2 * depth, ' ');
  const std::string pad_in(2 * (depth + 1), ' ');
  switch (j.type()) {
    case value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad_in;
        out += nlohmann::ordered_json(it.key()).dump();
        out += ": ";
        dump_value(it.value(), out, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      return;
    }
    case value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        out += pad_in;
        dump_value(j[i], out, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      return;
    }
    case value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += nlohmann::ordered_json(format_float(v)).dump();
      } else {
        out += format_float(v);
      }
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& j) {
  std::string out;
  dump_value(j, out, 0);
  out += '\n';
  return out;
}

void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& j) {
  write_text(file, dump_json(j));
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + file.string());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw ConfigError("write failed: " + file.string());
}

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("GRIPSIM_LOG");
    if (!env) return LogLevel::Error;
    const std::string s(env);
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  const char* tag = level == LogLevel::Error ? "error" : (level == LogLevel::Info ? "info" : "debug");
  std::fprintf(stderr, "[gripsim %s] %s\n", tag, msg.c_str());
}

}  // namespace gripsim
