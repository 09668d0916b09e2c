#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bakelabel/error.hpp"

namespace bakelabel {

using Json = nlohmann::json;

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) fail(ErrorKind::validation, "cannot format number");
  return std::string(buf, end);
}

/// Fixed-point formatting for human-facing tables.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  if (ec != std::errc{}) fail(ErrorKind::validation, "cannot format number");
  return std::string(buf, end);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, path.string() + ": read failed");
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorKind::io, path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail(ErrorKind::io, path.string() + ": write failed");
}

/// Canonical text form of a JSON document: sorted keys, two-space indent,
/// trailing newline.
inline std::string dump_canonical(const Json& doc) { return doc.dump(2) + "\n"; }

/// Single-line canonical form used for line-delimited streams.
inline std::string dump_line(const Json& record) { return record.dump() + "\n"; }

inline Json parse_document(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < upto; ++i) {
      if (text[i] == '\n') ++line;
    }
    fail(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + e.what());
  }
}

/// Calls `fn(record, line_number)` for each non-blank line of a line-delimited
/// JSON stream. Objects carrying a "header" key are provenance metadata and
/// are skipped.
inline void for_each_record(std::istream& in, const std::string& source,
                            const std::function<void(const Json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      fail(ErrorKind::parse, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      fail(ErrorKind::schema, source + ":" + std::to_string(line_no) + ": record is not an object");
    }
    if (record.contains("header")) continue;
    fn(record, line_no);
  }
}

namespace field {

inline std::string where(const std::string& ctx, std::string_view key) {
  return ctx + ": field '" + std::string(key) + "'";
}

inline const Json& require(const Json& obj, std::string_view key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) fail(ErrorKind::schema, where(ctx, key) + " is missing");
  return *it;
}

inline std::string get_string(const Json& obj, std::string_view key, const std::string& ctx) {
  const Json& v = require(obj, key, ctx);
  if (!v.is_string()) fail(ErrorKind::schema, where(ctx, key) + " must be a string");
  return v.get<std::string>();
}

inline long long get_int(const Json& obj, std::string_view key, const std::string& ctx) {
  const Json& v = require(obj, key, ctx);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == static_cast<double>(static_cast<long long>(d))) {
      return static_cast<long long>(d);
    }
  }
  fail(ErrorKind::schema, where(ctx, key) + " must be an integer");
}

inline double get_number(const Json& v, const std::string& what) {
  if (!v.is_number()) fail(ErrorKind::schema, what + " must be a number");
  return v.get<double>();
}

inline double get_number(const Json& obj, std::string_view key, const std::string& ctx) {
  return get_number(require(obj, key, ctx), where(ctx, key));
}

inline bool has(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it != obj.end() && !it->is_null();
}

}  // namespace field

}  // namespace bakelabel
