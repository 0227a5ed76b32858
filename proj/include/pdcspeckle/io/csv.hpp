#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../error.hpp"

namespace pdcspeckle {

/// RFC 4180 table preceded by `#` comment lines. Line endings are CRLF.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name, or npos.
  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::string::npos;
  }
};

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_csv(const CsvTable& t) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(fields[i]);
    }
    out += "\r\n";
  };
  for (const auto& c : t.comments) out += "# " + c + "\r\n";
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

/// Parses a table; `#` lines before the header are collected as comments, and `#` lines
/// after it are skipped. Quoted fields may contain commas, quotes and line breaks.
inline CsvTable parse_csv(std::string_view text, const std::string& source = "<csv>") {
  CsvTable t;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool at_line_start = true;
  bool have_header = false;
  auto finish_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    if (!have_header) {
      t.header = std::move(record);
      have_header = true;
    } else {
      t.rows.push_back(std::move(record));
    }
    record.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (at_line_start && !in_quotes && c == '#') {
      const auto nl = text.find('\n', i);
      std::string_view body = text.substr(i + 1, nl == std::string_view::npos ? std::string_view::npos : nl - i - 1);
      if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      if (!have_header) t.comments.emplace_back(body);
      i = nl == std::string_view::npos ? text.size() : nl + 1;
      continue;
    }
    at_line_start = false;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty()) throw IoError("malformed CSV " + source + ": quote inside unquoted field");
      in_quotes = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      finish_record();
      at_line_start = true;
    } else {
      field += c;
    }
    ++i;
  }
  if (in_quotes) throw IoError("malformed CSV " + source + ": unterminated quoted field");
  if (!at_line_start) finish_record();
  if (!have_header) throw IoError("malformed CSV " + source + ": no header row");
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) {
      throw IoError("malformed CSV " + source + ": row width differs from header");
    }
  }
  return t;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pdcspeckle
