#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "counqer/error.hpp"

namespace counqer::tsv {

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

/// Joins cells with tabs. Tabs and line breaks inside a cell become spaces.
inline std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += '\t';
    for (char c : cells[i]) out += (c == '\t' || c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

/// Fixed six-decimal rendering used by every TSV table.
inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fixed6(const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); }

inline std::string boolean(bool b) { return b ? "true" : "false"; }

/// Reads a header-led table. Rows must have exactly the header's column count.
class Reader {
 public:
  Reader(std::istream& in, std::vector<std::string> expected_header, std::string what)
      : in_(in), what_(std::move(what)) {
    std::string line;
    if (!std::getline(in_, line)) throw ValidationError(what_ + ": missing header");
    strip_cr(line);
    if (split(line) != expected_header)
      throw ValidationError(what_ + ": unexpected header '" + line + "'");
    columns_ = expected_header.size();
  }

  /// Next data row, or nullopt at end of input. Blank lines are ignored.
  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      auto cells = split(line);
      if (cells.size() != columns_)
        fail("expected " + std::to_string(columns_) + " columns, got " +
             std::to_string(cells.size()));
      return cells;
    }
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError(what_ + " row " + std::to_string(line_no_) + ": " + why);
  }

  bool parse_bool(const std::string& s) const {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    fail("bad boolean '" + s + "'");
  }

  double parse_double(const std::string& s) const {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("bad number '" + s + "'");
    return v;
  }

  std::optional<double> parse_optional_double(const std::string& s) const {
    if (s.empty()) return std::nullopt;
    return parse_double(s);
  }

  std::uint64_t parse_uint(const std::string& s) const {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

  std::optional<std::uint64_t> parse_optional_uint(const std::string& s) const {
    if (s.empty()) return std::nullopt;
    return parse_uint(s);
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  std::string what_;
  std::size_t columns_ = 0;
  std::size_t line_no_ = 1;
};

}  // namespace counqer::tsv
