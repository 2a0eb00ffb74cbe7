#pragma once

#include <array>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "counqer/rdf.hpp"

namespace counqer::text {

/// Tokens marking a count: "numberOfChildren", "staffSize", "total goals".
inline constexpr std::array<std::string_view, 7> kCountMarkers = {
    "number", "num", "count", "total", "size", "amount", "quantity"};

inline bool is_count_marker(std::string_view token) {
  for (auto m : kCountMarkers)
    if (token == m) return true;
  return false;
}

/// Lowercased word tokens of a predicate label. IRIs are reduced to their
/// local name first; words break at camelCase humps, '_', '-' and whitespace.
inline std::vector<std::string> tokenize(std::string_view label) {
  std::string source = is_absolute_iri(label) ? local_name(label) : std::string(label);
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  auto lower = [](char c) { return c >= 'a' && c <= 'z'; };
  auto upper = [](char c) { return c >= 'A' && c <= 'Z'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  for (std::size_t i = 0; i < source.size(); ++i) {
    char c = source[i];
    if (c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    if (upper(c) && !cur.empty()) {
      char prev = source[i - 1];
      bool hump = lower(prev) || digit(prev);
      // "HTMLParser": break before the 'P' that starts a lowercase run.
      bool acronym_end = upper(prev) && i + 1 < source.size() && lower(source[i + 1]);
      if (hump || acronym_end) flush();
    }
    cur += upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
  }
  flush();
  return tokens;
}

inline bool has_count_token(std::string_view label) {
  for (const auto& t : tokenize(label))
    if (is_count_marker(t)) return true;
  return false;
}

/// Irregular plurals first, then "-ies" -> "y", then a trailing "s" on
/// tokens longer than three characters.
inline std::string singularize(std::string token) {
  static constexpr std::pair<std::string_view, std::string_view> kIrregular[] = {
      {"children", "child"}, {"people", "person"}, {"men", "man"}, {"women", "woman"}};
  for (auto [plural, singular] : kIrregular)
    if (token == plural) return std::string(singular);
  if (token.size() > 3 && token.ends_with("ies")) {
    token.resize(token.size() - 3);
    token += 'y';
    return token;
  }
  if (token.size() > 3 && token.back() == 's') token.pop_back();
  return token;
}

/// Content-word set of a label for lexical matching: count markers and
/// {of, the, has} removed, every token singularized.
inline std::set<std::string> content_words(std::string_view label) {
  std::set<std::string> out;
  for (auto& t : tokenize(label)) {
    if (is_count_marker(t) || t == "of" || t == "the" || t == "has") continue;
    out.insert(singularize(std::move(t)));
  }
  return out;
}

}  // namespace counqer::text
