#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "counqer/error.hpp"
#include "counqer/rdf.hpp"

namespace counqer {

enum class ParseMode { Lenient, Strict };

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

/// Recursive-descent reader over one N-Triples line. Every method returns
/// nullopt / false on a grammar violation and records why.
class LineReader {
 public:
  explicit LineReader(std::string_view line) : s_(line) {}

  std::optional<Triple> triple() {
    skip_ws();
    auto subject = resource();
    if (!subject) return std::nullopt;
    skip_ws();
    auto predicate = iriref();
    if (!predicate) return std::nullopt;
    skip_ws();
    auto object = term();
    if (!object) return std::nullopt;
    skip_ws();
    if (!eat('.')) return fail("expected terminal '.'");
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') return fail("trailing characters after '.'");
    return Triple{std::move(*subject), std::move(*predicate), std::move(*object)};
  }

  const std::string& error() const { return error_; }

 private:
  std::nullopt_t fail(std::string why) {
    if (error_.empty()) error_ = std::move(why);
    return std::nullopt;
  }

  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::optional<std::uint32_t> hex(std::size_t digits) {
    if (pos_ + digits > s_.size()) return std::nullopt;
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < digits; ++i) {
      char c = s_[pos_ + i];
      v <<= 4;
      if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
      else return std::nullopt;
    }
    pos_ += digits;
    return v;
  }

  std::optional<std::string> iriref() {
    if (!eat('<')) return fail("expected '<'");
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '>') {
      char c = s_[pos_++];
      if (c == '\\') {
        std::optional<std::uint32_t> cp;
        if (eat('u')) cp = hex(4);
        else if (eat('U')) cp = hex(8);
        if (!cp) return fail("bad escape in IRI");
        append_utf8(out, *cp);
      } else {
        out += c;
      }
    }
    if (!eat('>')) return fail("unterminated IRI");
    if (!is_absolute_iri(out)) return fail("not an absolute IRI: " + out);
    return out;
  }

  std::optional<std::string> blank_label() {
    if (!(eat('_') && eat(':'))) return fail("expected blank node");
    std::size_t start = pos_;
    auto label_char = [](char c) {
      auto u = static_cast<unsigned char>(c);
      return std::isalnum(u) || c == '_' || c == '-' || c == '.' || u >= 0x80;
    };
    while (pos_ < s_.size() && label_char(s_[pos_])) ++pos_;
    // A label may contain '.' but not end with one.
    while (pos_ > start && s_[pos_ - 1] == '.') --pos_;
    if (pos_ == start) return fail("empty blank node label");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::optional<Term> resource() {
    if (pos_ < s_.size() && s_[pos_] == '<') {
      auto i = iriref();
      if (!i) return std::nullopt;
      return Term::iri(std::move(*i));
    }
    if (pos_ < s_.size() && s_[pos_] == '_') {
      auto b = blank_label();
      if (!b) return std::nullopt;
      return Term::blank(std::move(*b));
    }
    return fail("expected IRI or blank node");
  }

  std::optional<Term> term() {
    if (pos_ < s_.size() && s_[pos_] == '"') return literal();
    return resource();
  }

  std::optional<Term> literal() {
    eat('"');
    std::string lex;
    while (true) {
      if (pos_ >= s_.size()) return fail("unterminated literal");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        lex += c;
        continue;
      }
      if (pos_ >= s_.size()) return fail("dangling escape");
      char e = s_[pos_++];
      switch (e) {
        case 't': lex += '\t'; break;
        case 'b': lex += '\b'; break;
        case 'n': lex += '\n'; break;
        case 'r': lex += '\r'; break;
        case 'f': lex += '\f'; break;
        case '"': lex += '"'; break;
        case '\'': lex += '\''; break;
        case '\\': lex += '\\'; break;
        case 'u':
        case 'U': {
          auto cp = hex(e == 'u' ? 4 : 8);
          if (!cp) return fail("bad unicode escape");
          append_utf8(lex, *cp);
          break;
        }
        default:
          return fail("unknown escape");
      }
    }
    if (eat('@')) {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-'))
        ++pos_;
      if (pos_ == start) return fail("empty language tag");
      return Term::literal(std::move(lex), {}, std::string(s_.substr(start, pos_ - start)));
    }
    if (pos_ + 1 < s_.size() && s_[pos_] == '^' && s_[pos_ + 1] == '^') {
      pos_ += 2;
      auto dt = iriref();
      if (!dt) return std::nullopt;
      return Term::literal(std::move(lex), std::move(*dt));
    }
    return Term::literal(std::move(lex));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string error_;
};

inline bool blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c == '#';
  }
  return true;
}

}  // namespace detail

/// Parses a single N-Triples statement. Throws ParseError (line 0) on failure.
inline Triple parse_ntriples_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  detail::LineReader reader(line);
  auto t = reader.triple();
  if (!t) throw ParseError(0, reader.error());
  return std::move(*t);
}

struct NTriplesReadResult {
  std::vector<Triple> triples;
  std::size_t lines = 0;    // physical lines read
  std::size_t skipped = 0;  // malformed lines dropped (lenient mode)
};

/// Reads a whole N-Triples stream. Blank and comment lines are neither
/// triples nor skipped. In strict mode the first malformed line throws.
inline NTriplesReadResult read_ntriples(std::istream& in, ParseMode mode = ParseMode::Lenient) {
  NTriplesReadResult result;
  std::string line;
  while (std::getline(in, line)) {
    ++result.lines;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::blank_or_comment(view)) continue;
    detail::LineReader reader(view);
    auto t = reader.triple();
    if (t) {
      result.triples.push_back(std::move(*t));
    } else if (mode == ParseMode::Strict) {
      throw ParseError(result.lines, reader.error());
    } else {
      ++result.skipped;
    }
  }
  return result;
}

inline NTriplesReadResult read_ntriples_file(const std::filesystem::path& path,
                                             ParseMode mode = ParseMode::Lenient) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read N-Triples file: " + path.string());
  return read_ntriples(in, mode);
}

inline std::string to_ntriples(const Triple& t) {
  return to_ntriples(t.subject) + " <" + t.predicate + "> " + to_ntriples(t.object) + " .";
}

}  // namespace counqer
