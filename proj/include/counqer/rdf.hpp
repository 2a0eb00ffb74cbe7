#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

#include "counqer/error.hpp"

namespace counqer {

namespace vocab {
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view kLangString =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}  // namespace vocab

/// Display marker appended to the label of an inverse predicate.
inline constexpr std::string_view kInverseMarker = "⁻¹";

/// True when `iri` is an absolute IRI: a scheme, a colon, and a non-empty
/// remainder free of whitespace and the characters forbidden in IRIREF.
inline bool is_absolute_iri(std::string_view iri) {
  auto colon = iri.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == iri.size()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!alpha(iri[0])) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    char c = iri[i];
    if (!alpha(c) && !(c >= '0' && c <= '9') && c != '+' && c != '-' && c != '.') return false;
  }
  for (char c : iri) {
    auto u = static_cast<unsigned char>(c);
    if (u <= 0x20) return false;
    switch (c) {
      case '<': case '>': case '"': case '{': case '}': case '|': case '^': case '`': case '\\':
        return false;
      default:
        break;
    }
  }
  return true;
}

inline void require_iri(std::string_view iri, std::string_view what = "IRI") {
  if (!is_absolute_iri(iri))
    throw ValidationError(std::string(what) + " is not an absolute IRI: '" + std::string(iri) + "'");
}

/// Part of an IRI after the last '#' or '/' (or ':' for URNs).
inline std::string local_name(std::string_view iri) {
  auto pos = iri.find_last_of("#/");
  if (pos == std::string_view::npos) pos = iri.find_last_of(':');
  if (pos == std::string_view::npos || pos + 1 == iri.size()) return std::string(iri);
  return std::string(iri.substr(pos + 1));
}

enum class TermKind : std::uint8_t { Iri, Blank, Literal };

/// An RDF term. Literals compare by (lexical form, datatype, language) exactly.
struct Term {
  TermKind kind = TermKind::Iri;
  std::string value;     // IRI, blank node label (without "_:"), or literal lexical form
  std::string datatype;  // literals only; empty for simple literals
  std::string language;  // literals only

  static Term iri(std::string v) { return {TermKind::Iri, std::move(v), {}, {}}; }
  static Term blank(std::string v) { return {TermKind::Blank, std::move(v), {}, {}}; }
  static Term literal(std::string lex, std::string dt = {}, std::string lang = {}) {
    return {TermKind::Literal, std::move(lex), std::move(dt), std::move(lang)};
  }

  bool is_iri() const noexcept { return kind == TermKind::Iri; }
  bool is_blank() const noexcept { return kind == TermKind::Blank; }
  bool is_literal() const noexcept { return kind == TermKind::Literal; }
  /// IRI or blank node: something that may stand in subject position.
  bool is_resource() const noexcept { return kind != TermKind::Literal; }

  auto operator<=>(const Term&) const = default;
  bool operator==(const Term&) const = default;
};

inline std::string escape_literal(std::string_view lex) {
  std::string out;
  out.reserve(lex.size() + 2);
  for (char c : lex) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

/// N-Triples surface form of a term; doubles as a unique key.
inline std::string to_ntriples(const Term& t) {
  switch (t.kind) {
    case TermKind::Iri:
      return "<" + t.value + ">";
    case TermKind::Blank:
      return "_:" + t.value;
    case TermKind::Literal: {
      std::string s = "\"" + escape_literal(t.value) + "\"";
      if (!t.language.empty())
        s += "@" + t.language;
      else if (!t.datatype.empty())
        s += "^^<" + t.datatype + ">";
      return s;
    }
  }
  return {};
}

struct Triple {
  Term subject;
  std::string predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
  bool operator==(const Triple&) const = default;
};

/// A predicate IRI read in one direction. `inverse` means object -> subject,
/// so the "members" are the subjects of facts pointing at the queried entity.
struct PredicateRef {
  std::string iri;
  bool inverse = false;

  PredicateRef() = default;
  PredicateRef(std::string i, bool inv = false) : iri(std::move(i)), inverse(inv) {}

  /// Validating constructor.
  static PredicateRef make(std::string iri, bool inverse = false) {
    require_iri(iri, "predicate");
    return PredicateRef(std::move(iri), inverse);
  }

  auto operator<=>(const PredicateRef&) const = default;
  bool operator==(const PredicateRef&) const = default;
};

/// Label rendered for display: inverse refs carry a trailing marker.
inline std::string display_label(std::string_view base_label, bool inverse) {
  std::string s(base_label);
  if (inverse) s += kInverseMarker;
  return s;
}

inline std::string to_string(const PredicateRef& p) {
  return display_label(local_name(p.iri), p.inverse);
}

// ---------------------------------------------------------------------------
// Literal value interpretation

/// Preference among competing rdfs:label literals: English, then untagged,
/// then any other language. Lower is better.
inline int label_language_rank(const Term& literal) {
  return literal.language == "en" ? 0 : (literal.language.empty() ? 1 : 2);
}

inline bool is_integer_datatype(std::string_view dt) {
  if (!dt.starts_with(vocab::kXsd)) return false;
  auto local = dt.substr(vocab::kXsd.size());
  static constexpr std::string_view kTypes[] = {
      "integer", "nonNegativeInteger", "positiveInteger", "nonPositiveInteger",
      "negativeInteger", "long", "int", "short", "byte", "unsignedLong",
      "unsignedInt", "unsignedShort", "unsignedByte"};
  for (auto t : kTypes)
    if (local == t) return true;
  return false;
}

inline bool is_plain_literal(const Term& t) {
  return t.is_literal() && t.language.empty() &&
         (t.datatype.empty() || t.datatype == vocab::kXsdString);
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

/// Value of a non-negative integer literal: an integer-typed literal with
/// value >= 0, or a plain literal matching ^[0-9]+$. Otherwise nullopt.
inline std::optional<std::uint64_t> nonnegative_integer(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  std::string_view lex = t.value;
  if (is_integer_datatype(t.datatype)) {
    bool negative = false;
    if (!lex.empty() && (lex[0] == '+' || lex[0] == '-')) {
      negative = lex[0] == '-';
      lex.remove_prefix(1);
    }
    if (!all_digits(lex)) return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(lex.data(), lex.data() + lex.size(), v);
    if (ec != std::errc() || ptr != lex.data() + lex.size()) return std::nullopt;
    if (negative && v != 0) return std::nullopt;
    return v;
  }
  if (is_plain_literal(t) && all_digits(lex)) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(lex.data(), lex.data() + lex.size(), v);
    if (ec != std::errc() || ptr != lex.data() + lex.size()) return std::nullopt;
    return v;
  }
  return std::nullopt;
}

/// Numeric value of xsd integer/decimal/double/float literals and plain digit strings.
inline std::optional<double> numeric_value(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  std::string_view lex = t.value;
  bool typed_numeric = is_integer_datatype(t.datatype);
  if (!typed_numeric && t.datatype.starts_with(vocab::kXsd)) {
    auto local = std::string_view(t.datatype).substr(vocab::kXsd.size());
    typed_numeric = local == "decimal" || local == "double" || local == "float";
  }
  if (!typed_numeric) {
    if (is_plain_literal(t) && all_digits(lex)) typed_numeric = true;
    else return std::nullopt;
  }
  if (!lex.empty() && lex[0] == '+') lex.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(lex.data(), lex.data() + lex.size(), v);
  if (ec != std::errc() || ptr != lex.data() + lex.size()) return std::nullopt;
  return v;
}

}  // namespace counqer

template <>
struct std::hash<counqer::PredicateRef> {
  std::size_t operator()(const counqer::PredicateRef& p) const noexcept {
    return std::hash<std::string>{}(p.iri) ^ (p.inverse ? 0x9e3779b97f4a7c15ULL : 0);
  }
};
