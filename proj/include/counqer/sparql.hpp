#pragma once

// SPARQL text generation for every query the system fires, the
// application/sparql-results+json codec, and a native evaluator for exactly
// those query shapes over an embedded TripleStore.

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "counqer/error.hpp"
#include "counqer/rdf.hpp"
#include "counqer/triple_store.hpp"

namespace counqer {

/// One solution: variable name (without '?') -> bound term.
using Binding = std::map<std::string, Term>;
using ResultRows = std::vector<Binding>;

// ---------------------------------------------------------------------------
// Query text

inline std::string iri_token(std::string_view iri) { return "<" + std::string(iri) + ">"; }

/// `SELECT ?o WHERE { <s> <p> ?o }`, or `SELECT ?s WHERE { ?s <p> <s> }` for inverse refs.
inline std::string build_spo_query(const std::string& subject, const PredicateRef& pred) {
  require_iri(subject, "subject");
  require_iri(pred.iri, "predicate");
  if (pred.inverse)
    return "SELECT ?s WHERE { ?s " + iri_token(pred.iri) + " " + iri_token(subject) + " }";
  return "SELECT ?o WHERE { " + iri_token(subject) + " " + iri_token(pred.iri) + " ?o }";
}

namespace detail {
inline std::string directed_pattern(const std::string& member_var, const PredicateRef& p,
                                    const std::string& value_var) {
  if (p.inverse) return value_var + " " + iri_token(p.iri) + " " + member_var;
  return member_var + " " + iri_token(p.iri) + " " + value_var;
}
}  // namespace detail

/// Subjects having at least one fact for each ref, each in its own direction.
inline std::string build_cooccurrence_query(const PredicateRef& counting,
                                            const PredicateRef& enumerating) {
  require_iri(counting.iri, "counting predicate");
  require_iri(enumerating.iri, "enumerating predicate");
  return "SELECT DISTINCT ?x WHERE { " + detail::directed_pattern("?x", counting, "?c") + " . " +
         detail::directed_pattern("?x", enumerating, "?e") + " }";
}

inline std::string sparql_string_literal(std::string_view s) {
  return "\"" + escape_literal(s) + "\"";
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

/// Entities whose rdfs:label starts with `prefix` (case-insensitive).
inline std::string build_label_prefix_query(std::string_view prefix) {
  return "SELECT ?e ?l WHERE { ?e " + iri_token(vocab::kRdfsLabel) +
         " ?l . FILTER(STRSTARTS(LCASE(STR(?l)), " + sparql_string_literal(ascii_lower(prefix)) +
         ")) }";
}

/// rdfs:label triples for a fixed set of entities.
inline std::string build_labels_query(const std::vector<std::string>& iris) {
  std::string q = "SELECT ?e ?l WHERE { VALUES ?e {";
  for (const auto& iri : iris) q += " " + iri_token(iri);
  q += " } ?e " + iri_token(vocab::kRdfsLabel) + " ?l }";
  return q;
}

/// Distinct predicates used with `subject` as subject (or as object when `incoming`).
inline std::string build_populated_query(const std::string& subject, bool incoming) {
  require_iri(subject, "subject");
  if (incoming) return "SELECT DISTINCT ?p WHERE { ?s ?p " + iri_token(subject) + " }";
  return "SELECT DISTINCT ?p WHERE { " + iri_token(subject) + " ?p ?o }";
}

inline std::string build_dump_query() { return "SELECT ?s ?p ?o WHERE { ?s ?p ?o }"; }

// ---------------------------------------------------------------------------
// SPARQL 1.1 Query Results JSON

inline nlohmann::json term_to_json(const Term& t) {
  nlohmann::json j;
  switch (t.kind) {
    case TermKind::Iri: j["type"] = "uri"; break;
    case TermKind::Blank: j["type"] = "bnode"; break;
    case TermKind::Literal:
      j["type"] = "literal";
      if (!t.language.empty()) j["xml:lang"] = t.language;
      else if (!t.datatype.empty()) j["datatype"] = t.datatype;
      break;
  }
  j["value"] = t.value;
  return j;
}

inline Term term_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.contains("value") || !j["type"].is_string() ||
      !j["value"].is_string())
    throw ProtocolError("binding is not an RDF term object");
  const auto type = j["type"].get<std::string>();
  auto value = j["value"].get<std::string>();
  if (type == "uri") return Term::iri(std::move(value));
  if (type == "bnode") return Term::blank(std::move(value));
  if (type == "literal" || type == "typed-literal") {
    std::string lang, dt;
    if (j.contains("xml:lang")) lang = j["xml:lang"].get<std::string>();
    if (j.contains("datatype")) dt = j["datatype"].get<std::string>();
    return Term::literal(std::move(value), std::move(dt), std::move(lang));
  }
  throw ProtocolError("unknown term type '" + type + "'");
}

inline std::string results_to_json(const std::vector<std::string>& vars, const ResultRows& rows) {
  nlohmann::json bindings = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json b = nlohmann::json::object();
    for (const auto& [name, term] : row) b[name] = term_to_json(term);
    bindings.push_back(std::move(b));
  }
  nlohmann::json doc = {{"head", {{"vars", vars}}}, {"results", {{"bindings", bindings}}}};
  return doc.dump();
}

/// Parses a results document. Throws ProtocolError if it is not one.
inline ResultRows parse_results_json(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("results document is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_object() ||
      !doc["results"].contains("bindings") || !doc["results"]["bindings"].is_array())
    throw ProtocolError("results document lacks results.bindings");
  ResultRows rows;
  try {
    for (const auto& b : doc["results"]["bindings"]) {
      if (!b.is_object()) throw ProtocolError("binding row is not an object");
      Binding row;
      for (const auto& [name, term] : b.items()) row.emplace(name, term_from_json(term));
      rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed binding: ") + e.what());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Pagination

struct LimitClause {
  std::size_t limit = 0;
  std::size_t offset = 0;
};

/// Splits a trailing `LIMIT n [OFFSET k]` off `query`, if present.
inline std::optional<LimitClause> split_limit(std::string& query) {
  static const std::regex re(R"(\s+LIMIT\s+(\d+)(?:\s+OFFSET\s+(\d+))?\s*$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(query, m, re)) return std::nullopt;
  LimitClause c;
  c.limit = std::stoull(m[1].str());
  if (m[2].matched) c.offset = std::stoull(m[2].str());
  query.erase(static_cast<std::size_t>(m.position(0)));
  return c;
}

inline std::string with_page(const std::string& query, std::size_t limit, std::size_t offset) {
  return query + " LIMIT " + std::to_string(limit) + " OFFSET " + std::to_string(offset);
}

// ---------------------------------------------------------------------------
// Native evaluation of the generated shapes

struct EvaluatedQuery {
  std::vector<std::string> vars;
  ResultRows rows;
};

namespace detail {

inline Term parse_iri_token(const std::string& tok) { return Term::iri(tok.substr(1, tok.size() - 2)); }

inline std::string unescape_sparql_string(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char e = s[++i];
      out += e == 'n' ? '\n' : e == 't' ? '\t' : e == 'r' ? '\r' : e;
    } else {
      out += s[i];
    }
  }
  return out;
}

// Subjects ("members") having a fact for `p` in its direction.
inline std::set<Term> members_of(const TripleStore& store, const PredicateRef& p) {
  std::set<Term> out;
  for (auto i : store.by_predicate(p.iri)) {
    const auto& t = store.at(i);
    if (!p.inverse) out.insert(t.subject);
    else if (t.object.is_resource()) out.insert(t.object);
  }
  return out;
}

}  // namespace detail

/// Evaluates one of the query shapes produced by the builders above against
/// an embedded store; a trailing `LIMIT n OFFSET k` is honoured. Solutions are
/// in a deterministic order so pagination is stable. Any other query text
/// raises ValidationError: the embedded store is not a general SPARQL engine.
inline EvaluatedQuery restricted_select(const TripleStore& store, std::string query) {
  auto limit = split_limit(query);
  EvaluatedQuery out;
  std::smatch m;
  const std::string I = R"((<[^<>\s]+>))";

  static const std::regex spo_fwd("^SELECT \\?o WHERE \\{ " + I + " " + I + " \\?o \\}$");
  static const std::regex spo_inv("^SELECT \\?s WHERE \\{ \\?s " + I + " " + I + " \\}$");
  static const std::regex cooc(
      R"(^SELECT DISTINCT \?x WHERE \{ (\?x (<[^<>\s]+>) \?c|\?c (<[^<>\s]+>) \?x) \. )"
      R"((\?x (<[^<>\s]+>) \?e|\?e (<[^<>\s]+>) \?x) \}$)");
  static const std::regex prefix_q(
      "^SELECT \\?e \\?l WHERE \\{ \\?e <http://www\\.w3\\.org/2000/01/rdf-schema#label> \\?l \\. "
      "FILTER\\(STRSTARTS\\(LCASE\\(STR\\(\\?l\\)\\), \"((?:[^\"\\\\]|\\\\.)*)\"\\)\\) \\}$");
  static const std::regex labels_q(
      "^SELECT \\?e \\?l WHERE \\{ VALUES \\?e \\{((?: <[^<>\\s]+>)*) \\} \\?e "
      "<http://www\\.w3\\.org/2000/01/rdf-schema#label> \\?l \\}$");
  static const std::regex pop_out("^SELECT DISTINCT \\?p WHERE \\{ " + I + " \\?p \\?o \\}$");
  static const std::regex pop_in("^SELECT DISTINCT \\?p WHERE \\{ \\?s \\?p " + I + " \\}$");

  if (std::regex_match(query, m, spo_fwd)) {
    out.vars = {"o"};
    PredicateRef p(m[2].str().substr(1, m[2].length() - 2), false);
    for (auto& t : store.values(detail::parse_iri_token(m[1].str()), p)) out.rows.push_back({{"o", t}});
  } else if (std::regex_match(query, m, spo_inv)) {
    out.vars = {"s"};
    PredicateRef p(m[1].str().substr(1, m[1].length() - 2), true);
    for (auto& t : store.values(detail::parse_iri_token(m[2].str()), p)) out.rows.push_back({{"s", t}});
  } else if (std::regex_match(query, m, cooc)) {
    out.vars = {"x"};
    auto ref = [&](int fwd, int inv) {
      return m[fwd].matched ? PredicateRef(m[fwd].str().substr(1, m[fwd].length() - 2), false)
                            : PredicateRef(m[inv].str().substr(1, m[inv].length() - 2), true);
    };
    auto a = detail::members_of(store, ref(2, 3));
    auto b = detail::members_of(store, ref(5, 6));
    for (const auto& t : a)
      if (b.contains(t)) out.rows.push_back({{"x", t}});
  } else if (std::regex_match(query, m, prefix_q)) {
    out.vars = {"e", "l"};
    auto prefix = detail::unescape_sparql_string(m[1].str());
    for (auto i : store.by_predicate(std::string(vocab::kRdfsLabel))) {
      const auto& t = store.at(i);
      if (t.object.is_literal() && ascii_lower(t.object.value).starts_with(prefix))
        out.rows.push_back({{"e", t.subject}, {"l", t.object}});
    }
  } else if (std::regex_match(query, m, labels_q)) {
    out.vars = {"e", "l"};
    static const std::regex tok("<([^<>\\s]+)>");
    auto list = m[1].str();
    std::set<Term> wanted;
    for (std::sregex_iterator it(list.begin(), list.end(), tok), end; it != end; ++it)
      wanted.insert(Term::iri((*it)[1].str()));
    for (auto i : store.by_predicate(std::string(vocab::kRdfsLabel))) {
      const auto& t = store.at(i);
      if (wanted.contains(t.subject)) out.rows.push_back({{"e", t.subject}, {"l", t.object}});
    }
  } else if (std::regex_match(query, m, pop_out) || std::regex_match(query, m, pop_in)) {
    out.vars = {"p"};
    bool incoming = query.find("?s ?p") != std::string::npos;
    std::set<std::string> preds;
    auto entity = detail::parse_iri_token(m[1].str());
    for (auto i : incoming ? store.by_object(entity) : store.by_subject(entity))
      preds.insert(store.at(i).predicate);
    for (const auto& p : preds) out.rows.push_back({{"p", Term::iri(p)}});
  } else if (query == build_dump_query()) {
    out.vars = {"s", "p", "o"};
    for (const auto& t : store.triples())
      out.rows.push_back({{"s", t.subject}, {"p", Term::iri(t.predicate)}, {"o", t.object}});
  } else {
    throw ValidationError("query shape not supported by the embedded store: " + query);
  }

  if (limit) {
    auto begin = std::min(limit->offset, out.rows.size());
    auto end = std::min(begin + limit->limit, out.rows.size());
    out.rows = ResultRows(out.rows.begin() + static_cast<std::ptrdiff_t>(begin),
                          out.rows.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace counqer
