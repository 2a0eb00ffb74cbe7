#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "counqer/classifier.hpp"
#include "counqer/profiler.hpp"
#include "counqer/sparql.hpp"
#include "counqer/text.hpp"
#include "counqer/triple_store.hpp"
#include "counqer/tsv.hpp"

namespace counqer {

enum class Provenance { Automatic, Manual };

inline const char* to_string(Provenance p) {
  return p == Provenance::Automatic ? "AUTOMATIC" : "MANUAL";
}

/// Automatic scores live in [0, 0.9); [0.9, 1] is reserved for curated pairs.
inline constexpr double kManualFloor = 0.9;
inline constexpr double kManualDefaultScore = 0.95;
/// Largest automatic score representable in the six-decimal table format.
inline constexpr double kMaxAutomaticScore = 0.899999;

struct Alignment {
  PredicateRef counting;
  PredicateRef enumerating;
  double score = 0;
  std::optional<double> lexical;
  std::optional<double> statistical;
  std::optional<std::uint64_t> support;
  Provenance provenance = Provenance::Automatic;

  bool operator==(const Alignment&) const = default;
};

/// Ranking order: score descending, then counting ref, then enumerating ref.
inline bool ranks_before(const Alignment& a, const Alignment& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.counting != b.counting) return a.counting < b.counting;
  return a.enumerating < b.enumerating;
}

inline void sort_alignments(std::vector<Alignment>& v) {
  std::stable_sort(v.begin(), v.end(), ranks_before);
}

// ---------------------------------------------------------------------------
// Component metrics

/// Jaccard similarity of the two labels' content-word sets.
inline double lexical_score(std::string_view counting_label, std::string_view enumerating_label) {
  auto a = text::content_words(counting_label);
  auto b = text::content_words(enumerating_label);
  if (a.empty() || b.empty()) return 0.0;
  std::size_t both = 0;
  for (const auto& t : a) both += b.count(t);
  return static_cast<double>(both) / static_cast<double>(a.size() + b.size() - both);
}

struct StatisticalScore {
  double score = 0;
  std::uint64_t support = 0;
};

/// Agreement between count values and enumeration sizes on subjects where
/// both predicates are instantiated, scaled by how much of the rarer
/// predicate's subject set that co-occurrence covers.
inline StatisticalScore statistical_score(const TripleStore& store, const PredicateRef& counting,
                                          const PredicateRef& enumerating) {
  std::set<Term> counting_subjects;
  std::map<Term, std::uint64_t> count_value;  // max integer value per subject
  for (const auto& f : directed_facts(store, counting)) {
    counting_subjects.insert(*f.subject);
    if (auto v = nonnegative_integer(*f.object)) {
      auto [it, fresh] = count_value.try_emplace(*f.subject, *v);
      if (!fresh) it->second = std::max(it->second, *v);
    }
  }
  if (count_value.empty())
    throw ValidationError("counting predicate has no integer-valued fact: " + to_string(counting));

  std::map<Term, std::uint64_t> cardinality;
  for (const auto& f : directed_facts(store, enumerating)) ++cardinality[*f.subject];
  if (cardinality.empty())
    throw ValidationError("enumerating predicate has no fact: " + to_string(enumerating));

  double agreement_sum = 0;
  std::uint64_t support = 0;
  for (const auto& [subject, v] : count_value) {
    auto it = cardinality.find(subject);
    if (it == cardinality.end()) continue;
    auto n = it->second;
    ++support;
    if (v == n) agreement_sum += 1.0;
    else if (v != 0 && n != 0)
      agreement_sum += static_cast<double>(std::min(v, n)) / static_cast<double>(std::max(v, n));
  }
  if (support == 0) return {0.0, 0};
  auto denom = std::min<std::uint64_t>(counting_subjects.size(), cardinality.size());
  double coverage = static_cast<double>(support) / static_cast<double>(denom);
  return {agreement_sum / static_cast<double>(support) * coverage, support};
}

inline double combine_scores(double lexical, double statistical) {
  return std::min(kMaxAutomaticScore, 0.9 * (0.5 * lexical + 0.5 * statistical));
}

inline Alignment score_alignment(const TripleStore& store, const SetPredicate& counting,
                                 const SetPredicate& enumerating) {
  if (counting.variant != Variant::Counting)
    throw ValidationError("not a counting predicate: " + counting.display());
  if (enumerating.variant != Variant::Enumerating)
    throw ValidationError("not an enumerating predicate: " + enumerating.display());
  Alignment a;
  a.counting = counting.pred;
  a.enumerating = enumerating.pred;
  a.lexical = lexical_score(counting.label, enumerating.label);
  auto stat = statistical_score(store, counting.pred, enumerating.pred);
  a.statistical = stat.score;
  a.support = stat.support;
  a.score = combine_scores(*a.lexical, *a.statistical);
  a.provenance = Provenance::Automatic;
  return a;
}

/// Scores every counting x enumerating pair and keeps those reaching `min_score`.
inline std::vector<Alignment> rank_alignments(const TripleStore& store,
                                              const std::vector<SetPredicate>& counting_set,
                                              const std::vector<SetPredicate>& enumerating_set,
                                              double min_score = 0.05) {
  std::vector<Alignment> out;
  std::set<std::pair<PredicateRef, PredicateRef>> seen;
  for (const auto& c : counting_set)
    for (const auto& e : enumerating_set) {
      if (!seen.emplace(c.pred, e.pred).second) continue;
      auto a = score_alignment(store, c, e);
      if (a.score >= min_score) out.push_back(std::move(a));
    }
  sort_alignments(out);
  return out;
}

/// Splits a catalog by variant and ranks all cross pairs.
inline std::vector<Alignment> rank_catalog(const TripleStore& store,
                                           const std::vector<SetPredicate>& catalog,
                                           double min_score = 0.05) {
  std::vector<SetPredicate> counting, enumerating;
  for (const auto& s : catalog)
    (s.variant == Variant::Counting ? counting : enumerating).push_back(s);
  return rank_alignments(store, counting, enumerating, min_score);
}

struct ManualAlignment {
  PredicateRef counting;
  PredicateRef enumerating;
  std::optional<double> score;  // defaults to kManualDefaultScore
};

/// Merges curated alignments into an automatic table. A curated pair
/// replaces the automatic entry for the same pair.
inline std::vector<Alignment> inject_manual(std::vector<Alignment> automatic,
                                            const std::vector<ManualAlignment>& manual) {
  std::map<std::pair<PredicateRef, PredicateRef>, Alignment> curated;
  for (const auto& m : manual) {
    double s = m.score.value_or(kManualDefaultScore);
    if (!(s >= kManualFloor && s <= 1.0))
      throw ValidationError("manual alignment score must lie in [0.9, 1]: " + tsv::fixed6(s));
    Alignment a;
    a.counting = m.counting;
    a.enumerating = m.enumerating;
    a.score = s;
    a.provenance = Provenance::Manual;
    if (!curated.emplace(std::pair(m.counting, m.enumerating), std::move(a)).second)
      throw ValidationError("duplicate manual alignment: " + to_string(m.counting) + " / " +
                            to_string(m.enumerating));
  }
  if (curated.empty()) return automatic;
  std::erase_if(automatic, [&](const Alignment& a) {
    return curated.contains(std::pair(a.counting, a.enumerating));
  });
  for (auto& [_, a] : curated) automatic.push_back(std::move(a));
  sort_alignments(automatic);
  return automatic;
}

inline std::string build_cooccurrence_query(const Alignment& a) {
  return build_cooccurrence_query(a.counting, a.enumerating);
}

/// Co-occurrence query for two classified predicates; exactly one must be counting.
inline std::string build_cooccurrence_query(const SetPredicate& a, const SetPredicate& b) {
  if (a.variant == Variant::Counting && b.variant == Variant::Enumerating)
    return build_cooccurrence_query(a.pred, b.pred);
  if (b.variant == Variant::Counting && a.variant == Variant::Enumerating)
    return build_cooccurrence_query(b.pred, a.pred);
  throw ValidationError("co-occurrence needs one counting and one enumerating predicate");
}

// ---------------------------------------------------------------------------
// Alignment table TSV

inline const std::vector<std::string>& alignment_tsv_header() {
  static const std::vector<std::string> h = {
      "kb", "counting_iri", "counting_inverse", "enumerating_iri", "enumerating_inverse",
      "score", "lexical", "statistical", "support", "provenance"};
  return h;
}

inline void write_alignments_tsv(std::ostream& out, const std::string& kb_id,
                                 const std::vector<Alignment>& table) {
  out << tsv::join(alignment_tsv_header()) << '\n';
  for (const auto& a : table)
    out << tsv::join({kb_id, a.counting.iri, tsv::boolean(a.counting.inverse), a.enumerating.iri,
                      tsv::boolean(a.enumerating.inverse), tsv::fixed6(a.score),
                      tsv::fixed6(a.lexical), tsv::fixed6(a.statistical),
                      a.support ? std::to_string(*a.support) : std::string(),
                      to_string(a.provenance)})
        << '\n';
}

struct AlignmentTable {
  std::string kb_id;
  std::vector<Alignment> rows;
};

/// Reads an alignment table, preserving row order. Enforces the score
/// ranges per provenance and pair uniqueness.
inline AlignmentTable read_alignments_tsv(std::istream& in) {
  tsv::Reader reader(in, alignment_tsv_header(), "alignment table");
  AlignmentTable table;
  std::set<std::pair<PredicateRef, PredicateRef>> seen;
  while (auto row = reader.next()) {
    const auto& c = *row;
    if (table.rows.empty() && table.kb_id.empty()) table.kb_id = c[0];
    else if (c[0] != table.kb_id) reader.fail("mixed KB ids in one table");
    if (!is_absolute_iri(c[1]) || !is_absolute_iri(c[3])) reader.fail("bad predicate IRI");
    Alignment a;
    a.counting = PredicateRef(c[1], reader.parse_bool(c[2]));
    a.enumerating = PredicateRef(c[3], reader.parse_bool(c[4]));
    a.score = reader.parse_double(c[5]);
    a.lexical = reader.parse_optional_double(c[6]);
    a.statistical = reader.parse_optional_double(c[7]);
    a.support = reader.parse_optional_uint(c[8]);
    if (c[9] == "AUTOMATIC") {
      a.provenance = Provenance::Automatic;
      if (!(a.score >= 0 && a.score < kManualFloor)) reader.fail("automatic score outside [0, 0.9)");
    } else if (c[9] == "MANUAL") {
      a.provenance = Provenance::Manual;
      if (!(a.score >= kManualFloor && a.score <= 1.0)) reader.fail("manual score outside [0.9, 1]");
    } else {
      reader.fail("unknown provenance '" + c[9] + "'");
    }
    if (!seen.emplace(a.counting, a.enumerating).second) reader.fail("duplicate pair");
    table.rows.push_back(std::move(a));
  }
  return table;
}

inline std::vector<ManualAlignment> read_manual_tsv(std::istream& in) {
  tsv::Reader reader(in,
                     {"counting_iri", "counting_inverse", "enumerating_iri", "enumerating_inverse",
                      "score"},
                     "manual alignments");
  std::vector<ManualAlignment> out;
  while (auto row = reader.next()) {
    const auto& c = *row;
    if (!is_absolute_iri(c[0]) || !is_absolute_iri(c[2])) reader.fail("bad predicate IRI");
    out.push_back({PredicateRef(c[0], reader.parse_bool(c[1])),
                   PredicateRef(c[2], reader.parse_bool(c[3])), reader.parse_optional_double(c[4])});
  }
  return out;
}

}  // namespace counqer
