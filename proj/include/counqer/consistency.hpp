#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "counqer/aligner.hpp"
#include "counqer/profiler.hpp"
#include "counqer/rdf.hpp"
#include "counqer/triple_store.hpp"

namespace counqer {

enum class Verdict { Consistent, EnumIncomplete, EnumExcess, CountMissing, EnumMissing };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "CONSISTENT";
    case Verdict::EnumIncomplete: return "ENUM_INCOMPLETE";
    case Verdict::EnumExcess: return "ENUM_EXCESS";
    case Verdict::CountMissing: return "COUNT_MISSING";
    case Verdict::EnumMissing: return "ENUM_MISSING";
  }
  return "CONSISTENT";
}

/// Verdict for count value `v` against enumeration size `n`, first match wins:
/// no count; count but nothing enumerated; equal; count larger; count smaller.
inline Verdict decide_verdict(std::optional<std::uint64_t> v, std::uint64_t n) {
  if (!v) return Verdict::CountMissing;
  if (n == 0 && *v > 0) return Verdict::EnumMissing;
  if (*v == n) return Verdict::Consistent;
  if (*v > n) return Verdict::EnumIncomplete;
  return Verdict::EnumExcess;
}

/// Largest non-negative integer among `values`, if any.
inline std::optional<std::uint64_t> max_count(const std::vector<Term>& values) {
  std::optional<std::uint64_t> best;
  for (const auto& t : values)
    if (auto v = nonnegative_integer(t)) best = best ? std::max(*best, *v) : *v;
  return best;
}

struct ConsistencyReport {
  std::string subject;
  PredicateRef counting;
  PredicateRef enumerating;
  std::optional<std::uint64_t> count_value;
  std::uint64_t cardinality = 0;
  Verdict verdict = Verdict::Consistent;

  bool operator==(const ConsistencyReport&) const = default;
};

/// Every (subject, alignment) where the count is present, the enumeration is
/// present, or both. Sorted by subject IRI, then by pair.
inline std::vector<ConsistencyReport> check_all(const TripleStore& store,
                                                const std::vector<Alignment>& alignments) {
  std::vector<ConsistencyReport> out;
  for (const auto& a : alignments) {
    std::map<Term, std::uint64_t> count;
    for (const auto& f : directed_facts(store, a.counting))
      if (auto v = nonnegative_integer(*f.object)) {
        auto [it, fresh] = count.try_emplace(*f.subject, *v);
        if (!fresh) it->second = std::max(it->second, *v);
      }
    std::map<Term, std::uint64_t> card;
    for (const auto& f : directed_facts(store, a.enumerating)) ++card[*f.subject];

    std::set<Term> subjects;
    for (const auto& [s, _] : count) subjects.insert(s);
    for (const auto& [s, _] : card) subjects.insert(s);
    for (const auto& s : subjects) {
      if (!s.is_iri()) continue;
      ConsistencyReport r;
      r.subject = s.value;
      r.counting = a.counting;
      r.enumerating = a.enumerating;
      if (auto it = count.find(s); it != count.end()) r.count_value = it->second;
      if (auto it = card.find(s); it != card.end()) r.cardinality = it->second;
      r.verdict = decide_verdict(r.count_value, r.cardinality);
      out.push_back(std::move(r));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.subject, x.counting, x.enumerating) <
           std::tie(y.subject, y.counting, y.enumerating);
  });
  return out;
}

/// `<iri>` for forward refs, `^<iri>` (SPARQL inverse path) for inverse refs.
inline std::string path_notation(const PredicateRef& p) {
  return (p.inverse ? "^<" : "<") + p.iri + ">";
}

inline void write_consistency_tsv(std::ostream& out, const std::vector<ConsistencyReport>& rows) {
  out << "subject\tcounting\tenumerating\tv\tn\tverdict\n";
  for (const auto& r : rows)
    out << r.subject << '\t' << path_notation(r.counting) << '\t' << path_notation(r.enumerating)
        << '\t' << (r.count_value ? std::to_string(*r.count_value) : std::string()) << '\t'
        << r.cardinality << '\t' << to_string(r.verdict) << '\n';
}

}  // namespace counqer
