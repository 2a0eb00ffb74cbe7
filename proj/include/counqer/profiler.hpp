#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "counqer/rdf.hpp"
#include "counqer/triple_store.hpp"
#include "counqer/tsv.hpp"

namespace counqer {

/// Usage statistics of one directed predicate in one KB.
struct PredicateProfile {
  PredicateRef pred;
  std::uint64_t subject_count = 0;
  std::uint64_t fact_count = 0;
  std::optional<double> mean_value;    // only if some object is numeric
  std::optional<double> median_value;  // lower-middle element for even counts
  double mean_per_subject = 0;
  double integer_fraction = 0;
  double entity_fraction = 0;

  bool operator==(const PredicateProfile&) const = default;
};

/// A fact seen through a directed predicate: for inverse refs the roles swap
/// and only facts with a resource object take part.
struct DirectedFact {
  const Term* subject;
  const Term* object;
};

inline std::vector<DirectedFact> directed_facts(const TripleStore& store, const PredicateRef& p) {
  std::vector<DirectedFact> out;
  for (auto i : store.by_predicate(p.iri)) {
    const auto& t = store.at(i);
    if (!p.inverse) out.push_back({&t.subject, &t.object});
    else if (t.object.is_resource()) out.push_back({&t.object, &t.subject});
  }
  return out;
}

/// Directed predicates worth profiling. A forward ref needs `min_subjects`
/// distinct subjects; an inverse ref needs that many distinct IRI objects.
/// Ordered by IRI, forward before inverse.
inline std::vector<PredicateRef> enumerate_candidates(const TripleStore& store,
                                                      std::size_t min_subjects = 2) {
  std::vector<PredicateRef> out;
  for (const auto& iri : store.predicates()) {
    std::set<Term> subjects, iri_objects;
    for (auto i : store.by_predicate(iri)) {
      const auto& t = store.at(i);
      subjects.insert(t.subject);
      if (t.object.is_iri()) iri_objects.insert(t.object);
    }
    if (subjects.size() >= min_subjects) out.emplace_back(iri, false);
    if (iri_objects.size() >= min_subjects) out.emplace_back(iri, true);
  }
  return out;
}

/// Mean and lower median of `values`; sorts in place so the sum is taken in
/// ascending order.
inline void summarize_numeric(std::vector<double>& values, PredicateProfile& p) {
  if (values.empty()) return;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  p.mean_value = sum / static_cast<double>(values.size());
  p.median_value = values[(values.size() - 1) / 2];
}

inline PredicateProfile profile_predicate(const TripleStore& store, const PredicateRef& pred) {
  auto facts = directed_facts(store, pred);
  if (facts.empty()) throw NotFoundError("predicate not in store: " + to_string(pred));

  PredicateProfile p;
  p.pred = pred;
  std::set<Term> subjects;
  std::uint64_t integers = 0, entities = 0;
  std::vector<double> numbers;
  for (const auto& f : facts) {
    subjects.insert(*f.subject);
    if (nonnegative_integer(*f.object)) ++integers;
    if (f.object->is_iri()) ++entities;
    if (auto v = numeric_value(*f.object)) numbers.push_back(*v);
  }
  p.subject_count = subjects.size();
  p.fact_count = facts.size();
  auto n = static_cast<double>(p.fact_count);
  p.mean_per_subject = n / static_cast<double>(p.subject_count);
  p.integer_fraction = static_cast<double>(integers) / n;
  p.entity_fraction = static_cast<double>(entities) / n;
  summarize_numeric(numbers, p);
  return p;
}

inline std::vector<PredicateProfile> profile_all(const TripleStore& store,
                                                 std::size_t min_subjects = 2) {
  std::vector<PredicateProfile> out;
  for (const auto& ref : enumerate_candidates(store, min_subjects))
    out.push_back(profile_predicate(store, ref));
  return out;
}

// ---------------------------------------------------------------------------
// Profile dump

inline const std::vector<std::string>& profile_tsv_header() {
  static const std::vector<std::string> h = {
      "iri", "inverse", "subject_count", "fact_count", "mean_value", "median_value",
      "mean_per_subject", "integer_fraction", "entity_fraction"};
  return h;
}

inline void write_profiles_tsv(std::ostream& out, const std::vector<PredicateProfile>& profiles) {
  out << tsv::join(profile_tsv_header()) << '\n';
  for (const auto& p : profiles)
    out << tsv::join({p.pred.iri, tsv::boolean(p.pred.inverse), std::to_string(p.subject_count),
                      std::to_string(p.fact_count), tsv::fixed6(p.mean_value),
                      tsv::fixed6(p.median_value), tsv::fixed6(p.mean_per_subject),
                      tsv::fixed6(p.integer_fraction), tsv::fixed6(p.entity_fraction)})
        << '\n';
}

inline std::vector<PredicateProfile> read_profiles_tsv(std::istream& in) {
  tsv::Reader reader(in, profile_tsv_header(), "profile table");
  std::vector<PredicateProfile> out;
  while (auto row = reader.next()) {
    const auto& c = *row;
    if (!is_absolute_iri(c[0])) reader.fail("bad IRI '" + c[0] + "'");
    PredicateProfile p;
    p.pred = PredicateRef(c[0], reader.parse_bool(c[1]));
    p.subject_count = reader.parse_uint(c[2]);
    p.fact_count = reader.parse_uint(c[3]);
    p.mean_value = reader.parse_optional_double(c[4]);
    p.median_value = reader.parse_optional_double(c[5]);
    p.mean_per_subject = reader.parse_double(c[6]);
    p.integer_fraction = reader.parse_double(c[7]);
    p.entity_fraction = reader.parse_double(c[8]);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace counqer
