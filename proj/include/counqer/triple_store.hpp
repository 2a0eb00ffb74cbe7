#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "counqer/ntriples.hpp"
#include "counqer/rdf.hpp"

namespace counqer {

/// Immutable in-memory triple set with subject, object, predicate, and
/// (predicate, object) indexes plus an rdfs:label table. Safe for any
/// number of concurrent readers once built.
class TripleStore {
 public:
  using Index = std::uint32_t;

  TripleStore() = default;

  /// Deduplicates and sorts `triples`, then builds every index.
  explicit TripleStore(std::vector<Triple> triples) : triples_(std::move(triples)) {
    std::sort(triples_.begin(), triples_.end());
    triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
    for (Index i = 0; i < triples_.size(); ++i) {
      const Triple& t = triples_[i];
      auto obj = to_ntriples(t.object);
      by_subject_[to_ntriples(t.subject)].push_back(i);
      by_predicate_[t.predicate].push_back(i);
      by_object_[obj].push_back(i);
      by_predicate_object_[t.predicate + '\x1f' + obj].push_back(i);
      if (t.predicate == vocab::kRdfsLabel && t.subject.is_iri() && t.object.is_literal())
        offer_label(t.subject.value, t.object);
    }
    for (auto& [iri, entry] : label_candidates_) labels_.emplace(iri, entry.text);
    label_candidates_.clear();
  }

  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  std::span<const Triple> triples() const noexcept { return triples_; }
  const Triple& at(Index i) const { return triples_.at(i); }

  std::span<const Index> by_subject(const Term& subject) const {
    return lookup(by_subject_, to_ntriples(subject));
  }
  std::span<const Index> by_predicate(const std::string& iri) const {
    return lookup(by_predicate_, iri);
  }
  std::span<const Index> by_object(const Term& object) const {
    return lookup(by_object_, to_ntriples(object));
  }
  std::span<const Index> by_predicate_object(const std::string& iri, const Term& object) const {
    return lookup(by_predicate_object_, iri + '\x1f' + to_ntriples(object));
  }

  /// Distinct predicate IRIs, lexicographic.
  std::vector<std::string> predicates() const {
    std::vector<std::string> out;
    out.reserve(by_predicate_.size());
    for (const auto& [iri, _] : by_predicate_) out.push_back(iri);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Terms reached from `entity` through `pred`: objects for a forward ref,
  /// subjects for an inverse ref. Sorted by term order.
  std::vector<Term> values(const Term& entity, const PredicateRef& pred) const {
    std::vector<Term> out;
    if (pred.inverse) {
      for (Index i : by_predicate_object(pred.iri, entity)) out.push_back(triples_[i].subject);
    } else {
      for (Index i : by_subject(entity))
        if (triples_[i].predicate == pred.iri) out.push_back(triples_[i].object);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Directed predicates with at least one fact for `entity`.
  std::vector<PredicateRef> populated(const Term& entity) const {
    std::vector<PredicateRef> out;
    for (Index i : by_subject(entity)) out.emplace_back(triples_[i].predicate, false);
    if (entity.is_resource())
      for (Index i : by_object(entity)) out.emplace_back(triples_[i].predicate, true);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool has_label(const std::string& iri) const { return labels_.contains(iri); }

  /// rdfs:label of `iri`, falling back to its local name.
  std::string label(const std::string& iri) const {
    auto it = labels_.find(iri);
    return it != labels_.end() ? it->second : local_name(iri);
  }

  /// Entity IRI -> chosen label, for every entity carrying an rdfs:label.
  const std::map<std::string, std::string>& labels() const noexcept { return labels_; }

 private:
  using IndexMap = std::unordered_map<std::string, std::vector<Index>>;

  static std::span<const Index> lookup(const IndexMap& map, const std::string& key) {
    auto it = map.find(key);
    if (it == map.end()) return {};
    return it->second;
  }

  // English beats untagged beats other languages; ties go to the smaller string.
  struct LabelEntry {
    int rank;
    std::string text;
  };

  void offer_label(const std::string& iri, const Term& literal) {
    int rank = label_language_rank(literal);
    auto [it, inserted] = label_candidates_.try_emplace(iri, LabelEntry{rank, literal.value});
    if (inserted) return;
    auto& cur = it->second;
    if (rank < cur.rank || (rank == cur.rank && literal.value < cur.text))
      cur = LabelEntry{rank, literal.value};
  }

  std::vector<Triple> triples_;
  IndexMap by_subject_;
  IndexMap by_predicate_;
  IndexMap by_object_;
  IndexMap by_predicate_object_;
  std::map<std::string, std::string> labels_;
  std::unordered_map<std::string, LabelEntry> label_candidates_;
};

struct LoadResult {
  TripleStore store;
  std::size_t lines = 0;
  std::size_t skipped = 0;
};

/// Loads an N-Triples dump into an indexed store.
inline LoadResult load_ntriples(const std::filesystem::path& path,
                                ParseMode mode = ParseMode::Lenient) {
  auto parsed = read_ntriples_file(path, mode);
  return LoadResult{TripleStore(std::move(parsed.triples)), parsed.lines, parsed.skipped};
}

}  // namespace counqer
