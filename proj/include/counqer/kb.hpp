#pragma once

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "counqer/descriptor.hpp"
#include "counqer/sparql.hpp"
#include "counqer/sparql_client.hpp"
#include "counqer/triple_store.hpp"

namespace counqer {

struct EntitySuggestion {
  std::string iri;
  std::string label;

  bool operator==(const EntitySuggestion&) const = default;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Orders candidates by label length, then label, then IRI, and keeps `limit`.
inline std::vector<EntitySuggestion> rank_suggestions(std::vector<EntitySuggestion> hits,
                                                      std::size_t limit) {
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.label.size() != b.label.size()) return a.label.size() < b.label.size();
    if (a.label != b.label) return a.label < b.label;
    return a.iri < b.iri;
  });
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  if (hits.size() > limit) hits.resize(limit);
  return hits;
}

namespace detail {
inline std::string checked_prefix(std::string_view prefix, std::size_t limit) {
  auto p = trim(prefix);
  if (p.empty()) throw ValidationError("suggestion prefix is empty");
  if (limit == 0) throw ValidationError("suggestion limit must be positive");
  return ascii_lower(p);
}
}  // namespace detail

/// Entities whose rdfs:label begins with `prefix`, ignoring ASCII case.
inline std::vector<EntitySuggestion> entity_suggest(const TripleStore& store,
                                                    std::string_view prefix, std::size_t limit) {
  auto needle = detail::checked_prefix(prefix, limit);
  std::vector<EntitySuggestion> hits;
  for (const auto& [iri, label] : store.labels())
    if (ascii_lower(label).starts_with(needle)) hits.push_back({iri, label});
  return rank_suggestions(std::move(hits), limit);
}

/// Uniform read access to one KB, whether embedded or remote.
class KnowledgeBase {
 public:
  explicit KnowledgeBase(KBDescriptor desc) : desc_(std::move(desc)) {}
  virtual ~KnowledgeBase() = default;

  const KBDescriptor& descriptor() const noexcept { return desc_; }
  virtual bool is_embedded() const noexcept = 0;

  /// Result of the SPO query for (subject, pred), sorted by term order.
  virtual std::vector<Term> values(const std::string& subject, const PredicateRef& pred) const = 0;
  /// Directed predicates with at least one fact for `subject`.
  virtual std::vector<PredicateRef> populated(const std::string& subject) const = 0;
  virtual std::vector<EntitySuggestion> suggest(std::string_view prefix, std::size_t limit) const = 0;
  /// Label per IRI; IRIs without an rdfs:label map to their local name.
  virtual std::map<std::string, std::string> labels(const std::vector<std::string>& iris) const = 0;
  /// Full triple set, for offline profiling and alignment.
  virtual std::shared_ptr<const TripleStore> materialize() const = 0;

  std::string label(const std::string& iri) const { return labels({iri}).at(iri); }

 private:
  KBDescriptor desc_;
};

class EmbeddedKB final : public KnowledgeBase {
 public:
  EmbeddedKB(KBDescriptor desc, std::shared_ptr<const TripleStore> store)
      : KnowledgeBase(std::move(desc)), store_(std::move(store)) {}

  bool is_embedded() const noexcept override { return true; }

  std::vector<Term> values(const std::string& subject, const PredicateRef& pred) const override {
    require_iri(subject, "subject");
    return store_->values(Term::iri(subject), pred);
  }

  std::vector<PredicateRef> populated(const std::string& subject) const override {
    require_iri(subject, "subject");
    return store_->populated(Term::iri(subject));
  }

  std::vector<EntitySuggestion> suggest(std::string_view prefix, std::size_t limit) const override {
    return entity_suggest(*store_, prefix, limit);
  }

  std::map<std::string, std::string> labels(const std::vector<std::string>& iris) const override {
    std::map<std::string, std::string> out;
    for (const auto& iri : iris) out.emplace(iri, store_->label(iri));
    return out;
  }

  std::shared_ptr<const TripleStore> materialize() const override { return store_; }

  const TripleStore& store() const noexcept { return *store_; }

 private:
  std::shared_ptr<const TripleStore> store_;
};

class RemoteKB final : public KnowledgeBase {
 public:
  explicit RemoteKB(KBDescriptor desc) : KnowledgeBase(std::move(desc)), client_(descriptor()) {}

  bool is_embedded() const noexcept override { return false; }

  std::vector<Term> values(const std::string& subject, const PredicateRef& pred) const override {
    auto rows = client_.select(build_spo_query(subject, pred));
    const char* var = pred.inverse ? "s" : "o";
    std::vector<Term> out;
    for (auto& row : rows) {
      auto it = row.find(var);
      if (it == row.end()) throw ProtocolError(std::string("solution lacks ?") + var);
      out.push_back(std::move(it->second));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<PredicateRef> populated(const std::string& subject) const override {
    std::vector<PredicateRef> out;
    for (bool incoming : {false, true})
      for (auto& row : client_.select(build_populated_query(subject, incoming))) {
        auto it = row.find("p");
        if (it == row.end() || !it->second.is_iri()) throw ProtocolError("solution lacks IRI ?p");
        out.emplace_back(it->second.value, incoming);
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<EntitySuggestion> suggest(std::string_view prefix, std::size_t limit) const override {
    auto needle = detail::checked_prefix(prefix, limit);
    std::vector<EntitySuggestion> hits;
    for (auto& row : client_.select(build_label_prefix_query(needle))) {
      auto e = row.find("e");
      auto l = row.find("l");
      if (e == row.end() || l == row.end()) throw ProtocolError("solution lacks ?e or ?l");
      if (e->second.is_iri() && ascii_lower(l->second.value).starts_with(needle))
        hits.push_back({e->second.value, l->second.value});
    }
    return rank_suggestions(std::move(hits), limit);
  }

  std::map<std::string, std::string> labels(const std::vector<std::string>& iris) const override {
    std::map<std::string, std::string> out;
    std::vector<std::string> pending;
    for (const auto& iri : iris) {
      if (out.contains(iri)) continue;
      out.emplace(iri, is_absolute_iri(iri) ? std::string() : iri);
      if (is_absolute_iri(iri)) pending.push_back(iri);
    }
    std::map<std::string, std::pair<int, std::string>> best;
    constexpr std::size_t kBatch = 100;
    for (std::size_t i = 0; i < pending.size(); i += kBatch) {
      auto last = std::min(i + kBatch, pending.size());
      std::vector<std::string> batch(pending.begin() + static_cast<std::ptrdiff_t>(i),
                                     pending.begin() + static_cast<std::ptrdiff_t>(last));
      for (auto& row : client_.select(build_labels_query(batch))) {
        auto e = row.find("e");
        auto l = row.find("l");
        if (e == row.end() || l == row.end() || !l->second.is_literal()) continue;
        std::pair<int, std::string> cand{label_language_rank(l->second), l->second.value};
        auto [it, fresh] = best.try_emplace(e->second.value, cand);
        if (!fresh && cand < it->second) it->second = std::move(cand);
      }
    }
    for (auto& [iri, label] : out) {
      if (!label.empty()) continue;
      auto it = best.find(iri);
      label = it != best.end() ? it->second.second : local_name(iri);
    }
    return out;
  }

  std::shared_ptr<const TripleStore> materialize() const override {
    std::call_once(materialized_flag_, [this] {
      std::vector<Triple> triples;
      for (auto& row : client_.select(build_dump_query())) {
        auto s = row.find("s");
        auto p = row.find("p");
        auto o = row.find("o");
        if (s == row.end() || p == row.end() || o == row.end() || !p->second.is_iri() ||
            s->second.is_literal())
          throw ProtocolError("dump solution is not a triple");
        triples.push_back({s->second, p->second.value, o->second});
      }
      materialized_ = std::make_shared<const TripleStore>(std::move(triples));
    });
    return materialized_;
  }

 private:
  SparqlClient client_;
  mutable std::once_flag materialized_flag_;
  mutable std::shared_ptr<const TripleStore> materialized_;
};

/// Opens the KB named by `desc`: loads a dump into an embedded store, or
/// wraps a remote endpoint.
inline std::unique_ptr<KnowledgeBase> open_kb(const KBDescriptor& desc,
                                              ParseMode mode = ParseMode::Lenient) {
  validate(desc);
  if (desc.is_endpoint()) return std::make_unique<RemoteKB>(desc);
  auto loaded = load_ntriples(desc.dump(), mode);
  if (loaded.skipped > 0)
    std::cerr << "[counqer] " << desc.id << ": skipped " << loaded.skipped << " malformed of "
              << loaded.lines << " lines in " << desc.dump().string() << "\n";
  return std::make_unique<EmbeddedKB>(
      desc, std::make_shared<const TripleStore>(std::move(loaded.store)));
}

}  // namespace counqer
