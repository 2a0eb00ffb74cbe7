#pragma once

#include <chrono>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "counqer/aligner.hpp"
#include "counqer/classifier.hpp"
#include "counqer/consistency.hpp"
#include "counqer/kb.hpp"

namespace counqer {

inline constexpr std::size_t kMaxRelatedRows = 5;
inline constexpr std::size_t kMaxEnumeration = 1000;

struct SPOQuery {
  std::string kb_id;
  std::string subject;
  PredicateRef pred;
};

enum class RowRole { Main, Related };

inline const char* to_string(RowRole r) { return r == RowRole::Main ? "MAIN" : "RELATED"; }

struct EnumeratedEntity {
  std::string iri;
  std::string label;

  bool operator==(const EnumeratedEntity&) const = default;
};

/// Hover statistics: mean value for counting predicates, mean entities per
/// subject for enumerating ones.
struct RowStats {
  std::optional<double> mean_value;
  std::optional<double> mean_per_subject;

  bool operator==(const RowStats&) const = default;
};

struct QueryRow {
  PredicateRef pred;
  std::string label;  // display label
  Variant variant = Variant::Counting;
  RowRole role = RowRole::Main;
  std::optional<double> alignment_score;  // related rows only
  std::optional<Provenance> provenance;   // related rows only
  std::optional<std::uint64_t> count_value;
  std::vector<EnumeratedEntity> enumeration;  // enumerating rows only
  std::uint64_t total_cardinality = 0;
  std::string sparql;
  RowStats stats;
  std::optional<std::string> error;  // set when a related row could not be fetched

  bool operator==(const QueryRow&) const = default;
};

struct SPOAnswer {
  QueryRow main;
  std::vector<QueryRow> related;
};

struct PredicateSuggestion {
  PredicateRef pred;
  std::string label;  // display label
  Variant variant = Variant::Counting;
  int tier = 3;  // 1 populated+aligned, 2 populated, 3 unpopulated
  std::optional<double> best_score;
};

struct AlignmentView {
  const Alignment* alignment = nullptr;
  std::string counting_label;
  std::string enumerating_label;
  std::string sparql_cooccurrence;
};

struct AlignmentPage {
  std::size_t total = 0;
  std::vector<AlignmentView> rows;
};

/// Everything the service knows about one KB. Immutable after construction.
struct KBSetup {
  std::unique_ptr<KnowledgeBase> kb;
  std::vector<SetPredicate> catalog;
  std::vector<Alignment> alignments;
};

struct ServiceOptions {
  double cache_ttl_seconds = 300;
};

/// Answers SPO queries, predicate suggestions, consistency checks and
/// alignment browsing over a fixed set of KBs. Thread-safe: catalogs and
/// alignment tables are read-only; the response cache is locked.
class Service {
 public:
  explicit Service(std::vector<KBSetup> setups, ServiceOptions options = {}) : options_(options) {
    for (auto& s : setups) {
      auto id = s.kb->descriptor().id;
      auto ctx = std::make_unique<Context>();
      ctx->kb = std::move(s.kb);
      ctx->alignments = std::move(s.alignments);
      sort_alignments(ctx->alignments);
      for (auto& sp : s.catalog) {
        sp.profile.pred = sp.pred;
        ctx->known[sp.pred] = Known{sp.display(), sp.variant, sp.profile};
        ctx->catalog.push_back(std::move(sp));
      }
      std::vector<std::string> unlabeled;
      for (std::size_t i = 0; i < ctx->alignments.size(); ++i) {
        const auto& a = ctx->alignments[i];
        ctx->by_pred[a.counting].push_back(i);
        ctx->by_pred[a.enumerating].push_back(i);
        for (auto [ref, v] : {std::pair(a.counting, Variant::Counting),
                              std::pair(a.enumerating, Variant::Enumerating)})
          if (!ctx->known.contains(ref)) {
            ctx->known[ref] = Known{{}, v, std::nullopt};
            unlabeled.push_back(ref.iri);
          }
      }
      // Curated pairs may name predicates the classifier did not catalogue.
      if (!unlabeled.empty()) {
        auto labels = ctx->kb->labels(unlabeled);
        for (auto& [ref, k] : ctx->known) {
          if (!k.label.empty()) continue;
          k.label = display_label(labels.at(ref.iri), ref.inverse);
          if (ctx->kb->is_embedded()) {
            auto store = ctx->kb->materialize();
            if (!directed_facts(*store, ref).empty()) k.profile = profile_predicate(*store, ref);
          }
        }
      }
      order_.push_back(id);
      if (!contexts_.emplace(id, std::move(ctx)).second)
        throw ValidationError("duplicate KB id '" + id + "'");
    }
  }

  std::vector<std::pair<std::string, std::string>> kbs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& id : order_) out.emplace_back(id, contexts_.at(id)->kb->descriptor().name);
    return out;
  }

  const KnowledgeBase& kb(const std::string& id) const { return *context(id).kb; }
  const std::vector<Alignment>& alignments(const std::string& id) const {
    return context(id).alignments;
  }
  const std::vector<SetPredicate>& catalog(const std::string& id) const {
    return context(id).catalog;
  }

  std::vector<EntitySuggestion> suggest_entities(const std::string& kb_id, std::string_view prefix,
                                                 std::size_t limit) const {
    return context(kb_id).kb->suggest(prefix, limit);
  }

  /// Catalogued predicates for `subject` in three tiers: populated with
  /// alignments, populated without, unpopulated. Tier 1 is ordered by best
  /// alignment score; every tier then by label.
  std::vector<PredicateSuggestion> suggest_predicates(const std::string& kb_id,
                                                      const std::string& subject) const {
    const auto& ctx = context(kb_id);
    require_iri(subject, "subject");
    auto populated_list = ctx.kb->populated(subject);
    std::set<PredicateRef> populated(populated_list.begin(), populated_list.end());
    std::vector<PredicateSuggestion> out;
    for (const auto& sp : ctx.catalog) {
      PredicateSuggestion s{sp.pred, sp.display(), sp.variant, 3, best_score(ctx, sp.pred)};
      if (populated.contains(sp.pred)) s.tier = s.best_score ? 1 : 2;
      out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.tier != b.tier) return a.tier < b.tier;
      if (a.tier == 1 && *a.best_score != *b.best_score) return *a.best_score > *b.best_score;
      if (a.label != b.label) return a.label < b.label;
      return a.pred < b.pred;
    });
    return out;
  }

  /// Main row for the queried predicate plus up to five rows for its
  /// highest-scoring aligned partners on the same subject. Related rows are
  /// present whenever alignments exist, whether or not any result is empty.
  SPOAnswer answer_spo(const SPOQuery& q) const {
    const auto& ctx = context(q.kb_id);
    require_iri(q.subject, "subject");
    auto cat = std::find_if(ctx.catalog.begin(), ctx.catalog.end(),
                            [&](const auto& s) { return s.pred == q.pred; });
    if (cat == ctx.catalog.end())
      throw NotFoundError("predicate is not a set predicate of KB '" + q.kb_id +
                          "': " + to_string(q.pred));

    struct Partner {
      PredicateRef ref;
      const Alignment* alignment;
    };
    std::vector<Partner> partners;
    if (auto it = ctx.by_pred.find(q.pred); it != ctx.by_pred.end())
      for (auto i : it->second) {
        const auto& a = ctx.alignments[i];
        if (cat->variant == Variant::Counting && a.counting == q.pred)
          partners.push_back({a.enumerating, &a});
        else if (cat->variant == Variant::Enumerating && a.enumerating == q.pred)
          partners.push_back({a.counting, &a});
      }
    std::sort(partners.begin(), partners.end(), [](const Partner& x, const Partner& y) {
      if (x.alignment->score != y.alignment->score) return x.alignment->score > y.alignment->score;
      return x.ref < y.ref;
    });
    if (partners.size() > kMaxRelatedRows) partners.resize(kMaxRelatedRows);

    SPOAnswer answer;
    try {
      answer.main = make_row(ctx, q.subject, q.pred, RowRole::Main);
    } catch (const TimeoutError& e) {
      throw TimeoutError("main row " + to_string(q.pred) + ": " + e.what());
    } catch (const TransportError& e) {
      throw TransportError("main row " + to_string(q.pred) + ": " + e.what(), e.status());
    } catch (const ProtocolError& e) {
      throw ProtocolError("main row " + to_string(q.pred) + ": " + e.what());
    }

    auto related = [&](const Partner& p) {
      QueryRow row;
      try {
        row = make_row(ctx, q.subject, p.ref, RowRole::Related);
      } catch (const Error& e) {
        row = placeholder_row(ctx, q.subject, p.ref);
        row.error = e.what();
      }
      row.alignment_score = p.alignment->score;
      row.provenance = p.alignment->provenance;
      return row;
    };
    if (ctx.kb->is_embedded()) {
      for (const auto& p : partners) answer.related.push_back(related(p));
    } else {
      std::vector<std::future<QueryRow>> pending;
      for (const auto& p : partners)
        pending.push_back(std::async(std::launch::async, related, p));
      for (auto& f : pending) answer.related.push_back(f.get());
    }
    return answer;
  }

  /// Curation verdict for one subject and one aligned pair.
  ConsistencyReport check_consistency(const std::string& kb_id, const std::string& subject,
                                      const PredicateRef& counting,
                                      const PredicateRef& enumerating) const {
    const auto& ctx = context(kb_id);
    require_iri(subject, "subject");
    bool aligned = std::any_of(ctx.alignments.begin(), ctx.alignments.end(), [&](const auto& a) {
      return a.counting == counting && a.enumerating == enumerating;
    });
    if (!aligned)
      throw ValidationError("pair is not aligned in KB '" + kb_id + "': " + to_string(counting) +
                            " / " + to_string(enumerating));
    ConsistencyReport r;
    r.subject = subject;
    r.counting = counting;
    r.enumerating = enumerating;
    r.count_value = max_count(values(ctx, subject, counting));
    r.cardinality = values(ctx, subject, enumerating).size();
    if (!r.count_value && r.cardinality == 0)
      throw ValidationError("subject has neither predicate: " + subject);
    r.verdict = decide_verdict(r.count_value, r.cardinality);
    return r;
  }

  /// Alignment table filtered by a case-insensitive substring of either
  /// predicate's label or IRI, in ranking order.
  AlignmentPage browse_alignments(const std::string& kb_id, std::string_view search,
                                  std::size_t offset, std::size_t limit) const {
    const auto& ctx = context(kb_id);
    auto needle = ascii_lower(trim(search));
    AlignmentPage page;
    for (const auto& a : ctx.alignments) {
      auto cl = ctx.known.at(a.counting).label;
      auto el = ctx.known.at(a.enumerating).label;
      if (!needle.empty()) {
        bool hit = false;
        const std::string* fields[] = {&cl, &el, &a.counting.iri, &a.enumerating.iri};
        for (const auto* s : fields)
          hit = hit || ascii_lower(*s).find(needle) != std::string::npos;
        if (!hit) continue;
      }
      if (page.total++ < offset || page.rows.size() >= limit) continue;
      page.rows.push_back({&a, std::move(cl), std::move(el), build_cooccurrence_query(a)});
    }
    return page;
  }

 private:
  struct Known {
    std::string label;  // display label
    Variant variant = Variant::Counting;
    std::optional<PredicateProfile> profile;
  };

  struct CacheEntry {
    std::chrono::steady_clock::time_point stored;
    std::vector<Term> values;
  };

  struct Context {
    std::unique_ptr<KnowledgeBase> kb;
    std::vector<SetPredicate> catalog;
    std::vector<Alignment> alignments;
    std::map<PredicateRef, std::vector<std::size_t>> by_pred;
    std::map<PredicateRef, Known> known;
    mutable std::mutex cache_mutex;
    mutable std::map<std::pair<std::string, PredicateRef>, CacheEntry> cache;
  };

  const Context& context(const std::string& id) const {
    auto it = contexts_.find(id);
    if (it == contexts_.end()) throw NotFoundError("unknown KB '" + id + "'");
    return *it->second;
  }

  static std::optional<double> best_score(const Context& ctx, const PredicateRef& p) {
    auto it = ctx.by_pred.find(p);
    if (it == ctx.by_pred.end()) return std::nullopt;
    double best = 0;
    for (auto i : it->second) best = std::max(best, ctx.alignments[i].score);
    return best;
  }

  std::vector<Term> values(const Context& ctx, const std::string& subject,
                           const PredicateRef& p) const {
    if (ctx.kb->is_embedded() || options_.cache_ttl_seconds <= 0) return ctx.kb->values(subject, p);
    auto key = std::pair(subject, p);
    auto now = std::chrono::steady_clock::now();
    auto ttl = std::chrono::duration<double>(options_.cache_ttl_seconds);
    {
      std::lock_guard lock(ctx.cache_mutex);
      auto it = ctx.cache.find(key);
      if (it != ctx.cache.end() && now - it->second.stored < ttl) return it->second.values;
    }
    auto fresh = ctx.kb->values(subject, p);
    std::lock_guard lock(ctx.cache_mutex);
    ctx.cache[key] = CacheEntry{now, fresh};
    return fresh;
  }

  QueryRow placeholder_row(const Context& ctx, const std::string& subject,
                           const PredicateRef& p) const {
    const auto& k = ctx.known.at(p);
    QueryRow row;
    row.pred = p;
    row.label = k.label;
    row.variant = k.variant;
    row.role = RowRole::Related;
    row.sparql = build_spo_query(subject, p);
    if (k.profile) {
      if (k.variant == Variant::Counting) row.stats.mean_value = k.profile->mean_value;
      else row.stats.mean_per_subject = k.profile->mean_per_subject;
    }
    return row;
  }

  QueryRow make_row(const Context& ctx, const std::string& subject, const PredicateRef& p,
                    RowRole role) const {
    QueryRow row = placeholder_row(ctx, subject, p);
    row.role = role;
    auto vals = values(ctx, subject, p);
    row.total_cardinality = vals.size();
    if (row.variant == Variant::Counting) {
      row.count_value = max_count(vals);
      return row;
    }
    auto shown = std::min(vals.size(), kMaxEnumeration);
    std::vector<std::string> iris;
    for (std::size_t i = 0; i < shown; ++i)
      if (vals[i].is_iri()) iris.push_back(vals[i].value);
    auto labels = iris.empty() ? std::map<std::string, std::string>{} : ctx.kb->labels(iris);
    row.enumeration.reserve(shown);
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& t = vals[i];
      if (t.is_iri()) row.enumeration.push_back({t.value, labels.at(t.value)});
      else if (t.is_blank()) row.enumeration.push_back({"_:" + t.value, "_:" + t.value});
      else row.enumeration.push_back({t.value, t.value});
    }
    return row;
  }

  ServiceOptions options_;
  std::vector<std::string> order_;
  std::map<std::string, std::unique_ptr<Context>> contexts_;
};

}  // namespace counqer
