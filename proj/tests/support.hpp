#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>

#include "counqer/ntriples.hpp"
#include "counqer/pipeline.hpp"
#include "counqer/sparql.hpp"
#include "counqer/triple_store.hpp"

namespace counqer {
inline std::ostream& operator<<(std::ostream& os, const PredicateRef& p) { return os << to_string(p); }
}  // namespace counqer

namespace testing_support {

namespace fs = std::filesystem;
using namespace counqer;

inline fs::path fixture(const std::string& name) { return fs::path(COUNQER_FIXTURES) / name; }

inline TripleStore store_from(const std::string& ntriples) {
  std::istringstream in(ntriples);
  return TripleStore(read_ntriples(in, ParseMode::Strict).triples);
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("counqer-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// SPARQL endpoint over an in-memory store, for exercising the HTTP client.
/// `hook` may short-circuit a request by returning true after filling `res`.
class FakeEndpoint {
 public:
  using Hook = std::function<bool(const std::string& query, httplib::Response& res)>;

  explicit FakeEndpoint(TripleStore store, Hook hook = {})
      : store_(std::move(store)), hook_(std::move(hook)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      std::string query;
      if (req.has_param("query")) query = req.get_param_value("query");
      {
        std::lock_guard lock(mutex_);
        queries_.push_back(query);
      }
      if (hook_ && hook_(query, res)) return;
      try {
        auto r = restricted_select(store_, query);
        res.set_content(results_to_json(r.vars, r.rows), "application/sparql-results+json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
      }
    };
    server_.Get("/sparql", handler);
    server_.Post("/sparql", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/sparql"; }
  int requests() const { return requests_; }
  std::vector<std::string> queries() const {
    std::lock_guard lock(mutex_);
    return queries_;
  }

 private:
  TripleStore store_;
  Hook hook_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
  mutable std::mutex mutex_;
  std::vector<std::string> queries_;
};

/// Random store over small vocabularies so that predicates collide often.
inline std::vector<Triple> random_triples(std::mt19937& rng, std::size_t n,
                                          std::size_t entities = 40, std::size_t predicates = 6) {
  std::uniform_int_distribution<std::size_t> ent(0, entities - 1), pred(0, predicates - 1),
      kind(0, 9), small(0, 12);
  auto e = [&](std::size_t i) { return Term::iri("http://r.test/e" + std::to_string(i)); };
  std::vector<Triple> out;
  for (std::size_t i = 0; i < n; ++i) {
    Triple t;
    t.subject = kind(rng) == 0 ? Term::blank("b" + std::to_string(ent(rng))) : e(ent(rng));
    t.predicate = "http://r.test/p" + std::to_string(pred(rng));
    switch (kind(rng)) {
      case 0: case 1: case 2: case 3: t.object = e(ent(rng)); break;
      case 4: case 5: t.object = Term::literal(std::to_string(small(rng)), std::string(vocab::kXsd) + "integer"); break;
      case 6: t.object = Term::literal(std::to_string(small(rng))); break;
      case 7: t.object = Term::literal(std::to_string(small(rng)) + ".5", std::string(vocab::kXsd) + "decimal"); break;
      case 8: t.object = Term::blank("b" + std::to_string(ent(rng))); break;
      default: t.object = Term::literal("word" + std::to_string(small(rng)), {}, "en"); break;
    }
    out.push_back(std::move(t));
  }
  return out;
}


// ---------------------------------------------------------------------------
// Brute-force oracles over raw triple lists

inline std::vector<Triple> distinct_triples(const std::vector<Triple>& raw) {
  std::vector<Triple> out(raw);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Independent reimplementation by full scan over the raw triple list.
inline PredicateProfile brute_profile(const std::vector<Triple>& triples, const PredicateRef& p) {
  auto uniq = distinct_triples(triples);
  PredicateProfile out;
  out.pred = p;
  std::set<Term> subjects;
  std::vector<double> numbers;
  std::uint64_t ints = 0, ents = 0;
  for (const auto& t : uniq) {
    if (t.predicate != p.iri) continue;
    if (p.inverse && t.object.kind == TermKind::Literal) continue;
    const Term& member = p.inverse ? t.object : t.subject;
    const Term& value = p.inverse ? t.subject : t.object;
    subjects.insert(member);
    ++out.fact_count;
    if (value.kind == TermKind::Iri) ++ents;
    if (nonnegative_integer(value)) ++ints;
    if (auto d = numeric_value(value)) numbers.push_back(*d);
  }
  out.subject_count = subjects.size();
  if (!numbers.empty()) {
    std::sort(numbers.begin(), numbers.end());
    double s = 0;
    for (double d : numbers) s += d;
    out.mean_value = s / static_cast<double>(numbers.size());
    out.median_value = numbers[(numbers.size() - 1) / 2];
  }
  out.mean_per_subject = static_cast<double>(out.fact_count) / static_cast<double>(out.subject_count);
  out.integer_fraction = static_cast<double>(ints) / static_cast<double>(out.fact_count);
  out.entity_fraction = static_cast<double>(ents) / static_cast<double>(out.fact_count);
  return out;
}

// Independent double loop over every subject of the store.
inline StatisticalScore brute_statistical(const std::vector<Triple>& raw, const PredicateRef& c,
                                   const PredicateRef& e) {
  std::vector<Triple> triples;
  for (const auto& t : distinct_triples(raw))
    if (t.predicate == c.iri || t.predicate == e.iri) triples.push_back(t);
  auto member = [](const Triple& t, const PredicateRef& p) -> std::optional<Term> {
    if (t.predicate != p.iri) return std::nullopt;
    if (!p.inverse) return t.subject;
    if (t.object.is_literal()) return std::nullopt;
    return t.object;
  };
  std::set<Term> all;
  for (const auto& t : triples) {
    all.insert(t.subject);
    all.insert(t.object);
  }
  std::uint64_t c_subjects = 0, e_subjects = 0, support = 0;
  double sum = 0;
  for (const auto& s : all) {
    bool has_c = false;
    std::optional<std::uint64_t> v;
    std::uint64_t n = 0;
    for (const auto& t : triples) {
      if (auto m = member(t, c); m && *m == s) {
        has_c = true;
        const Term& obj = c.inverse ? t.subject : t.object;
        if (auto x = nonnegative_integer(obj)) v = v ? std::max(*v, *x) : *x;
      }
      if (auto m = member(t, e); m && *m == s) ++n;
    }
    c_subjects += has_c;
    e_subjects += n > 0;
    if (v && n > 0) {
      ++support;
      sum += *v == n ? 1.0 : (*v == 0 ? 0.0 : static_cast<double>(std::min(*v, n)) / static_cast<double>(std::max(*v, n)));
    }
  }
  if (support == 0) return {0, 0};
  return {sum / static_cast<double>(support) * (static_cast<double>(support) / static_cast<double>(std::min(c_subjects, e_subjects))), support};
}

/// Sorted distinct values of `p` for `subject`, by linear scan.
inline std::vector<Term> brute_values(const std::vector<Triple>& raw, const Term& subject,
                                      const PredicateRef& p) {
  std::vector<Term> out;
  for (const auto& t : raw) {
    if (t.predicate != p.iri) continue;
    if (!p.inverse && t.subject == subject) out.push_back(t.object);
    if (p.inverse && t.object == subject) out.push_back(t.subject);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Service assembly over in-memory stores

inline std::unique_ptr<KnowledgeBase> embedded_kb(const std::string& id, TripleStore store) {
  KBDescriptor d;
  d.id = id;
  d.name = id;
  d.source = DumpSource{id + ".nt"};
  return std::make_unique<EmbeddedKB>(d, std::make_shared<const TripleStore>(std::move(store)));
}

inline SetPredicate catalog_entry(const TripleStore& store, const PredicateRef& p, Variant v) {
  SetPredicate s;
  s.pred = p;
  s.label = store.label(p.iri);
  s.variant = v;
  s.confidence = 1;
  s.profile = profile_predicate(store, p);
  return s;
}

/// Treats every populated directed predicate as a set predicate (COUNTING
/// when some value is a count) and aligns all pairs with min score 0.
inline KBSetup exhaustive_setup(const std::string& id, TripleStore store) {
  KBSetup setup;
  std::vector<SetPredicate> counting, enumerating;
  for (const auto& p : enumerate_candidates(store, 1)) {
    auto vals = directed_facts(store, p);
    bool counts = std::any_of(vals.begin(), vals.end(),
                              [](const auto& f) { return nonnegative_integer(*f.object).has_value(); });
    auto entry = catalog_entry(store, p, counts ? Variant::Counting : Variant::Enumerating);
    (counts ? counting : enumerating).push_back(entry);
    setup.catalog.push_back(std::move(entry));
  }
  setup.alignments = rank_alignments(store, counting, enumerating, 0.0);
  setup.kb = embedded_kb(id, std::move(store));
  return setup;
}

inline std::unique_ptr<Service> single_kb_service(KBSetup setup) {
  std::vector<KBSetup> v;
  v.push_back(std::move(setup));
  return std::make_unique<Service>(std::move(v));
}

inline const std::string kFx = "http://fx.test/";

/// One hub subject whose counting predicate is aligned with `fanout`
/// enumerating predicates; partner k enumerates k + 1 objects. Scores mix
/// curated and automatic entries with ties.
inline std::unique_ptr<Service> fanout_service(std::size_t fanout) {
  std::string nt = "<" + kFx + "hub> <" + kFx + "numberOfThings> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n";
  for (std::size_t k = 0; k < fanout; ++k)
    for (std::size_t j = 0; j <= k; ++j)
      nt += "<" + kFx + "hub> <" + kFx + "thing" + std::to_string(k) + "> <" + kFx + "o" + std::to_string(j) + "> .\n";
  auto store = [&] {
    std::istringstream in(nt);
    return TripleStore(read_ntriples(in, ParseMode::Strict).triples);
  }();
  KBSetup setup;
  PredicateRef counting(kFx + "numberOfThings", false);
  setup.catalog.push_back(catalog_entry(store, counting, Variant::Counting));
  for (std::size_t k = 0; k < fanout; ++k) {
    PredicateRef e(kFx + "thing" + std::to_string(k), false);
    setup.catalog.push_back(catalog_entry(store, e, Variant::Enumerating));
    Alignment a;
    a.counting = counting;
    a.enumerating = e;
    if (k < 2) {
      a.score = 0.95 - 0.03 * static_cast<double>(k);
      a.provenance = Provenance::Manual;
    } else {
      a.score = k % 2 == 0 ? 0.6 : 0.3 - 0.01 * static_cast<double>(k);
      a.lexical = 0.5;
      a.statistical = 0.5;
      a.support = 1;
    }
    setup.alignments.push_back(a);
  }
  setup.kb = embedded_kb("fanout", std::move(store));
  return single_kb_service(std::move(setup));
}

/// One subject enumerating `n` objects, with an aligned count of `n`.
inline std::unique_ptr<Service> wide_service(std::size_t n) {
  std::vector<Triple> triples;
  triples.push_back({Term::iri(kFx + "big"), kFx + "memberCount",
                     Term::literal(std::to_string(n), std::string(vocab::kXsd) + "integer")});
  for (std::size_t i = 0; i < n; ++i)
    triples.push_back({Term::iri(kFx + "big"), kFx + "member", Term::iri(kFx + "m" + std::to_string(i))});
  TripleStore store(std::move(triples));
  KBSetup setup;
  PredicateRef c(kFx + "memberCount", false), e(kFx + "member", false);
  setup.catalog = {catalog_entry(store, c, Variant::Counting), catalog_entry(store, e, Variant::Enumerating)};
  Alignment a;
  a.counting = c;
  a.enumerating = e;
  a.score = 0.95;
  a.provenance = Provenance::Manual;
  setup.alignments = {a};
  setup.kb = embedded_kb("wide", std::move(store));
  return single_kb_service(std::move(setup));
}

}  // namespace testing_support
