#pragma once

// Offline pipeline stages (profile -> classify -> align -> check) and
// service assembly from a configuration.

#include <fstream>
#include <map>
#include <memory>
#include <vector>

#include "counqer/aligner.hpp"
#include "counqer/classifier.hpp"
#include "counqer/config.hpp"
#include "counqer/consistency.hpp"
#include "counqer/kb.hpp"
#include "counqer/orchestrator.hpp"
#include "counqer/profiler.hpp"

namespace counqer {

/// Base (unmarked) labels for a set of directed predicates.
inline std::map<PredicateRef, std::string> predicate_labels(const KnowledgeBase& kb,
                                                            const std::vector<PredicateProfile>& ps) {
  std::vector<std::string> iris;
  for (const auto& p : ps) iris.push_back(p.pred.iri);
  auto by_iri = iris.empty() ? std::map<std::string, std::string>{} : kb.labels(iris);
  std::map<PredicateRef, std::string> out;
  for (const auto& p : ps) out.emplace(p.pred, by_iri.at(p.pred.iri));
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot read ") + what + ": " + path.string());
  return in;
}

inline ClassifierModel load_model_file(const std::filesystem::path& path) {
  auto in = open_input(path, "model");
  return read_model(in);
}

inline std::vector<ManualAlignment> load_manual_file(const std::filesystem::path& path) {
  auto in = open_input(path, "manual alignments");
  return read_manual_tsv(in);
}

inline std::vector<PredicateProfile> run_profile(const KnowledgeBase& kb, std::size_t min_subjects) {
  return profile_all(*kb.materialize(), min_subjects);
}

inline std::vector<SetPredicate> run_classify(const KnowledgeBase& kb,
                                              const std::vector<PredicateProfile>& profiles,
                                              const ClassifierModel& model) {
  return build_catalog(profiles, predicate_labels(kb, profiles), model);
}

inline std::vector<Alignment> run_align(const KnowledgeBase& kb,
                                        const std::vector<SetPredicate>& catalog,
                                        const std::vector<ManualAlignment>& manual,
                                        double min_score) {
  return inject_manual(rank_catalog(*kb.materialize(), catalog, min_score), manual);
}

/// Opens one configured KB and obtains its catalog and alignment table,
/// from precomputed files when configured, otherwise by running the
/// pipeline over the embedded store.
inline KBSetup prepare_kb(const KBConfig& cfg) {
  KBSetup setup;
  setup.kb = open_kb(cfg.descriptor);
  const auto& id = cfg.descriptor.id;
  if (!setup.kb->is_embedded() && (!cfg.catalog || !cfg.alignments))
    throw ValidationError("KB '" + id + "': endpoint KBs need precomputed catalog and alignments");

  if (cfg.catalog) {
    auto in = open_input(*cfg.catalog, "catalog");
    setup.catalog = read_catalog_tsv(in);
  } else {
    auto model = cfg.model ? load_model_file(*cfg.model) : ClassifierModel::rules();
    setup.catalog = run_classify(*setup.kb, run_profile(*setup.kb, cfg.min_subjects), model);
  }

  std::vector<ManualAlignment> manual;
  if (cfg.manual) manual = load_manual_file(*cfg.manual);
  if (cfg.alignments) {
    auto in = open_input(*cfg.alignments, "alignment table");
    auto table = read_alignments_tsv(in);
    if (!table.rows.empty() && table.kb_id != id)
      throw ValidationError("alignment table belongs to KB '" + table.kb_id + "', not '" + id + "'");
    setup.alignments = inject_manual(std::move(table.rows), manual);
  } else {
    setup.alignments = run_align(*setup.kb, setup.catalog, manual, cfg.min_score);
  }
  return setup;
}

inline std::unique_ptr<Service> build_service(const Config& cfg) {
  if (cfg.kbs.empty()) throw ValidationError("configuration defines no KB");
  std::vector<KBSetup> setups;
  for (const auto& k : cfg.kbs) setups.push_back(prepare_kb(k));
  return std::make_unique<Service>(std::move(setups),
                                   ServiceOptions{cfg.server.cache_ttl_seconds});
}

}  // namespace counqer
