#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "counqer/error.hpp"
#include "counqer/profiler.hpp"
#include "counqer/text.hpp"
#include "counqer/tsv.hpp"

namespace counqer {

enum class Variant { Counting, Enumerating, None };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Counting: return "COUNTING";
    case Variant::Enumerating: return "ENUMERATING";
    case Variant::None: return "NONE";
  }
  return "NONE";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "COUNTING") return Variant::Counting;
  if (s == "ENUMERATING") return Variant::Enumerating;
  if (s == "NONE") return Variant::None;
  throw ValidationError("unknown variant '" + std::string(s) + "'");
}

inline constexpr std::size_t kNumFeatures = 6;
inline constexpr std::size_t kNumClasses = 3;  // indexed by Variant

struct FeatureVector {
  double has_count_token = 0;
  double integer_fraction = 0;
  double entity_fraction = 0;
  double log_median = 0;
  double mean_per_subject = 0;
  double is_inverse = 0;

  std::array<double, kNumFeatures> values() const {
    return {has_count_token, integer_fraction, entity_fraction,
            log_median, mean_per_subject, is_inverse};
  }
  bool operator==(const FeatureVector&) const = default;
};

inline FeatureVector featurize(std::string_view label, const PredicateProfile& profile) {
  FeatureVector f;
  f.has_count_token = text::has_count_token(label) ? 1.0 : 0.0;
  f.integer_fraction = profile.integer_fraction;
  f.entity_fraction = profile.entity_fraction;
  if (profile.median_value) f.log_median = std::log10(std::max(*profile.median_value, 0.0) + 1.0);
  f.mean_per_subject = profile.mean_per_subject;
  f.is_inverse = profile.pred.inverse ? 1.0 : 0.0;
  return f;
}

struct RuleThresholds {
  double purity = 0.95;       // minimum integer/entity fraction
  double median_cap = 1000;   // token-less counting predicates must stay below
};

using ClassWeights = std::array<std::array<double, kNumFeatures + 1>, kNumClasses>;  // last = bias

struct ClassifierModel {
  enum class Kind { Rules, Trained };
  Kind kind = Kind::Rules;
  ClassWeights weights{};  // Trained only
  RuleThresholds thresholds;

  static ClassifierModel rules(RuleThresholds t = {}) { return {Kind::Rules, {}, t}; }
  static ClassifierModel trained(const ClassWeights& w) { return {Kind::Trained, w, {}}; }
};

struct Classification {
  Variant variant = Variant::None;
  double confidence = 0;
};

inline std::array<double, kNumClasses> class_scores(const ClassWeights& w, const FeatureVector& f) {
  auto x = f.values();
  std::array<double, kNumClasses> s{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    s[c] = w[c][kNumFeatures];
    for (std::size_t j = 0; j < kNumFeatures; ++j) s[c] += w[c][j] * x[j];
  }
  return s;
}

inline std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& s) {
  double hi = *std::max_element(s.begin(), s.end());
  std::array<double, kNumClasses> p{};
  double z = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) z += (p[c] = std::exp(s[c] - hi));
  for (auto& v : p) v /= z;
  return p;
}

inline Classification classify(const FeatureVector& f, const PredicateProfile& profile,
                               const ClassifierModel& model) {
  if (model.kind == ClassifierModel::Kind::Trained) {
    auto p = softmax(class_scores(model.weights, f));
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c)
      if (p[c] > p[best]) best = c;
    return {static_cast<Variant>(best), p[best]};
  }
  const auto& t = model.thresholds;
  if (f.entity_fraction >= t.purity)
    return {Variant::Enumerating, std::min(1.0, 0.5 + 0.5 * f.entity_fraction)};
  bool type_signal = f.integer_fraction >= t.purity;
  bool token_signal = f.has_count_token == 1.0;
  bool small_median = profile.median_value && *profile.median_value <= t.median_cap;
  if (type_signal && (token_signal || small_median))
    return {Variant::Counting, std::min(1.0, 0.5 + 0.25 * type_signal + 0.25 * token_signal)};
  return {Variant::None,
          0.5 + 0.5 * (1.0 - std::max(f.integer_fraction, f.entity_fraction))};
}

inline Classification classify(std::string_view label, const PredicateProfile& profile,
                               const ClassifierModel& model) {
  return classify(featurize(label, profile), profile, model);
}

// ---------------------------------------------------------------------------
// Supervised path: multinomial logistic regression, full-batch gradient descent

struct LabeledExample {
  FeatureVector features;
  Variant label = Variant::None;
};

/// Mean cross-entropy of the softmax model over `data`.
inline double cross_entropy(const ClassWeights& w, std::span<const LabeledExample> data) {
  double loss = 0;
  for (const auto& ex : data) {
    auto s = class_scores(w, ex.features);
    double hi = *std::max_element(s.begin(), s.end());
    double z = 0;
    for (double v : s) z += std::exp(v - hi);
    loss -= s[static_cast<std::size_t>(ex.label)] - hi - std::log(z);
  }
  return loss / static_cast<double>(data.size());
}

/// Analytic gradient of cross_entropy: mean of (p - onehot(y)) x^T.
inline ClassWeights cross_entropy_gradient(const ClassWeights& w,
                                           std::span<const LabeledExample> data) {
  ClassWeights g{};
  for (const auto& ex : data) {
    auto p = softmax(class_scores(w, ex.features));
    auto x = ex.features.values();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      double r = p[c] - (static_cast<std::size_t>(ex.label) == c ? 1.0 : 0.0);
      for (std::size_t j = 0; j < kNumFeatures; ++j) g[c][j] += r * x[j];
      g[c][kNumFeatures] += r;
    }
  }
  for (auto& row : g)
    for (auto& v : row) v /= static_cast<double>(data.size());
  return g;
}

struct TrainOptions {
  std::size_t epochs = 200;
  double learning_rate = 0.1;
};

/// Zero-initialized, deterministic full-batch gradient descent.
inline ClassifierModel train(std::span<const LabeledExample> data, TrainOptions opt = {}) {
  std::array<std::size_t, kNumClasses> seen{};
  for (const auto& ex : data) ++seen[static_cast<std::size_t>(ex.label)];
  for (std::size_t c = 0; c < kNumClasses; ++c)
    if (seen[c] == 0)
      throw ValidationError(std::string("training set has no ") + to_string(static_cast<Variant>(c)) +
                            " example");
  if (!(opt.learning_rate > 0)) throw ValidationError("learning rate must be positive");

  ClassWeights w{};
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    auto g = cross_entropy_gradient(w, data);
    for (std::size_t c = 0; c < kNumClasses; ++c)
      for (std::size_t j = 0; j <= kNumFeatures; ++j) w[c][j] -= opt.learning_rate * g[c][j];
  }
  for (const auto& row : w)
    for (double v : row)
      if (!std::isfinite(v)) throw ValidationError("training diverged to non-finite weights");
  return ClassifierModel::trained(w);
}

// ---------------------------------------------------------------------------
// Model persistence

inline const std::vector<std::string>& model_tsv_header() {
  static const std::vector<std::string> h = {"class", "has_count_token", "integer_fraction",
                                             "entity_fraction", "log_median", "mean_per_subject",
                                             "is_inverse", "bias"};
  return h;
}

inline void write_model(std::ostream& out, const ClassifierModel& model) {
  if (model.kind == ClassifierModel::Kind::Rules) {
    out << "RULES\n";
    return;
  }
  out << tsv::join(model_tsv_header()) << '\n';
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<std::string> cells = {to_string(static_cast<Variant>(c))};
    for (double v : model.weights[c]) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", v);
      cells.emplace_back(buf);
    }
    out << tsv::join(cells) << '\n';
  }
}

inline ClassifierModel read_model(std::istream& in) {
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto body = std::string_view(all);
  while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.remove_suffix(1);
  if (body == "RULES") return ClassifierModel::rules();

  std::istringstream ss(all);
  tsv::Reader reader(ss, model_tsv_header(), "model");
  ClassWeights w{};
  std::array<bool, kNumClasses> loaded{};
  while (auto row = reader.next()) {
    Variant v;
    try {
      v = parse_variant((*row)[0]);
    } catch (const ValidationError&) {
      reader.fail("unknown class '" + (*row)[0] + "'");
    }
    auto c = static_cast<std::size_t>(v);
    for (std::size_t j = 0; j <= kNumFeatures; ++j) {
      w[c][j] = reader.parse_double((*row)[j + 1]);
      if (!std::isfinite(w[c][j])) reader.fail("non-finite weight");
    }
    loaded[c] = true;
  }
  for (bool b : loaded)
    if (!b) throw ValidationError("model: missing class row");
  return ClassifierModel::trained(w);
}

// ---------------------------------------------------------------------------
// Labeled seed set: iri, inverse, label, class

struct SeedEntry {
  PredicateRef pred;
  std::string label;
  Variant label_class = Variant::None;
};

inline std::vector<SeedEntry> read_seed_tsv(std::istream& in) {
  tsv::Reader reader(in, {"iri", "inverse", "label", "class"}, "seed set");
  std::vector<SeedEntry> out;
  while (auto row = reader.next()) {
    const auto& c = *row;
    if (!is_absolute_iri(c[0])) reader.fail("bad IRI '" + c[0] + "'");
    SeedEntry e{PredicateRef(c[0], reader.parse_bool(c[1])), c[2], Variant::None};
    try {
      e.label_class = parse_variant(c[3]);
    } catch (const ValidationError&) {
      reader.fail("unknown class '" + c[3] + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Set-predicate catalog

/// A directed predicate classified as counting or enumerating.
struct SetPredicate {
  PredicateRef pred;
  std::string label;  // base label, without the inverse marker
  Variant variant = Variant::Counting;
  double confidence = 0;
  PredicateProfile profile;

  std::string display() const { return display_label(label, pred.inverse); }
};

/// Classifies every profile; NONE results are dropped, as are trained-model
/// verdicts failing the type-purity gate a set predicate must satisfy.
inline std::vector<SetPredicate> build_catalog(const std::vector<PredicateProfile>& profiles,
                                               const std::map<PredicateRef, std::string>& labels,
                                               const ClassifierModel& model) {
  const double purity = RuleThresholds{}.purity;
  std::vector<SetPredicate> out;
  for (const auto& p : profiles) {
    auto it = labels.find(p.pred);
    std::string label = it != labels.end() ? it->second : local_name(p.pred.iri);
    auto r = classify(label, p, model);
    if (r.variant == Variant::None) continue;
    if (r.variant == Variant::Counting && p.integer_fraction < purity) continue;
    if (r.variant == Variant::Enumerating && p.entity_fraction < purity) continue;
    out.push_back({p.pred, std::move(label), r.variant, r.confidence, p});
  }
  return out;
}

inline const std::vector<std::string>& catalog_tsv_header() {
  static const std::vector<std::string> h = {
      "iri", "inverse", "label", "variant", "confidence", "subject_count", "fact_count",
      "mean_value", "median_value", "mean_per_subject", "integer_fraction", "entity_fraction"};
  return h;
}

inline void write_catalog_tsv(std::ostream& out, const std::vector<SetPredicate>& catalog) {
  out << tsv::join(catalog_tsv_header()) << '\n';
  for (const auto& s : catalog) {
    const auto& p = s.profile;
    out << tsv::join({s.pred.iri, tsv::boolean(s.pred.inverse), s.label, to_string(s.variant),
                      tsv::fixed6(s.confidence), std::to_string(p.subject_count),
                      std::to_string(p.fact_count), tsv::fixed6(p.mean_value),
                      tsv::fixed6(p.median_value), tsv::fixed6(p.mean_per_subject),
                      tsv::fixed6(p.integer_fraction), tsv::fixed6(p.entity_fraction)})
        << '\n';
  }
}

inline std::vector<SetPredicate> read_catalog_tsv(std::istream& in) {
  tsv::Reader reader(in, catalog_tsv_header(), "catalog");
  std::vector<SetPredicate> out;
  while (auto row = reader.next()) {
    const auto& c = *row;
    if (!is_absolute_iri(c[0])) reader.fail("bad IRI '" + c[0] + "'");
    SetPredicate s;
    s.pred = PredicateRef(c[0], reader.parse_bool(c[1]));
    s.label = c[2];
    try {
      s.variant = parse_variant(c[3]);
    } catch (const ValidationError&) {
      reader.fail("unknown variant '" + c[3] + "'");
    }
    if (s.variant == Variant::None) reader.fail("catalog rows must be COUNTING or ENUMERATING");
    s.confidence = reader.parse_double(c[4]);
    auto& p = s.profile;
    p.pred = s.pred;
    p.subject_count = reader.parse_uint(c[5]);
    p.fact_count = reader.parse_uint(c[6]);
    p.mean_value = reader.parse_optional_double(c[7]);
    p.median_value = reader.parse_optional_double(c[8]);
    p.mean_per_subject = reader.parse_double(c[9]);
    p.integer_fraction = reader.parse_double(c[10]);
    p.entity_fraction = reader.parse_double(c[11]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace counqer
