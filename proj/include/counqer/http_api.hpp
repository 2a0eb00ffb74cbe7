#pragma once

#include <functional>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "counqer/orchestrator.hpp"

namespace counqer {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON views

inline json to_json(const QueryRow& row) {
  json j = {{"iri", row.pred.iri},
            {"inverse", row.pred.inverse},
            {"label", row.label},
            {"variant", to_string(row.variant)},
            {"role", to_string(row.role)},
            {"total_cardinality", row.total_cardinality},
            {"sparql", row.sparql}};
  if (row.alignment_score) j["alignment_score"] = *row.alignment_score;
  if (row.provenance) j["provenance"] = to_string(*row.provenance);
  if (row.variant == Variant::Counting) {
    if (row.count_value) j["count_value"] = *row.count_value;
  } else {
    json list = json::array();
    for (const auto& e : row.enumeration) list.push_back({{"iri", e.iri}, {"label", e.label}});
    j["enumeration"] = std::move(list);
  }
  json stats = json::object();
  if (row.stats.mean_value) stats["mean_value"] = *row.stats.mean_value;
  if (row.stats.mean_per_subject) stats["mean_per_subject"] = *row.stats.mean_per_subject;
  j["stats"] = std::move(stats);
  if (row.error) j["error"] = *row.error;
  return j;
}

inline json to_json(const SPOAnswer& a) {
  json related = json::array();
  for (const auto& r : a.related) related.push_back(to_json(r));
  return {{"main", to_json(a.main)}, {"related", std::move(related)}};
}

inline json to_json(const ConsistencyReport& r) {
  json j = {{"subject", r.subject},
            {"counting", {{"iri", r.counting.iri}, {"inverse", r.counting.inverse}}},
            {"enumerating", {{"iri", r.enumerating.iri}, {"inverse", r.enumerating.inverse}}},
            {"cardinality", r.cardinality},
            {"verdict", to_string(r.verdict)}};
  j["count_value"] = r.count_value ? json(*r.count_value) : json(nullptr);
  return j;
}

inline json to_json(const AlignmentView& v) {
  const auto& a = *v.alignment;
  json j = {{"counting", {{"iri", a.counting.iri}, {"inverse", a.counting.inverse}, {"label", v.counting_label}}},
            {"enumerating",
             {{"iri", a.enumerating.iri}, {"inverse", a.enumerating.inverse}, {"label", v.enumerating_label}}},
            {"score", a.score},
            {"provenance", to_string(a.provenance)},
            {"sparql_cooccurrence", v.sparql_cooccurrence}};
  if (a.lexical) j["lexical"] = *a.lexical;
  if (a.statistical) j["statistical"] = *a.statistical;
  if (a.support) j["support"] = *a.support;
  return j;
}

// ---------------------------------------------------------------------------

struct HttpError {
  int status;
  const char* code;
};

inline HttpError classify_error(const std::exception& e) {
  if (dynamic_cast<const NotFoundError*>(&e)) return {404, "not_found"};
  if (dynamic_cast<const ValidationError*>(&e)) return {400, "invalid_request"};
  if (dynamic_cast<const TimeoutError*>(&e)) return {504, "timeout"};
  if (dynamic_cast<const TransportError*>(&e)) return {502, "transport"};
  if (dynamic_cast<const ProtocolError*>(&e)) return {502, "protocol"};
  return {500, "internal"};
}

/// HTTP JSON API over a Service. All endpoints are GET and stateless.
class ApiServer {
 public:
  explicit ApiServer(const Service& service, std::optional<std::filesystem::path> static_dir = {})
      : service_(service) {
    route("/api/kbs", [this](const httplib::Request&) {
      json out = json::array();
      for (const auto& [id, name] : service_.kbs()) out.push_back({{"id", id}, {"name", name}});
      return out;
    });
    route("/api/suggest/entity", [this](const httplib::Request& req) {
      auto limit = optional_uint(req, "limit").value_or(10);
      json out = json::array();
      for (const auto& s : service_.suggest_entities(required(req, "kb"), required(req, "prefix"), limit))
        out.push_back({{"iri", s.iri}, {"label", s.label}});
      return out;
    });
    route("/api/suggest/predicate", [this](const httplib::Request& req) {
      json out = json::array();
      for (const auto& s : service_.suggest_predicates(required(req, "kb"), required(req, "entity"))) {
        json j = {{"iri", s.pred.iri}, {"inverse", s.pred.inverse}, {"label", s.label},
                  {"tier", s.tier}, {"variant", to_string(s.variant)}};
        j["best_score"] = s.best_score ? json(*s.best_score) : json(nullptr);
        out.push_back(std::move(j));
      }
      return out;
    });
    route("/api/query", [this](const httplib::Request& req) {
      SPOQuery q{required(req, "kb"), required(req, "subject"),
                 PredicateRef(required(req, "predicate"), flag(req, "inverse"))};
      return to_json(service_.answer_spo(q));
    });
    route("/api/alignments", [this](const httplib::Request& req) {
      auto page = service_.browse_alignments(required(req, "kb"), req.get_param_value("search"),
                                             optional_uint(req, "offset").value_or(0),
                                             optional_uint(req, "limit").value_or(50));
      json rows = json::array();
      for (const auto& v : page.rows) rows.push_back(to_json(v));
      return json{{"total", page.total}, {"rows", std::move(rows)}};
    });
    route("/api/consistency", [this](const httplib::Request& req) {
      return to_json(service_.check_consistency(
          required(req, "kb"), required(req, "subject"),
          PredicateRef(required(req, "counting"), flag(req, "counting_inverse")),
          PredicateRef(required(req, "enumerating"), flag(req, "enumerating_inverse"))));
    });
    if (static_dir && !server_.set_mount_point("/", static_dir->string()))
      throw ValidationError("static directory does not exist: " + static_dir->string());
  }

  /// Binds `host:port`; port 0 picks an ephemeral port. Returns the bound port.
  int bind(const std::string& host, int port) {
    int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }

  /// Serves until stop() is called.
  bool run() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  using Handler = std::function<json(const httplib::Request&)>;

  void route(const std::string& path, Handler h) {
    server_.Get(path, [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        res.set_content(h(req).dump(), "application/json");
      } catch (const std::exception& e) {
        auto err = classify_error(e);
        res.status = err.status;
        json body = {{"error", {{"code", err.code}, {"message", e.what()}}}};
        res.set_content(body.dump(), "application/json");
      }
    });
  }

  static std::string required(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) throw ValidationError(std::string("missing parameter '") + name + "'");
    return req.get_param_value(name);
  }

  static bool flag(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return false;
    auto v = req.get_param_value(name);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0" || v.empty()) return false;
    throw ValidationError(std::string("parameter '") + name + "' must be true or false");
  }

  static std::optional<std::size_t> optional_uint(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    auto v = req.get_param_value(name);
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty())
      throw ValidationError(std::string("parameter '") + name + "' must be a non-negative integer");
    return n;
  }

  const Service& service_;
  httplib::Server server_;
};

}  // namespace counqer
