#pragma once

#include <chrono>
#include <regex>
#include <string>

#include <httplib.h>

#include "counqer/descriptor.hpp"
#include "counqer/error.hpp"
#include "counqer/sparql.hpp"

namespace counqer {

/// SPARQL Protocol client for one endpoint. Stateless between requests, so
/// one instance may serve any number of concurrent callers.
class SparqlClient {
 public:
  SparqlClient(std::string endpoint_url, double timeout_seconds, std::size_t page_size)
      : timeout_(timeout_seconds), page_size_(page_size) {
    static const std::regex re(R"(^(https?://[^/?#]+)([^#]*)$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(endpoint_url, m, re))
      throw ValidationError("endpoint is not an absolute HTTP(S) URL: " + endpoint_url);
    origin_ = m[1].str();
    path_ = m[2].length() ? m[2].str() : "/";
  }

  explicit SparqlClient(const KBDescriptor& kb)
      : SparqlClient(kb.endpoint(), kb.timeout_seconds, kb.page_size) {}

  /// Issues `query` once and parses the results document.
  ResultRows select_once(const std::string& query) const {
    httplib::Client cli(origin_);
    auto secs = static_cast<time_t>(timeout_);
    auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers = {{"Accept", "application/sparql-results+json"}};

    auto started = std::chrono::steady_clock::now();
    httplib::Result res;
    auto encoded = httplib::detail::encode_query_param(query);
    if (encoded.size() < 2000) {
      auto sep = path_.find('?') == std::string::npos ? "?" : "&";
      res = cli.Get(path_ + sep + "query=" + encoded, headers);
    } else {
      res = cli.Post(path_, headers, "query=" + encoded, "application/x-www-form-urlencoded");
    }
    if (!res) {
      std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed.count() >= timeout_ * 0.95))
        throw TimeoutError("SPARQL endpoint timed out after " + std::to_string(timeout_) + " s");
      throw TransportError("SPARQL request failed: " + httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300)
      throw TransportError("SPARQL endpoint returned HTTP " + std::to_string(res->status),
                           res->status);
    return parse_results_json(res->body);
  }

  /// All solutions of `query`, fetched in page_size chunks. A query that
  /// already carries its own LIMIT is sent unchanged.
  ResultRows select(const std::string& query) const {
    std::string base = query;
    if (split_limit(base)) return select_once(query);
    ResultRows all;
    for (std::size_t offset = 0;; offset += page_size_) {
      auto page = select_once(with_page(base, page_size_, offset));
      auto n = page.size();
      all.insert(all.end(), std::make_move_iterator(page.begin()),
                 std::make_move_iterator(page.end()));
      if (n < page_size_) break;
    }
    return all;
  }

 private:
  std::string origin_;
  std::string path_;
  double timeout_;
  std::size_t page_size_;
};

/// Runs a SELECT against the KB's endpoint, following pagination.
inline ResultRows sparql_select(const KBDescriptor& kb, const std::string& query) {
  if (!kb.is_endpoint()) throw ValidationError("KB '" + kb.id + "' has no SPARQL endpoint");
  return SparqlClient(kb).select(query);
}

}  // namespace counqer
