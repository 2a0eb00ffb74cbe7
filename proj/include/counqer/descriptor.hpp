#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>

#include "counqer/error.hpp"

namespace counqer {

struct EndpointSource {
  std::string url;  // absolute http(s) URL of a SPARQL service
};

struct DumpSource {
  std::filesystem::path path;  // N-Triples file
};

/// One configured knowledge base.
struct KBDescriptor {
  std::string id;
  std::string name;
  std::variant<EndpointSource, DumpSource> source;
  std::map<std::string, std::string> prefixes;
  double timeout_seconds = 30.0;
  std::size_t page_size = 1000;

  bool is_endpoint() const noexcept { return std::holds_alternative<EndpointSource>(source); }
  bool is_dump() const noexcept { return std::holds_alternative<DumpSource>(source); }
  const std::string& endpoint() const { return std::get<EndpointSource>(source).url; }
  const std::filesystem::path& dump() const { return std::get<DumpSource>(source).path; }
};

inline bool valid_kb_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-')) return false;
  return true;
}

inline void validate(const KBDescriptor& kb) {
  if (!valid_kb_id(kb.id))
    throw ValidationError("KB id must match [a-z0-9_-]+: '" + kb.id + "'");
  if (!(kb.timeout_seconds > 0)) throw ValidationError("KB '" + kb.id + "': timeout must be > 0");
  if (kb.page_size == 0) throw ValidationError("KB '" + kb.id + "': page_size must be > 0");
  if (kb.is_endpoint()) {
    const auto& url = kb.endpoint();
    if (!(url.starts_with("http://") || url.starts_with("https://")) || url.find("://") + 3 >= url.size())
      throw ValidationError("KB '" + kb.id + "': endpoint must be an absolute HTTP(S) URL");
  } else if (kb.dump().empty()) {
    throw ValidationError("KB '" + kb.id + "': dump path is empty");
  }
}

}  // namespace counqer
