#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "counqer/descriptor.hpp"
#include "counqer/error.hpp"

namespace counqer {

/// One `[kb.<id>]` section: the descriptor plus offline-pipeline inputs.
struct KBConfig {
  KBDescriptor descriptor;
  std::optional<std::filesystem::path> catalog;     // precomputed set-predicate catalog
  std::optional<std::filesystem::path> alignments;  // precomputed alignment table
  std::optional<std::filesystem::path> manual;      // curated alignments merged at startup
  std::optional<std::filesystem::path> model;       // trained classifier weights
  std::size_t min_subjects = 2;
  double min_score = 0.05;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  double cache_ttl_seconds = 300;
  std::optional<std::filesystem::path> static_dir;
};

struct Config {
  ServerConfig server;
  std::vector<KBConfig> kbs;

  const KBConfig& kb(const std::string& id) const {
    for (const auto& k : kbs)
      if (k.descriptor.id == id) return k;
    throw NotFoundError("unknown KB '" + id + "'");
  }
};

namespace detail {

inline std::string strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

template <typename T>
T parse_number(const std::string& value, const std::string& where) {
  T v{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size())
    throw ValidationError(where + ": bad number '" + value + "'");
  return v;
}

}  // namespace detail

/// Parses the INI-style configuration text. Relative file paths resolve
/// against `base_dir`.
inline Config parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  Config cfg;
  enum class Section { None, Server, Kb } section = Section::None;
  KBConfig* kb = nullptr;
  bool has_source = false;
  std::vector<bool> sourced;

  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    auto where = "config line " + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + ": unterminated section header");
      auto name = detail::strip(std::string_view(line).substr(1, line.size() - 2));
      if (kb) sourced.push_back(has_source);
      kb = nullptr;
      if (name == "server") {
        section = Section::Server;
      } else if (name.starts_with("kb.")) {
        section = Section::Kb;
        KBConfig k;
        k.descriptor.id = name.substr(3);
        if (!valid_kb_id(k.descriptor.id))
          throw ValidationError(where + ": KB id must match [a-z0-9_-]+: '" + k.descriptor.id + "'");
        for (const auto& other : cfg.kbs)
          if (other.descriptor.id == k.descriptor.id)
            throw ValidationError(where + ": duplicate KB '" + k.descriptor.id + "'");
        k.descriptor.name = k.descriptor.id;
        cfg.kbs.push_back(std::move(k));
        kb = &cfg.kbs.back();
        has_source = false;
      } else {
        throw ValidationError(where + ": unknown section '" + name + "'");
      }
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
    auto key = detail::strip(std::string_view(line).substr(0, eq));
    auto value = detail::strip(std::string_view(line).substr(eq + 1));

    if (section == Section::Server) {
      if (key == "port") cfg.server.port = detail::parse_number<int>(value, where);
      else if (key == "cache_ttl") cfg.server.cache_ttl_seconds = detail::parse_number<double>(value, where);
      else if (key == "host") cfg.server.host = value;
      else if (key == "static_dir") cfg.server.static_dir = path_of(value);
      else throw ValidationError(where + ": unknown server key '" + key + "'");
    } else if (section == Section::Kb) {
      auto& d = kb->descriptor;
      if (key == "name") d.name = value;
      else if (key == "endpoint" || key == "dump") {
        if (has_source) throw ValidationError(where + ": KB '" + d.id + "' has both endpoint and dump");
        has_source = true;
        if (key == "endpoint") d.source = EndpointSource{value};
        else d.source = DumpSource{path_of(value)};
      } else if (key == "timeout") d.timeout_seconds = detail::parse_number<double>(value, where);
      else if (key == "page_size") d.page_size = detail::parse_number<std::size_t>(value, where);
      else if (key.starts_with("prefix.")) d.prefixes[key.substr(7)] = value;
      else if (key == "catalog") kb->catalog = path_of(value);
      else if (key == "alignments") kb->alignments = path_of(value);
      else if (key == "manual") kb->manual = path_of(value);
      else if (key == "model") kb->model = path_of(value);
      else if (key == "min_subjects") kb->min_subjects = detail::parse_number<std::size_t>(value, where);
      else if (key == "min_score") kb->min_score = detail::parse_number<double>(value, where);
      else throw ValidationError(where + ": unknown KB key '" + key + "'");
    } else {
      throw ValidationError(where + ": key outside any section");
    }
  }
  if (kb) sourced.push_back(has_source);

  for (std::size_t i = 0; i < cfg.kbs.size(); ++i) {
    if (!sourced[i])
      throw ValidationError("KB '" + cfg.kbs[i].descriptor.id + "' needs an endpoint or a dump");
    validate(cfg.kbs[i].descriptor);
  }
  if (cfg.server.port < 0 || cfg.server.port > 65535)
    throw ValidationError("server port out of range");
  return cfg;
}

/// Reads a configuration file. A missing file is a validation error.
inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path.string());
  return parse_config(in, path.parent_path());
}

}  // namespace counqer
