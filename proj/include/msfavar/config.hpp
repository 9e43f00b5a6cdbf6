#ifndef MSFAVAR_CONFIG_HPP
#define MSFAVAR_CONFIG_HPP

#include "msfavar/core.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace msfavar {

/// Parsed `key = value` file with [section] headers. Section and key order is
/// preserved so that recipes are applied in the order they are written.
struct Config {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;
  std::string path;

  bool has(const std::string& section, const std::string& key) const;
  const std::string* find(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
  const std::vector<std::pair<std::string, std::string>>* section(const std::string& name) const;
  void set(const std::string& section, const std::string& key, const std::string& value);
};

Config parse_config_text(const std::string& text, const std::string& origin = "<string>");
Config load_config(const std::string& path);

/// Rejects any key not known to the given sections. Sections listed in
/// `free_sections` may hold arbitrary keys (e.g. series recipes).
void check_config_keys(const Config& config, const std::vector<std::string>& free_sections = {"series"});

/// Reads [run], [model], [variables] and [prior].
ModelSpecInput model_input_from_config(const Config& config);

/// Canonical text form of a validated spec; parsing it back reproduces the spec.
std::string model_spec_to_config_text(const ModelSpec& spec);

/// SHA-256 of the canonical spec text.
std::string model_spec_hash(const ModelSpec& spec);

std::vector<std::string> split_list(const std::string& text, char sep = ',');
std::string trim(const std::string& text);
double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
std::string format_double(double value);  // round-trip exact

}  // namespace msfavar

#endif
