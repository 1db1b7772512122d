#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "enkbf/experiment.hpp"

namespace enkbf {

// Minimal TOML reader covering the config schema used here: [section]
// headers, key = value lines with booleans, integers, floats, quoted
// strings and flat arrays of numbers, and # comments. Unknown syntax is
// an error with a line number.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = {}) const;
  double get_number(const std::string& section, const std::string& key,
                    std::optional<double> fallback = {}) const;
  long get_integer(const std::string& section, const std::string& key,
                   std::optional<long> fallback = {}) const;
  bool get_bool(const std::string& section, const std::string& key,
                std::optional<bool> fallback = {}) const;
  std::vector<double> get_number_array(const std::string& section,
                                       const std::string& key) const;

 private:
  struct Value {
    std::string raw;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Value>> sections_;
  std::string origin_;

  const Value* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const std::string& what, int line) const;
};

// Build an ExperimentConfig from a TOML file; missing keys fall back to
// the documented defaults.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from(const ConfigFile& file);

}  // namespace enkbf
