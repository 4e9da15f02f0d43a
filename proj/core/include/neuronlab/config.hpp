#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace neuronlab {

// A named experiment: trial count, base seed, and a flat map of
// experiment-specific parameters (distribution, activation, step size, ...).
struct ExperimentSpec {
  std::string name;
  std::string description;
  int trials = 1;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;

  // Typed lookups. Throw ConfigError naming the key when it is missing or
  // does not parse.
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // Applies "key=value". "trials" and "seed" set the fields; any other key
  // must already exist in params, so typos fail loudly.
  void apply_override(std::string_view assignment);

  void validate() const;
};

// Parses "key=value" lines; blank lines and lines starting with '#' are
// skipped.
std::vector<std::string> read_config_lines(const std::string& path);

// Comma-separated list "a,b,c" (parentheses protect nested commas).
std::vector<std::string> split_list(std::string_view text);

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_seed(std::string_view text);

}  // namespace neuronlab
