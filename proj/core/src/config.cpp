#include "neuronlab/config.hpp"

#include <charconv>
#include <fstream>

#include "neuronlab/errors.hpp"

namespace neuronlab {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("bad number '" + std::string(text) + "' for '" +
                      std::string(what) + "'");
  }
  return out;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) {
    return out;
  }
  // Accept integral values written in floating notation such as 1e4.
  const double d = parse_double(text, what);
  if (d != static_cast<double>(static_cast<std::int64_t>(d))) {
    throw ConfigError("expected an integer for '" + std::string(what) +
                      "', got '" + std::string(text) + "'");
  }
  return static_cast<std::int64_t>(d);
}

std::uint64_t parse_seed(std::string_view text) {
  text = trim(text);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("bad seed '" + std::string(text) +
                      "': expected an unsigned 64-bit integer");
  }
  return out;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && text[i] == '(') ++depth;
    if (i < text.size() && text[i] == ')') --depth;
    if (i == text.size() || (text[i] == ',' && depth == 0)) {
      const auto item = trim(text.substr(start, i - start));
      if (!item.empty()) parts.emplace_back(item);
      start = i + 1;
    }
  }
  return parts;
}

const std::string& ExperimentSpec::get(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) {
    throw ConfigError("experiment '" + name + "' has no parameter '" + key + "'");
  }
  return it->second;
}

double ExperimentSpec::get_double(const std::string& key) const {
  return parse_double(get(key), key);
}

std::int64_t ExperimentSpec::get_int(const std::string& key) const {
  return parse_int(get(key), key);
}

std::vector<double> ExperimentSpec::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get(key))) out.push_back(parse_double(item, key));
  return out;
}

std::vector<std::string> ExperimentSpec::get_list(const std::string& key) const {
  return split_list(get(key));
}

void ExperimentSpec::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  }
  const std::string key(trim(assignment.substr(0, eq)));
  const std::string value(trim(assignment.substr(eq + 1)));
  if (key == "trials") {
    trials = static_cast<int>(parse_int(value, key));
  } else if (key == "seed") {
    seed = parse_seed(value);
  } else if (params.count(key) != 0) {
    params[key] = value;
  } else {
    throw ConfigError("unknown parameter '" + key + "' for experiment '" + name +
                      "'");
  }
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw ConfigError("experiment needs a name");
  if (trials < 1) throw ConfigError("trials must be >= 1, got " + std::to_string(trials));
}

std::vector<std::string> read_config_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.find('=') == std::string_view::npos) {
      throw ConfigError("config line without '=': '" + std::string(t) + "'");
    }
    out.emplace_back(t);
  }
  return out;
}

}  // namespace neuronlab
