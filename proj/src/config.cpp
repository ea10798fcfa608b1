#include "tiltwalk/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace tiltwalk {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.entries_.count(full))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
    cfg.entries_[full] = {value, lineno};
  }
  return cfg;
}

const Config::Entry& Config::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError(origin_ + ": missing required field '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return entry(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? entries_.at(key).value : fallback;
}

double Config::get_double(const std::string& key) const {
  const Entry& e = entry(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key +
                      "' is not a number: '" + e.value + "'");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key) const {
  const Entry& e = entry(key);
  try {
    std::size_t pos = 0;
    const long v = std::stol(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key +
                      "' is not an integer: '" + e.value + "'");
  }
}

long Config::get_long(const std::string& key, long fallback) const {
  return has(key) ? get_long(key) : fallback;
}

std::uint64_t Config::get_seed(const std::string& key) const {
  const Entry& e = entry(key);
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key +
                      "' is not a seed: '" + e.value + "'");
  }
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const Entry& e = entry(key);
  std::vector<double> out;
  std::istringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key +
                        "' has a non-numeric item: '" + item + "'");
    }
  }
  if (out.empty())
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key + "' is empty");
  return out;
}

std::vector<long> Config::get_long_list(const std::string& key) const {
  const std::vector<double> d = get_double_list(key);
  std::vector<long> out;
  out.reserve(d.size());
  for (double v : d) out.push_back(static_cast<long>(v));
  return out;
}

std::vector<std::pair<int, double>> Config::get_weight_list(const std::string& key) const {
  const Entry& e = entry(key);
  std::vector<std::pair<int, double>> out;
  std::istringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key +
                        "' expects offset:weight pairs");
    try {
      out.emplace_back(std::stoi(trim(item.substr(0, colon))),
                       std::stod(trim(item.substr(colon + 1))));
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key +
                        "' has a malformed pair: '" + item + "'");
    }
  }
  if (out.empty())
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": field '" + key + "' is empty");
  return out;
}

}  // namespace tiltwalk
