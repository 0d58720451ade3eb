#include "lvgm/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lvgm/errors.hpp"

namespace lvgm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

RunConfig RunConfig::from_string(const std::string& text) {
  RunConfig cfg;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

const std::string* RunConfig::lookup(const std::string& key) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) {
  const std::string* v = lookup(key);
  return v ? *v : fallback;
}

std::string RunConfig::require_string(const std::string& key) {
  const std::string* v = lookup(key);
  if (!v || v->empty()) throw ConfigError("config: missing required key '" + key + "'");
  return *v;
}

double RunConfig::get_double(const std::string& key, double fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const double x = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: " + *v);
  }
}

double RunConfig::require_double(const std::string& key) {
  if (!has(key)) throw ConfigError("config: missing required key '" + key + "'");
  return get_double(key, 0.0);
}

long RunConfig::get_long(const std::string& key, long fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const long x = std::stol(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an integer: " + *v);
  }
}

std::uint64_t RunConfig::get_seed(const std::string& key, std::uint64_t fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a seed: " + *v);
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("config: key '" + key + "' is not a boolean: " + *v);
}

std::vector<double> RunConfig::get_double_list(const std::string& key,
                                               std::vector<double> fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    if (field.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(field, &pos));
      if (pos != field.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' has a non-numeric entry: " + field);
    }
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' is an empty list");
  return out;
}

void RunConfig::finalize() const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "config: unknown key(s):";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw ConfigError(msg);
  }
}

}  // namespace lvgm
