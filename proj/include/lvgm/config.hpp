#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lvgm {

/// Flat key=value run configuration ('#' starts a comment).  Getters record
/// which keys a command consumed; finalize() rejects anything left over, so
/// misspelled keys fail fast instead of silently using defaults.
class RunConfig {
 public:
  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  double require_double(const std::string& key);
  long get_long(const std::string& key, long fallback);
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback);

  /// Throws ConfigError listing any key never consumed by a getter.
  void finalize() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;

  const std::string* lookup(const std::string& key) const;
};

}  // namespace lvgm
