#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace spanlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` file. Blank lines and lines starting with '#' are
/// ignored. Every key must be read before finish(), otherwise it is
/// reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback);
  long get_int(const std::string& key, long fallback);
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  /// Comma-separated list; whitespace around items is trimmed.
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback);

  /// Throws ConfigError naming every key that was never read.
  void finish() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const std::string* lookup(const std::string& key);

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

std::vector<double> parse_double_list(const std::vector<std::string>& items, const std::string& key);
std::vector<long> parse_int_list(const std::vector<std::string>& items, const std::string& key);

}  // namespace spanlab
