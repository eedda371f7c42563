#include "spanlab/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

namespace spanlab {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key \"" + key + "\": cannot parse \"" + text + "\"");
  }
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    if (!config.values_.emplace(key, trim(text.substr(eq + 1))).second) {
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key \"" + key + "\"");
    }
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse(in);
}

const std::string* KeyValueConfig::lookup(const std::string& key) {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) {
  const std::string* v = lookup(key);
  return v ? *v : fallback;
}

long KeyValueConfig::get_int(const std::string& key, long fallback) {
  const std::string* v = lookup(key);
  return v ? parse_number<long>(key, *v) : fallback;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) {
  const std::string* v = lookup(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
  const std::string* v = lookup(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("config key \"" + key + "\": expected a boolean, got \"" + *v + "\"");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key,
                                                  const std::vector<std::string>& fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  std::vector<std::string> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = v->find(',', start);
    const std::string item = trim(v->substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

void KeyValueConfig::finish() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!used_.contains(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

std::vector<double> parse_double_list(const std::vector<std::string>& items, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : items) out.push_back(parse_number<double>(key, item));
  return out;
}

std::vector<long> parse_int_list(const std::vector<std::string>& items, const std::string& key) {
  std::vector<long> out;
  for (const auto& item : items) out.push_back(parse_number<long>(key, item));
  return out;
}

}  // namespace spanlab
