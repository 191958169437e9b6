#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lmf {

/// `key = value` lines; `#` starts a comment; blank lines ignored.
/// Keys are case-sensitive, later duplicates are a ParseError.
class KvConfig {
 public:
  static KvConfig parse(const std::string& text, const std::string& source = "config");
  static KvConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::int64_t> get_ints(const std::string& key, const std::vector<std::int64_t>& fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  /// Keys never read through a getter; callers report them as typos.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string source_;
  mutable std::set<std::string> read_;
};

}  // namespace lmf
