#include "lmf/kv_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lmf/errors.hpp"

namespace lmf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvConfig KvConfig::parse(const std::string& text, const std::string& source) {
  KvConfig cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw LmfError(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw LmfError(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.values_.count(key))
      throw LmfError(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                                                "' (first on line " + std::to_string(cfg.lines_[key]) + ")");
    cfg.values_[key] = value;
    cfg.lines_[key] = lineno;
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LmfError(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<std::string> KvConfig::get(const std::string& key) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

namespace {

[[noreturn]] void bad(const std::string& source, const std::string& key, const std::string& value, const char* what) {
  throw LmfError(ErrorCode::ParseError, source + ": key '" + key + "': '" + value + "' is not " + what);
}

template <class T>
T parse_number(const std::string& source, const std::string& key, const std::string& v, const char* what) {
  T out{};
  const char* b = v.data();
  if (!v.empty() && v.front() == '+') ++b;
  const auto [p, ec] = std::from_chars(b, v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(source, key, v, what);
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  // accept 1e6-style integers
  if (v->find_first_of("eE.") != std::string::npos) {
    const double d = parse_number<double>(source_, key, *v, "an integer");
    if (d != static_cast<double>(static_cast<std::int64_t>(d))) bad(source_, key, *v, "an integer");
    return static_cast<std::int64_t>(d);
  }
  return parse_number<std::int64_t>(source_, key, *v, "an integer");
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  return parse_number<double>(source_, key, *v, "a number");
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
  if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
  bad(source_, key, *v, "a boolean");
}

std::vector<double> KvConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) out.push_back(parse_number<double>(source_, key, item, "a number list"));
  return out;
}

std::vector<std::int64_t> KvConfig::get_ints(const std::string& key, const std::vector<std::int64_t>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(*v)) {
    KvConfig one;
    one.source_ = source_;
    one.values_[key] = item;
    out.push_back(one.get_int(key, 0));
  }
  return out;
}

std::vector<std::string> KvConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

}  // namespace lmf
