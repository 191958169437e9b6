#include "lmf/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <climits>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lmf/errors.hpp"

namespace lmf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
std::optional<T> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

[[noreturn]] void parse_error(const std::string& source, std::int64_t line, const std::string& msg) {
  throw LmfError(ErrorCode::ParseError, source + ": line " + std::to_string(line) + ": " + msg);
}

struct RawRow {
  std::int64_t seq;
  std::string trader;
  int sign;
  std::int64_t day;      // ordinal or epoch day
  bool day_is_date;
  bool has_day;
  std::int32_t clock;    // -1 when absent
  std::int64_t line;
};

}  // namespace

std::optional<int> parse_sign_token(std::string_view t) {
  if (t == "+1" || t == "1" || t == "B" || t == "b") return 1;
  if (t == "-1" || t == "S" || t == "s") return -1;
  return std::nullopt;
}

std::optional<std::int64_t> parse_iso_date(std::string_view t) {
  if (t.size() != 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
  const auto y = parse_int<int>(t.substr(0, 4));
  const auto m = parse_int<unsigned>(t.substr(5, 2));
  const auto d = parse_int<unsigned>(t.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*m}, std::chrono::day{*d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::optional<std::int32_t> parse_clock(std::string_view t) {
  if (t.size() != 8 || t[2] != ':' || t[5] != ':') return std::nullopt;
  const auto h = parse_int<int>(t.substr(0, 2));
  const auto m = parse_int<int>(t.substr(3, 2));
  const auto s = parse_int<int>(t.substr(6, 2));
  if (!h || !m || !s || *h > 23 || *m > 59 || *s > 60) return std::nullopt;
  return *h * 3600 + *m * 60 + *s;
}

IngestResult ingest(std::istream& in, const IngestOptions& options, const std::string& source) {
  if (options.min_transactions < 0) throw LmfError(ErrorCode::InvalidConfig, "min_transactions must be >= 0");
  if (options.trim_minutes < 0) throw LmfError(ErrorCode::InvalidConfig, "trim_minutes must be >= 0");

  std::string line;
  std::int64_t lineno = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty() && trim(line).front() != '#') {
      header_line = line;
      header = split(header_line);
      break;
    }
  }
  if (header.empty()) parse_error(source, lineno, "missing header");

  int c_label = -1, c_seq = -1, c_trader = -1, c_sign = -1, c_day = -1, c_time = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = header[i];
    int* slot = h == "label" ? &c_label : h == "seq" ? &c_seq : h == "trader_id" ? &c_trader
              : h == "sign" ? &c_sign : h == "day" ? &c_day : h == "time" ? &c_time : nullptr;
    if (!slot) parse_error(source, lineno, "unknown column '" + std::string(h) + "'");
    if (*slot >= 0) parse_error(source, lineno, "duplicate column '" + std::string(h) + "'");
    *slot = static_cast<int>(i);
  }
  if (c_seq < 0 || c_trader < 0 || c_sign < 0)
    parse_error(source, lineno, "header must name seq, trader_id and sign");

  const std::string fallback = options.default_label.empty() ? std::filesystem::path(source).stem().string()
                                                             : options.default_label;
  std::map<std::string, std::vector<RawRow>> groups;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(t);
    if (f.size() != header.size())
      parse_error(source, lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(f.size()));
    RawRow r{};
    r.line = lineno;
    const auto seq = parse_int<std::int64_t>(f[static_cast<std::size_t>(c_seq)]);
    if (!seq) parse_error(source, lineno, "bad seq '" + std::string(f[static_cast<std::size_t>(c_seq)]) + "'");
    r.seq = *seq;
    r.trader = std::string(f[static_cast<std::size_t>(c_trader)]);
    if (r.trader.empty()) parse_error(source, lineno, "empty trader_id");
    const auto sign = parse_sign_token(f[static_cast<std::size_t>(c_sign)]);
    if (!sign) parse_error(source, lineno, "unknown sign token '" + std::string(f[static_cast<std::size_t>(c_sign)]) + "'");
    r.sign = *sign;
    r.clock = -1;
    if (c_day >= 0 && !f[static_cast<std::size_t>(c_day)].empty()) {
      const auto tok = f[static_cast<std::size_t>(c_day)];
      if (const auto d = parse_int<std::int64_t>(tok); d && *d >= 0 && *d < INT32_MAX) {
        r.day = *d;
      } else if (const auto iso = parse_iso_date(tok)) {
        r.day = *iso;
        r.day_is_date = true;
      } else {
        parse_error(source, lineno, "bad day '" + std::string(tok) + "'");
      }
      r.has_day = true;
    }
    if (c_time >= 0 && !f[static_cast<std::size_t>(c_time)].empty()) {
      const auto c = parse_clock(f[static_cast<std::size_t>(c_time)]);
      if (!c) parse_error(source, lineno, "bad time '" + std::string(f[static_cast<std::size_t>(c_time)]) + "'");
      r.clock = *c;
    }
    std::string label = c_label >= 0 ? std::string(f[static_cast<std::size_t>(c_label)]) : fallback;
    if (label.empty()) label = fallback;
    groups[label].push_back(std::move(r));
  }

  IngestResult result;
  for (auto& [label, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.seq < b.seq; });
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].seq == rows[i - 1].seq) parse_error(source, rows[i].line, "duplicate seq " + std::to_string(rows[i].seq));
    const bool any_day = std::any_of(rows.begin(), rows.end(), [](const RawRow& r) { return r.has_day; });
    if (any_day) {
      for (const auto& r : rows) {
        if (!r.has_day) parse_error(source, r.line, "day missing while other rows of '" + label + "' carry one");
        if (r.day_is_date != rows.front().day_is_date)
          parse_error(source, r.line, "mixed date and ordinal days in '" + label + "'");
      }
      if (rows.front().day_is_date) {
        std::vector<std::int64_t> dates;
        for (const auto& r : rows) dates.push_back(r.day);
        std::sort(dates.begin(), dates.end());
        dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
        for (auto& r : rows) r.day = std::lower_bound(dates.begin(), dates.end(), r.day) - dates.begin();
      }
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].day < rows[i - 1].day) parse_error(source, rows[i].line, "day decreases along seq");
    }

    // per-day session trim on rows with a clock
    std::vector<char> keep(rows.size(), 1);
    if (c_time >= 0 && options.trim_minutes > 0) {
      const std::int32_t margin = options.trim_minutes * 60;
      std::size_t i = 0;
      while (i < rows.size()) {
        std::size_t j = i;
        std::int32_t first = INT32_MAX, last = -1;
        while (j < rows.size() && rows[j].day == rows[i].day) {
          if (rows[j].clock >= 0) {
            first = std::min(first, rows[j].clock);
            last = std::max(last, rows[j].clock);
          }
          ++j;
        }
        for (std::size_t k = i; k < j; ++k) {
          const auto c = rows[k].clock;
          if (c >= 0 && (c < first + margin || c > last - margin)) keep[k] = 0;
        }
        if (!any_day) break;
        i = j;
      }
    }

    DatapointBuilder builder(label);
    builder.reserve(rows.size());
    std::int64_t kept = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (!keep[k]) {
        ++result.trimmed_events;
        continue;
      }
      builder.add(rows[k].seq, rows[k].trader, rows[k].sign,
                  rows[k].has_day ? static_cast<std::int32_t>(rows[k].day) : kNoDay);
      ++kept;
    }
    if (kept <= options.min_transactions) {
      result.dropped.push_back({label, kept,
                                "InsufficientData: " + std::to_string(kept) + " events, need more than " +
                                    std::to_string(options.min_transactions)});
      continue;
    }
    result.datapoints.push_back(std::move(builder).finish());
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LmfError(ErrorCode::IoError, "cannot open " + path.string());
  return ingest(in, options, path.string());
}

void write_events_csv(const MarketDatapoint& dp, std::ostream& out, bool header) {
  if (header) out << "label,seq,trader_id,sign,day\n";
  for (const auto& e : dp.events) {
    out << dp.label << ',' << e.seq << ',' << dp.trader_names[e.trader] << ',' << (e.sign > 0 ? "+1" : "-1") << ',';
    if (e.has_day()) out << e.day;
    out << '\n';
  }
}

void write_events_csv(const std::vector<MarketDatapoint>& dps, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LmfError(ErrorCode::IoError, "cannot write " + path.string());
  bool header = true;
  for (const auto& dp : dps) {
    write_events_csv(dp, out, header);
    header = false;
  }
  if (!out) throw LmfError(ErrorCode::IoError, "write failed for " + path.string());
}

void write_truth_json(const std::vector<MarketDatapoint>& dps, const std::filesystem::path& path) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& dp : dps) {
    if (!dp.truth) continue;
    const auto& t = *dp.truth;
    std::int64_t n_meta = 0;
    for (const auto& m : t.metaorders) n_meta += static_cast<std::int64_t>(m.size());
    j[dp.label] = {{"alpha", t.alpha},
                   {"n_st", t.n_st},
                   {"rt_fraction", t.rt_fraction},
                   {"intensities", t.intensities},
                   {"n_metaorders", n_meta}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LmfError(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(1) << '\n';
}

void attach_truth_json(std::vector<MarketDatapoint>& dps, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LmfError(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    for (auto& dp : dps) {
      if (!j.contains(dp.label)) continue;
      const auto& r = j.at(dp.label);
      SimTruth t;
      t.alpha = r.at("alpha").get<double>();
      t.n_st = r.at("n_st").get<int>();
      t.rt_fraction = r.value("rt_fraction", 0.0);
      t.intensities = r.value("intensities", std::vector<double>{});
      dp.truth = std::move(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw LmfError(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace lmf
