#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lmf/core_types.hpp"

namespace lmf {

/// CSV layout: a header naming the columns, in any order.
///   required: seq, trader_id, sign
///   optional: label (defaults to the file stem), day, time
/// sign is one of +1, -1, 1, B, S (B/S case-insensitive). day is an integer
/// ordinal or an ISO date (YYYY-MM-DD); dates become the rank of distinct
/// dates within the datapoint. time is HH:MM:SS.
struct IngestOptions {
  std::int64_t min_transactions = 500'000;  // kept only when strictly more events remain
  int trim_minutes = 10;                    // applied per day when a time column exists
  std::string default_label;                // overrides the file stem when non-empty
};

struct DroppedDatapoint {
  std::string label;
  std::int64_t n_events = 0;
  std::string reason;
};

struct IngestResult {
  std::vector<MarketDatapoint> datapoints;  // sorted by label
  std::vector<DroppedDatapoint> dropped;
  std::int64_t trimmed_events = 0;
};

/// Throws LmfError(ParseError) with the 1-based line number, LmfError(IoError).
IngestResult ingest(std::istream& in, const IngestOptions& options, const std::string& source = "input");
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options = {});

/// Parses "+1", "-1", "1", "B", "S". Returns nullopt for anything else.
std::optional<int> parse_sign_token(std::string_view token);

/// Days since 1970-01-01 for a valid YYYY-MM-DD, nullopt otherwise.
std::optional<std::int64_t> parse_iso_date(std::string_view token);

/// Seconds since midnight for HH:MM:SS, nullopt otherwise.
std::optional<std::int32_t> parse_clock(std::string_view token);

/// label,seq,trader_id,sign,day (day column left empty when absent).
void write_events_csv(const MarketDatapoint& dp, std::ostream& out, bool header = true);
void write_events_csv(const std::vector<MarketDatapoint>& dps, const std::filesystem::path& path);

/// JSON object keyed by label with the simulator ground truth.
void write_truth_json(const std::vector<MarketDatapoint>& dps, const std::filesystem::path& path);
/// Attaches truth records from such a file to datapoints with matching labels.
void attach_truth_json(std::vector<MarketDatapoint>& dps, const std::filesystem::path& path);

}  // namespace lmf
