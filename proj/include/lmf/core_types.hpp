#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lmf {

/// Index into MarketDatapoint::trader_names. Trader identities are opaque
/// tokens; the index is only meaningful within one datapoint.
using TraderId = std::uint32_t;

inline constexpr std::int32_t kNoDay = -1;

struct OrderEvent {
  std::int64_t seq = 0;
  TraderId trader = 0;
  std::int8_t sign = 1;         // +1 buy, -1 sell
  std::int32_t day = kNoDay;    // business-day ordinal, kNoDay when absent

  bool has_day() const { return day != kNoDay; }
  friend bool operator==(const OrderEvent&, const OrderEvent&) = default;
};

/// Ordered +-1 market-order signs.
class SignSeries {
 public:
  SignSeries() = default;
  explicit SignSeries(std::vector<std::int8_t> signs);

  std::size_t size() const { return signs_.size(); }
  std::span<const std::int8_t> signs() const { return signs_; }
  std::int8_t operator[](std::size_t i) const { return signs_[i]; }

 private:
  std::vector<std::int8_t> signs_;
};

struct Metaorder {
  std::int64_t length = 0;
  std::int8_t sign = 1;
  friend bool operator==(const Metaorder&, const Metaorder&) = default;
};

/// Ground truth recorded by the simulator.
struct SimTruth {
  double alpha = 0.0;
  int n_st = 0;
  std::vector<double> intensities;
  double rt_fraction = 0.0;
  // Per splitting trader, the metaorders that emitted at least one child
  // order inside the recorded window (lengths count emitted children only).
  std::vector<std::vector<Metaorder>> metaorders;
};

struct MarketDatapoint {
  std::string label;
  std::vector<std::string> trader_names;
  std::vector<OrderEvent> events;
  std::optional<SimTruth> truth;

  std::size_t n_traders() const { return trader_names.size(); }
};

enum class TraderClass { ST, RT };

struct TraderLabel {
  TraderId trader = 0;
  TraderClass cls = TraderClass::RT;
  double p_value = 1.0;
  std::int64_t n_orders = 0;
  std::int64_t continuations = 0;  // K
  std::int64_t pairs = 0;          // adjacent pairs eligible for the test
};

/// Interns trader names while events are appended in order.
class DatapointBuilder {
 public:
  explicit DatapointBuilder(std::string label);

  TraderId trader(const std::string& name);
  void add(std::int64_t seq, const std::string& trader_name, int sign, std::int32_t day = kNoDay);
  void add(std::int64_t seq, TraderId trader, int sign, std::int32_t day = kNoDay);
  void reserve(std::size_t n) { dp_.events.reserve(n); }

  MarketDatapoint finish() &&;

 private:
  MarketDatapoint dp_;
  std::unordered_map<std::string, TraderId> index_;
};

SignSeries series_from_events(std::span<const OrderEvent> events);

/// Checks the OrderEvent invariants (signs, strictly increasing seq,
/// non-decreasing day). Throws LmfError(EmptyDatapoint/InvalidConfig).
void validate_events(std::span<const OrderEvent> events);

/// Events grouped per trader, preserving order. Result is indexed by TraderId.
std::vector<std::vector<OrderEvent>> events_by_trader(const MarketDatapoint& dp);

}  // namespace lmf
