#include "lmf/core_types.hpp"

#include "lmf/errors.hpp"

namespace lmf {

SignSeries::SignSeries(std::vector<std::int8_t> signs) : signs_(std::move(signs)) {
  if (signs_.empty()) throw LmfError(ErrorCode::EmptyDatapoint, "sign series is empty");
  for (auto s : signs_) {
    if (s != 1 && s != -1) throw LmfError(ErrorCode::InvalidConfig, "sign must be +1 or -1");
  }
}

DatapointBuilder::DatapointBuilder(std::string label) { dp_.label = std::move(label); }

TraderId DatapointBuilder::trader(const std::string& name) {
  auto [it, inserted] = index_.try_emplace(name, static_cast<TraderId>(dp_.trader_names.size()));
  if (inserted) dp_.trader_names.push_back(name);
  return it->second;
}

void DatapointBuilder::add(std::int64_t seq, const std::string& trader_name, int sign,
                           std::int32_t day) {
  add(seq, trader(trader_name), sign, day);
}

void DatapointBuilder::add(std::int64_t seq, TraderId id, int sign, std::int32_t day) {
  if (sign != 1 && sign != -1) throw LmfError(ErrorCode::InvalidConfig, "sign must be +1 or -1");
  if (id >= dp_.trader_names.size()) throw LmfError(ErrorCode::InvalidConfig, "unknown trader id");
  dp_.events.push_back(OrderEvent{seq, id, static_cast<std::int8_t>(sign), day});
}

MarketDatapoint DatapointBuilder::finish() && { return std::move(dp_); }

SignSeries series_from_events(std::span<const OrderEvent> events) {
  if (events.empty()) throw LmfError(ErrorCode::EmptyDatapoint, "no events");
  std::vector<std::int8_t> signs;
  signs.reserve(events.size());
  for (const auto& e : events) signs.push_back(e.sign);
  return SignSeries(std::move(signs));
}

void validate_events(std::span<const OrderEvent> events) {
  if (events.empty()) throw LmfError(ErrorCode::EmptyDatapoint, "no events");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.sign != 1 && e.sign != -1)
      throw LmfError(ErrorCode::InvalidConfig, "event " + std::to_string(i) + " has invalid sign");
    if (i == 0) continue;
    const auto& prev = events[i - 1];
    if (e.seq <= prev.seq)
      throw LmfError(ErrorCode::InvalidConfig, "seq not strictly increasing at event " + std::to_string(i));
    if (e.has_day() && prev.has_day() && e.day < prev.day)
      throw LmfError(ErrorCode::InvalidConfig, "day index decreases at event " + std::to_string(i));
  }
}

std::vector<std::vector<OrderEvent>> events_by_trader(const MarketDatapoint& dp) {
  std::vector<std::size_t> counts(dp.trader_names.size(), 0);
  for (const auto& e : dp.events) ++counts[e.trader];
  std::vector<std::vector<OrderEvent>> out(dp.trader_names.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].reserve(counts[i]);
  for (const auto& e : dp.events) out[e.trader].push_back(e);
  return out;
}

}  // namespace lmf
