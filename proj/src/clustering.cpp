#include "lmf/clustering.hpp"

#include <numeric>

#include "lmf/errors.hpp"
#include "lmf/special.hpp"

namespace lmf {

void validate(const ClusteringConfig& c) {
  if (!(c.theta > 0.0 && c.theta < 1.0)) throw LmfError(ErrorCode::InvalidConfig, "theta must lie in (0,1)");
  if (c.min_orders < 0) throw LmfError(ErrorCode::InvalidConfig, "min_orders must be >= 0");
}

std::int64_t MetaorderRecord::n_orders() const {
  return std::accumulate(lengths.begin(), lengths.end(), std::int64_t{0});
}

MetaorderRecord segment_metaorders(std::span<const OrderEvent> events) {
  MetaorderRecord rec;
  if (events.empty()) return rec;
  rec.trader = events.front().trader;
  rec.lengths.push_back(1);
  rec.signs.push_back(events.front().sign);
  for (std::size_t i = 1; i < events.size(); ++i) {
    const auto& prev = events[i - 1];
    const auto& cur = events[i];
    const bool gap = prev.has_day() && cur.has_day() && (cur.day - prev.day) > 1;
    if (gap) ++rec.gap_breaks;
    if (gap || cur.sign != prev.sign) {
      rec.lengths.push_back(1);
      rec.signs.push_back(cur.sign);
    } else {
      ++rec.lengths.back();
    }
  }
  return rec;
}

TraderLabel binomial_test_trader(const MetaorderRecord& record, const ClusteringConfig& config) {
  validate(config);
  const std::int64_t n = record.n_orders();
  if (n == 0) throw LmfError(ErrorCode::EmptyTrader, "trader has no orders");
  TraderLabel label;
  label.trader = record.trader;
  label.n_orders = n;
  label.continuations = n - static_cast<std::int64_t>(record.lengths.size());
  label.pairs = (n - 1) - record.gap_breaks;
  label.p_value = binomial_upper_tail_half(label.pairs, label.continuations);
  label.cls = (n >= config.min_orders && label.p_value < config.theta) ? TraderClass::ST : TraderClass::RT;
  return label;
}

std::vector<TraderAnalysis> cluster_traders(const MarketDatapoint& dp, const ClusteringConfig& config) {
  validate(config);
  auto grouped = events_by_trader(dp);
  std::vector<TraderAnalysis> out;
  out.reserve(grouped.size());
  for (std::size_t id = 0; id < grouped.size(); ++id) {
    TraderAnalysis ta;
    ta.record = segment_metaorders(grouped[id]);
    ta.record.trader = static_cast<TraderId>(id);
    if (grouped[id].empty()) {
      ta.label.trader = static_cast<TraderId>(id);
    } else {
      ta.label = binomial_test_trader(ta.record, config);
    }
    out.push_back(std::move(ta));
  }
  return out;
}

ClusteringSummary market_clustering_summary(const MarketDatapoint& dp, std::span<const TraderLabel> labels) {
  ClusteringSummary s;
  std::int64_t st_events = 0;
  for (const auto& l : labels) {
    if (l.n_orders == 0) continue;
    ++s.n_traders;
    if (l.cls == TraderClass::ST) {
      ++s.n_st;
      st_events += l.n_orders;
    }
  }
  if (s.n_traders > 0) s.st_fraction = static_cast<double>(s.n_st) / static_cast<double>(s.n_traders);
  if (!dp.events.empty())
    s.st_order_share = static_cast<double>(st_events) / static_cast<double>(dp.events.size());
  return s;
}

std::vector<std::int64_t> pooled_st_lengths(std::span<const TraderAnalysis> traders) {
  std::vector<std::int64_t> out;
  for (const auto& t : traders) {
    if (t.label.cls != TraderClass::ST) continue;
    out.insert(out.end(), t.record.lengths.begin(), t.record.lengths.end());
  }
  return out;
}

}  // namespace lmf
