#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lmf/core_types.hpp"

namespace lmf {

struct ClusteringConfig {
  double theta = 0.01;
  // With a one-sided test at theta = 0.01, fewer than 8 orders can never
  // reach significance: 2^{-(n-1)} >= 2^{-6} > 0.01.
  std::int64_t min_orders = 8;
};

void validate(const ClusteringConfig& config);

/// One trader's sign stream split into metaorders.
struct MetaorderRecord {
  TraderId trader = 0;
  std::vector<std::int64_t> lengths;
  std::vector<std::int8_t> signs;
  std::int64_t gap_breaks = 0;  // adjacent pairs separated by more than one business day

  std::int64_t n_orders() const;
};

/// Maximal equal-sign runs, additionally split where consecutive events are
/// more than one business day apart.
MetaorderRecord segment_metaorders(std::span<const OrderEvent> trader_events);

/// One-sided binomial persistence test. K counts same-sign continuations
/// among adjacent pairs not separated by a day gap; under the symmetric
/// Bernoulli null K ~ Bin(pairs, 1/2) and p = P(Bin >= K).
TraderLabel binomial_test_trader(const MetaorderRecord& record, const ClusteringConfig& config);

struct TraderAnalysis {
  MetaorderRecord record;
  TraderLabel label;
};

/// Segments and labels every trader of a datapoint (indexed by TraderId).
std::vector<TraderAnalysis> cluster_traders(const MarketDatapoint& dp, const ClusteringConfig& config);

struct ClusteringSummary {
  double st_fraction = 0.0;
  double st_order_share = 0.0;
  std::int64_t n_traders = 0;
  std::int64_t n_st = 0;
};

ClusteringSummary market_clustering_summary(const MarketDatapoint& dp, std::span<const TraderLabel> labels);

/// Metaorder lengths of all ST-labelled traders, one entry per metaorder.
std::vector<std::int64_t> pooled_st_lengths(std::span<const TraderAnalysis> traders);

}  // namespace lmf
