#pragma once

#include <cstdlib>
#include <filesystem>

#include "lmf/bias_table.hpp"

/// Default-configuration table, cached under $LMF_BIAS_CACHE (or ./bias_cache).
inline const lmf::BiasTable& shared_bias_table() {
  static const lmf::BiasTable table = [] {
    const char* dir = std::getenv("LMF_BIAS_CACHE");
    return lmf::load_or_build_bias_table(lmf::BiasTableConfig{}, dir ? dir : "bias_cache");
  }();
  return table;
}
