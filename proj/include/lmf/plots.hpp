#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lmf/inference.hpp"

namespace lmf {

struct ScatterRow;
struct CcdfSample;

/// Scattered boxplot of gamma_acf_unbiased against alpha with the line gamma = alpha - 1.
/// Points carry data-label/data-x/data-y, boxes data-center/data-q1/data-median/data-q3.
/// Throws LmfError(NothingToPlot) when no row is unflagged.
std::string gamma_alpha_svg(const std::vector<ScatterRow>& rows);

/// log10 N^{1-gamma}: estimate against truth (or detected ST count) with the diagonal.
std::string n_st_svg(const std::vector<ScatterRow>& rows);

/// Log-log CCDF curves, one polyline per datapoint (at most max_curves).
std::string ccdf_svg(const std::vector<CcdfSample>& samples, std::size_t max_curves = 12);

/// Writes gamma_alpha.svg, n_st.svg and (when samples exist) ccdf.svg.
void emit_plots(const std::vector<ScatterRow>& rows, const std::vector<CcdfSample>& ccdf,
                const std::filesystem::path& dir, double lower_bound_slack = kDefaultLowerBoundSlack);

}  // namespace lmf
