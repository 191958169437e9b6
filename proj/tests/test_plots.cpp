#include <filesystem>
#include <regex>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lmf/pipeline.hpp"
#include "lmf/plots.hpp"
#include "lmf/rng.hpp"
#include "support.hpp"

using namespace lmf;

namespace {

ScatterRow make_row(const std::string& label, double alpha, double gamma) {
  ScatterRow r;
  r.label = label;
  r.n_eps = 1'000'000;
  r.alpha = alpha;
  r.gamma_acf_nlls = r.gamma_acf_unbiased = gamma;
  r.gamma_psd_nlls = r.gamma_psd_unbiased = NAN;
  r.c0 = 0.06;
  r.n_st_lmf = 90;
  r.st_fraction = r.st_order_share = 0.4;
  r.n_st_detected = 95;
  r.alpha_true = NAN;
  r.n_st_true = 100;
  return r;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("nothing to plot") {
  CHECK_LMF_CODE(gamma_alpha_svg({}), ErrorCode::NothingToPlot);
  auto r = make_row("x", 1.5, 0.5);
  r.flags.push_back("FitDiverged");
  CHECK_LMF_CODE(gamma_alpha_svg({r}), ErrorCode::NothingToPlot);
  CHECK_LMF_CODE(n_st_svg({r}), ErrorCode::NothingToPlot);
  CHECK_LMF_CODE(ccdf_svg({}), ErrorCode::NothingToPlot);
  CHECK_LMF_CODE(emit_plots({}, {}, std::filesystem::temp_directory_path()), ErrorCode::NothingToPlot);
}

TEST_CASE("single row gives one point and the reference line") {
  const auto svg = gamma_alpha_svg({make_row("only", 1.5, 0.48)});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "class=\"point\"") == 1);
  CHECK(count(svg, "class=\"reference\"") == 1);
  CHECK(svg.find("data-label=\"only\" data-x=\"1.5\" data-y=\"0.48\"") != std::string::npos);
  const auto n = n_st_svg({make_row("only", 1.5, 0.48)});
  CHECK(count(n, "class=\"point\"") == 1);
  CHECK(count(n, "class=\"diagonal\"") == 1);
}

TEST_CASE("labels are escaped") {
  const auto svg = gamma_alpha_svg({make_row("a<b&c", 1.5, 0.5)});
  CHECK(svg.find("a&lt;b&amp;c") != std::string::npos);
  CHECK(svg.find("a<b&c") == std::string::npos);
}

TEST_CASE("box attributes equal the summary numbers") {
  Rng rng(81);
  std::vector<ScatterRow> rows;
  for (int i = 0; i < 40; ++i) {
    const double alpha = 1.2 + 0.1 * (i % 7) + 0.02 * (uniform01(rng) - 0.5);
    rows.push_back(make_row("r" + std::to_string(i), alpha, alpha - 1.0 + 0.1 * (uniform01(rng) - 0.5)));
  }
  rows[3].flags.push_back("OutOfCalibration");
  const auto svg = gamma_alpha_svg(rows);
  const auto summary = nlohmann::json::parse(summary_json(summarize_rows(rows)));
  const auto& boxes = summary.at("gamma_acf_boxes");

  std::regex box_re(
      "data-center=\"([^\"]*)\" data-n=\"([^\"]*)\" data-min=\"([^\"]*)\" data-q1=\"([^\"]*)\" "
      "data-median=\"([^\"]*)\" data-q3=\"([^\"]*)\" data-max=\"([^\"]*)\"");
  std::size_t i = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), box_re); it != std::sregex_iterator(); ++it, ++i) {
    REQUIRE(i < boxes.size());
    const auto& m = *it;
    const auto& b = boxes[i];
    CHECK(m[1].str() == format_real(b.at("alpha_center").get<double>()));
    CHECK(std::stoul(m[2].str()) == b.at("n").get<std::size_t>());
    CHECK(m[3].str() == format_real(b.at("min").get<double>()));
    CHECK(m[4].str() == format_real(b.at("q1").get<double>()));
    CHECK(m[5].str() == format_real(b.at("median").get<double>()));
    CHECK(m[6].str() == format_real(b.at("q3").get<double>()));
    CHECK(m[7].str() == format_real(b.at("max").get<double>()));
  }
  CHECK(i == boxes.size());
  CHECK(i == 7);
  CHECK(count(svg, "class=\"point\"") == 39);
}

TEST_CASE("point coordinates equal the CSV values") {
  std::vector<ScatterRow> rows{make_row("p", 1.37, 0.41), make_row("q", 1.71, 0.66)};
  const auto back = parse_scatter_csv(scatter_csv(rows));
  const auto svg = gamma_alpha_svg(back);
  for (const auto& r : back) {
    const std::string attr = "data-label=\"" + r.label + "\" data-x=\"" + format_real(r.alpha) + "\" data-y=\"" +
                             format_real(r.gamma_acf_unbiased) + "\"";
    CHECK(svg.find(attr) != std::string::npos);
  }
}

TEST_CASE("emit_plots writes the three figures") {
  const auto dir = std::filesystem::temp_directory_path() / "lmf_plots";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  CcdfSample s{"p", {{1, 1.0}, {2, 0.4}, {5, 0.1}, {20, 0.01}}};
  emit_plots({make_row("p", 1.5, 0.5)}, {s}, dir);
  CHECK(std::filesystem::exists(dir / "gamma_alpha.svg"));
  CHECK(std::filesystem::exists(dir / "n_st.svg"));
  CHECK(std::filesystem::exists(dir / "ccdf.svg"));
  const auto ccdf = ccdf_svg({s});
  CHECK(count(ccdf, "class=\"ccdf\"") == 1);
  std::filesystem::remove_all(dir);
}
