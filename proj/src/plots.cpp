#include "lmf/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lmf/errors.hpp"
#include "lmf/pipeline.hpp"

namespace lmf {

namespace {

constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

struct Axis {
  double lo, hi;
  double to_px_x(double v) const { return kLeft + (v - lo) / (hi - lo) * (kW - kLeft - kRight); }
  double to_px_y(double v) const { return kH - kBottom - (v - lo) / (hi - lo) * (kH - kTop - kBottom); }
};

Axis padded(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void frame(std::ostringstream& os, const std::string& title, const std::string& xl, const std::string& yl,
           const Axis& x, const Axis& y) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight << "\" height=\""
     << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double vx = x.lo + (x.hi - x.lo) * i / 4.0, vy = y.lo + (y.hi - y.lo) * i / 4.0;
    char lx[32], ly[32];
    std::snprintf(lx, sizeof lx, "%.3g", vx);
    std::snprintf(ly, sizeof ly, "%.3g", vy);
    os << "<text x=\"" << px(x.to_px_x(vx)) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">" << lx
       << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << px(y.to_px_y(vy) + 4) << "\" text-anchor=\"end\">" << ly
       << "</text>\n";
  }
  os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 18 << "\" text-anchor=\"middle\">" << esc(xl) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kH / 2 << ")\">"
     << esc(yl) << "</text>\n";
}

void line(std::ostringstream& os, const Axis& x, const Axis& y, double x0, double y0, double x1, double y1,
          const char* cls, const char* color) {
  os << "<line class=\"" << cls << "\" x1=\"" << px(x.to_px_x(x0)) << "\" y1=\"" << px(y.to_px_y(y0)) << "\" x2=\""
     << px(x.to_px_x(x1)) << "\" y2=\"" << px(y.to_px_y(y1)) << "\" stroke=\"" << color
     << "\" stroke-dasharray=\"6 4\"/>\n";
}

std::vector<const ScatterRow*> usable(const std::vector<ScatterRow>& rows) {
  std::vector<const ScatterRow*> out;
  for (const auto& r : rows)
    if (!r.flagged()) out.push_back(&r);
  if (out.empty()) throw LmfError(ErrorCode::NothingToPlot, "no unflagged rows");
  return out;
}

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LmfError(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::string gamma_alpha_svg(const std::vector<ScatterRow>& rows) {
  const auto ok = usable(rows);
  const auto summary = summarize_rows(rows);
  double x0 = 1.0, x1 = 2.0, y0 = 0.0, y1 = 1.0;
  for (const auto* r : ok) {
    if (std::isfinite(r->alpha)) x0 = std::min(x0, r->alpha), x1 = std::max(x1, r->alpha);
    if (std::isfinite(r->gamma_acf_unbiased))
      y0 = std::min(y0, r->gamma_acf_unbiased), y1 = std::max(y1, r->gamma_acf_unbiased);
  }
  const Axis x = padded(x0, x1), y = padded(y0, y1);
  std::ostringstream os;
  frame(os, "ACF exponent against metaorder tail exponent", "alpha", "gamma (acf, unbiased)", x, y);
  line(os, x, y, x.lo, x.lo - 1.0, x.hi, x.hi - 1.0, "reference", "gray");
  const double half = 0.03 * (kW - kLeft - kRight) / (x.hi - x.lo);
  for (const auto& b : summary.boxes) {
    const double cx = x.to_px_x(b.center);
    os << "<g class=\"box\" data-center=\"" << format_real(b.center) << "\" data-n=\"" << b.n << "\" data-min=\""
       << format_real(b.min) << "\" data-q1=\"" << format_real(b.q1) << "\" data-median=\"" << format_real(b.median)
       << "\" data-q3=\"" << format_real(b.q3) << "\" data-max=\"" << format_real(b.max) << "\">\n";
    os << "  <line x1=\"" << px(cx) << "\" y1=\"" << px(y.to_px_y(b.min)) << "\" x2=\"" << px(cx) << "\" y2=\""
       << px(y.to_px_y(b.max)) << "\" stroke=\"steelblue\"/>\n";
    os << "  <rect x=\"" << px(cx - half) << "\" y=\"" << px(y.to_px_y(b.q3)) << "\" width=\"" << px(2 * half)
       << "\" height=\"" << px(y.to_px_y(b.q1) - y.to_px_y(b.q3)) << "\" fill=\"lightsteelblue\" stroke=\"steelblue\"/>\n";
    os << "  <line x1=\"" << px(cx - half) << "\" y1=\"" << px(y.to_px_y(b.median)) << "\" x2=\"" << px(cx + half)
       << "\" y2=\"" << px(y.to_px_y(b.median)) << "\" stroke=\"navy\" stroke-width=\"2\"/>\n";
    os << "</g>\n";
  }
  for (const auto* r : ok) {
    if (!std::isfinite(r->alpha) || !std::isfinite(r->gamma_acf_unbiased)) continue;
    os << "<circle class=\"point\" data-label=\"" << esc(r->label) << "\" data-x=\"" << format_real(r->alpha)
       << "\" data-y=\"" << format_real(r->gamma_acf_unbiased) << "\" cx=\"" << px(x.to_px_x(r->alpha)) << "\" cy=\""
       << px(y.to_px_y(r->gamma_acf_unbiased)) << "\" r=\"3\" fill=\"crimson\" fill-opacity=\"0.7\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string n_st_svg(const std::vector<ScatterRow>& rows) {
  const auto ok = usable(rows);
  struct P {
    const ScatterRow* r;
    double x, y;
  };
  std::vector<P> pts;
  bool truth = false;
  for (const auto* r : ok) {
    if (std::isfinite(r->n_st_true) && r->n_st_true > 0) truth = true;
  }
  for (const auto* r : ok) {
    const double g = r->gamma_acf_unbiased;
    const double n = truth ? r->n_st_true : static_cast<double>(r->n_st_detected);
    if (!std::isfinite(g) || !(n > 0) || !(r->n_st_lmf > 0)) continue;
    pts.push_back({r, (1.0 - g) * std::log10(n), r->log10_n_lmf_pow()});
  }
  double lo = 0.0, hi = 1.0;
  for (const auto& p : pts) lo = std::min({lo, p.x, p.y}), hi = std::max({hi, p.x, p.y});
  const Axis x = padded(lo, hi), y = x;
  std::ostringstream os;
  frame(os, "Estimated against actual splitting-trader count",
        truth ? "log10 N_ST^(1-gamma)" : "log10 N_ST,detected^(1-gamma)", "log10 N_LMF^(1-gamma)", x, y);
  line(os, x, y, x.lo, x.lo, x.hi, x.hi, "diagonal", "gray");
  for (const auto& p : pts) {
    os << "<circle class=\"point\" data-label=\"" << esc(p.r->label) << "\" data-x=\"" << format_real(p.x)
       << "\" data-y=\"" << format_real(p.y) << "\" cx=\"" << px(x.to_px_x(p.x)) << "\" cy=\"" << px(y.to_px_y(p.y))
       << "\" r=\"3\" fill=\"darkgreen\" fill-opacity=\"0.7\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string ccdf_svg(const std::vector<CcdfSample>& samples, std::size_t max_curves) {
  std::vector<const CcdfSample*> use;
  for (const auto& s : samples)
    if (!s.points.empty() && use.size() < max_curves) use.push_back(&s);
  if (use.empty()) throw LmfError(ErrorCode::NothingToPlot, "no CCDF samples");
  double xmax = 1.0, ymin = 0.0;
  for (const auto* s : use)
    for (const auto& p : s->points) {
      xmax = std::max(xmax, std::log10(static_cast<double>(p.length)));
      if (p.ccdf > 0) ymin = std::min(ymin, std::log10(p.ccdf));
    }
  const Axis x = padded(0.0, xmax), y = padded(ymin, 0.0);
  std::ostringstream os;
  frame(os, "Metaorder length CCDF", "log10 L", "log10 P(>=L)", x, y);
  static const char* colors[] = {"crimson", "steelblue", "darkgreen", "darkorange", "purple", "teal"};
  std::size_t k = 0;
  for (const auto* s : use) {
    os << "<polyline class=\"ccdf\" data-label=\"" << esc(s->label) << "\" fill=\"none\" stroke=\""
       << colors[k++ % 6] << "\" points=\"";
    for (const auto& p : s->points) {
      if (!(p.ccdf > 0)) continue;
      os << px(x.to_px_x(std::log10(static_cast<double>(p.length)))) << ',' << px(y.to_px_y(std::log10(p.ccdf)))
         << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plots(const std::vector<ScatterRow>& rows, const std::vector<CcdfSample>& ccdf,
                const std::filesystem::path& dir, double) {
  const auto g = gamma_alpha_svg(rows);
  const auto n = n_st_svg(rows);
  write(dir / "gamma_alpha.svg", g);
  write(dir / "n_st.svg", n);
  if (!ccdf.empty()) write(dir / "ccdf.svg", ccdf_svg(ccdf));
}

}  // namespace lmf
