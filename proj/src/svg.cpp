#include "homdip/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "homdip/errors.hpp"
#include "homdip/io_util.hpp"

namespace homdip {

namespace {

constexpr int kWidth = 860;
constexpr int kHeight = 520;
constexpr int kMarginL = 72;
constexpr int kMarginR = 76;
constexpr int kMarginT = 44;
constexpr int kMarginB = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
      return;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::string& path, const SvgPlotSpec& spec) {
  if (spec.series.empty()) {
    throw ConfigError("write_svg_plot: no series");
  }

  Range xr, yl, yr;
  if (spec.clip_x) {
    xr.add(spec.x_min);
    xr.add(spec.x_max);
  }
  bool any_right = false;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) {
      throw ConfigError("write_svg_plot: series '" + s.label + "' is ragged");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.clip_x && (s.x[i] < spec.x_min || s.x[i] > spec.x_max)) continue;
      if (!spec.clip_x) xr.add(s.x[i]);
      (s.right_axis ? yr : yl).add(s.y[i]);
    }
    any_right |= s.right_axis;
  }
  if (!spec.clip_x) xr.pad();
  yl.pad();
  if (any_right) yr.pad();

  const double pw = kWidth - kMarginL - kMarginR;
  const double ph = kHeight - kMarginT - kMarginB;
  const auto px = [&](double v) { return kMarginL + xr.frac(v) * pw; };
  const auto py_left = [&](double v) { return kMarginT + (1.0 - yl.frac(v)) * ph; };
  const auto py_right = [&](double v) { return kMarginT + (1.0 - yr.frac(v)) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << spec.title << "</text>\n";

  // frame
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";

  const int n_ticks = 5;
  for (int t = 0; t <= n_ticks; ++t) {
    const double f = static_cast<double>(t) / n_ticks;
    const double xv = xr.lo + f * (xr.hi - xr.lo);
    const double xp = px(xv);
    out << "<line x1=\"" << xp << "\" y1=\"" << kMarginT + ph << "\" x2=\"" << xp
        << "\" y2=\"" << kMarginT + ph + 5 << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << xp << "\" y=\"" << kMarginT + ph + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(xv) << "</text>\n";
    const double yv = yl.lo + f * (yl.hi - yl.lo);
    const double yp = py_left(yv);
    out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << yp << "\" x2=\"" << kMarginL
        << "\" y2=\"" << yp << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << yp + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(yv) << "</text>\n";
    if (any_right) {
      const double yrv = yr.lo + f * (yr.hi - yr.lo);
      const double yrp = py_right(yrv);
      out << "<line x1=\"" << kMarginL + pw << "\" y1=\"" << yrp << "\" x2=\""
          << kMarginL + pw + 5 << "\" y2=\"" << yrp << "\" stroke=\"#333\"/>\n";
      out << "<text x=\"" << kMarginL + pw + 8 << "\" y=\"" << yrp + 4
          << "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"11\">"
          << tick_label(yrv) << "</text>\n";
    }
  }

  out << "<text x=\"" << kMarginL + pw / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << spec.x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << kMarginT + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << kMarginT + ph / 2 << ")\">" << spec.y_label
      << "</text>\n";
  if (any_right && !spec.y_right_label.empty()) {
    out << "<text x=\"" << kWidth - 16 << "\" y=\"" << kMarginT + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(90 " << kWidth - 16 << ' ' << kMarginT + ph / 2 << ")\">"
        << spec.y_right_label << "</text>\n";
  }

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& series = spec.series[s];
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (series.right_axis ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      if (spec.clip_x && (series.x[i] < spec.x_min || series.x[i] > spec.x_max)) continue;
      if (!first) out << ' ';
      first = false;
      const double yp = series.right_axis ? py_right(series.y[i]) : py_left(series.y[i]);
      out << format_g9(px(series.x[i])) << ',' << format_g9(yp);
    }
    out << "\"/>\n";
    const double ly = kMarginT + 16 + 16 * static_cast<double>(s);
    out << "<line x1=\"" << kMarginL + pw - 150 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << kMarginL + pw - 130 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kMarginL + pw - 124 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series.label
        << "</text>\n";
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

}  // namespace homdip
