#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lifshift/errors.hpp"

namespace lifshift::svg {

struct series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct errorbar_point {
  double x = 0.0;
  double y = 0.0;
  double dx = 0.0; // half-width of the horizontal arm, 0 for none
  double dy = 0.0; // half-height of the vertical arm
};

struct errorbar_series {
  std::string label;
  std::vector<errorbar_point> points;
};

struct figure {
  std::string x_label;
  std::string y_label;
  std::vector<series> curves;
  std::vector<errorbar_series> markers;
};

namespace detail {

inline std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string fmt_tick(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// tick positions on a 1-2-5 ladder covering [lo, hi]
inline std::vector<double> ticks(double lo, double hi)
{
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> out;
  const double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + 0.5 * step; t += step) {
    const double v = std::fabs(t) < 1e-12 * step ? 0.0 : t;
    if (v >= lo - 1e-12 * step && v <= hi + 1e-12 * step) out.push_back(v);
  }
  return out;
}

inline const char* palette(std::size_t i)
{
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % (sizeof colors / sizeof colors[0])];
}

} // namespace detail

// Minimal deterministic line plot: axes box, 1-2-5 ticks, one polyline per
// curve, error-bar crosses for measured points, text legend. Intended as a
// quick visual artifact; the CSV files carry the numbers.
inline std::string render(const figure& fig)
{
  const double width = 800.0, height = 560.0;
  const double ml = 80.0, mr = 24.0, mt = 24.0, mb = 56.0;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool any = false;
  auto grow = [&](double x, double y) {
    if (!any) {
      x_lo = x_hi = x;
      y_lo = y_hi = y;
      any = true;
      return;
    }
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  };
  for (const auto& s : fig.curves)
    for (std::size_t i = 0; i < s.x.size(); ++i) grow(s.x[i], s.y[i]);
  for (const auto& m : fig.markers)
    for (const auto& p : m.points) {
      grow(p.x - p.dx, p.y - p.dy);
      grow(p.x + p.dx, p.y + p.dy);
    }
  if (!any) raise(errc::invalid_argument, "svg: nothing to draw");
  const double x_pad = (x_hi - x_lo) > 0.0 ? 0.04 * (x_hi - x_lo) : std::fabs(x_lo) * 0.1 + 1.0;
  const double y_pad = (y_hi - y_lo) > 0.0 ? 0.06 * (y_hi - y_lo) : std::fabs(y_lo) * 0.1 + 1.0;
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"560\" "
       "viewBox=\"0 0 800 560\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"560\" fill=\"white\"/>\n";

  // ticks and grid first, so curves draw on top
  for (double t : detail::ticks(x_lo, x_hi)) {
    const double x = px(t);
    s += "<line x1=\"" + detail::fmt(x) + "\" y1=\"" + detail::fmt(mt) + "\" x2=\""
         + detail::fmt(x) + "\" y2=\"" + detail::fmt(mt + ph)
         + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + detail::fmt(x) + "\" y=\"" + detail::fmt(mt + ph + 18.0)
         + "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
         + detail::fmt_tick(t) + "</text>\n";
  }
  for (double t : detail::ticks(y_lo, y_hi)) {
    const double y = py(t);
    s += "<line x1=\"" + detail::fmt(ml) + "\" y1=\"" + detail::fmt(y) + "\" x2=\""
         + detail::fmt(ml + pw) + "\" y2=\"" + detail::fmt(y)
         + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + detail::fmt(ml - 6.0) + "\" y=\"" + detail::fmt(y + 4.0)
         + "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
         + detail::fmt_tick(t) + "</text>\n";
  }

  std::size_t color_index = 0;
  for (const auto& c : fig.curves) {
    std::string pts;
    for (std::size_t i = 0; i < c.x.size(); ++i)
      pts += detail::fmt(px(c.x[i])) + "," + detail::fmt(py(c.y[i])) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + std::string(detail::palette(color_index))
         + "\" stroke-width=\"1.8\"";
    if (c.dashed) s += " stroke-dasharray=\"6 4\"";
    s += " points=\"" + pts + "\"/>\n";
    ++color_index;
  }

  for (const auto& m : fig.markers) {
    for (const auto& p : m.points) {
      const double x = px(p.x), y = py(p.y);
      const double hx = p.dx > 0.0 ? px(p.x + p.dx) - x : 4.0;
      const double hy = p.dy > 0.0 ? y - py(p.y + p.dy) : 4.0;
      s += "<line x1=\"" + detail::fmt(x - hx) + "\" y1=\"" + detail::fmt(y) + "\" x2=\""
           + detail::fmt(x + hx) + "\" y2=\"" + detail::fmt(y)
           + "\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n";
      s += "<line x1=\"" + detail::fmt(x) + "\" y1=\"" + detail::fmt(y - hy) + "\" x2=\""
           + detail::fmt(x) + "\" y2=\"" + detail::fmt(y + hy)
           + "\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n";
    }
  }

  s += "<rect x=\"" + detail::fmt(ml) + "\" y=\"" + detail::fmt(mt) + "\" width=\""
       + detail::fmt(pw) + "\" height=\"" + detail::fmt(ph)
       + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<text x=\"" + detail::fmt(ml + pw / 2.0) + "\" y=\"" + detail::fmt(height - 12.0)
       + "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" + fig.x_label
       + "</text>\n";
  s += "<text x=\"18\" y=\"" + detail::fmt(mt + ph / 2.0)
       + "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
       + detail::fmt(mt + ph / 2.0) + ")\">" + fig.y_label + "</text>\n";

  double legend_y = mt + 18.0;
  color_index = 0;
  for (const auto& c : fig.curves) {
    const double lx = ml + pw - 190.0;
    s += "<line x1=\"" + detail::fmt(lx) + "\" y1=\"" + detail::fmt(legend_y - 4.0) + "\" x2=\""
         + detail::fmt(lx + 28.0) + "\" y2=\"" + detail::fmt(legend_y - 4.0) + "\" stroke=\""
         + detail::palette(color_index) + "\" stroke-width=\"1.8\"";
    if (c.dashed) s += " stroke-dasharray=\"6 4\"";
    s += "/>\n";
    s += "<text x=\"" + detail::fmt(lx + 34.0) + "\" y=\"" + detail::fmt(legend_y)
         + "\" font-family=\"sans-serif\" font-size=\"12\">" + c.label + "</text>\n";
    legend_y += 16.0;
    ++color_index;
  }
  for (const auto& m : fig.markers) {
    if (m.label.empty()) continue;
    const double lx = ml + pw - 190.0;
    s += "<text x=\"" + detail::fmt(lx + 34.0) + "\" y=\"" + detail::fmt(legend_y)
         + "\" font-family=\"sans-serif\" font-size=\"12\">" + m.label + "</text>\n";
    s += "<line x1=\"" + detail::fmt(lx + 10.0) + "\" y1=\"" + detail::fmt(legend_y - 4.0)
         + "\" x2=\"" + detail::fmt(lx + 18.0) + "\" y2=\"" + detail::fmt(legend_y - 4.0)
         + "\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n";
    s += "<line x1=\"" + detail::fmt(lx + 14.0) + "\" y1=\"" + detail::fmt(legend_y - 8.0)
         + "\" x2=\"" + detail::fmt(lx + 14.0) + "\" y2=\"" + detail::fmt(legend_y)
         + "\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n";
    legend_y += 16.0;
  }

  s += "</svg>\n";
  return s;
}

} // namespace lifshift::svg
