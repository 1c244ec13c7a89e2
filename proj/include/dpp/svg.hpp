#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "dpp/diagnostics.hpp"
#include "dpp/errors.hpp"

namespace dpp {

/// Self-contained SVG plot of the norm evolution against its linear bound:
/// exactly two polylines (the recorded norm and the bound c + t f_max) in an
/// 800x500 viewport with axes and tick labels. Pure text, no external assets.
inline std::string write_svg_plot(const NormSeries& series,
                                  const BoundReport& report) {
  if (series.empty()) throw Error("cannot plot an empty norm series");

  const double x0 = 70, x1 = 770, y0 = 450, y1 = 50;  // plot rectangle
  const double t_max = std::max(series.back().time, 1e-12);
  double v_max = 0.0;
  for (const auto& r : series) v_max = std::max(v_max, r.norm_v);
  v_max = std::max(v_max, report.intercept + t_max * report.f_max);
  if (v_max <= 0.0) v_max = 1.0;
  v_max *= 1.05;

  auto px = [&](double t) { return x0 + (x1 - x0) * t / t_max; };
  auto py = [&](double v) { return y0 + (y1 - y0) * v / v_max; };

  std::string out;
  char buf[256];
  auto emit = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };

  out +=
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
      "viewBox=\"0 0 800 500\">\n"
      "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";

  // Axes and ticks.
  emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
       x0, y0, x1, y0);
  emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
       x0, y0, x0, y1);
  const int nticks = 5;
  for (int k = 0; k <= nticks; ++k) {
    const double t = t_max * k / nticks;
    const double v = v_max * k / nticks;
    emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
         px(t), y0, px(t), y0 + 6);
    emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\">%.3g</text>\n",
         px(t), y0 + 22, t);
    emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
         x0 - 6, py(v), x0, py(v));
    emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"end\">%.3g</text>\n",
         x0 - 10, py(v) + 4, v);
  }
  emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" text-anchor=\"middle\">time</text>\n",
       (x0 + x1) / 2, y0 + 42);
  emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" text-anchor=\"middle\" "
       "transform=\"rotate(-90 %.2f %.2f)\">velocity norm</text>\n",
       x0 - 48, (y0 + y1) / 2, x0 - 48, (y0 + y1) / 2);

  // The two data polylines: recorded norm, then the linear bound.
  out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& r : series) emit("%.2f,%.2f ", px(r.time), py(r.norm_v));
  out += "\"/>\n";
  out += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" "
         "stroke-dasharray=\"8 5\" points=\"";
  for (const auto& r : series) {
    emit("%.2f,%.2f ", px(r.time), py(report.intercept + r.time * report.f_max));
  }
  out += "\"/>\n";

  emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" fill=\"#1f77b4\">norm</text>\n",
       x0 + 14, y1 + 16);
  emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" fill=\"#d62728\">bound %s + t * %s</text>\n",
       x0 + 70, y1 + 16, "c", "f_max");
  out += "</svg>\n";
  return out;
}

}  // namespace dpp
