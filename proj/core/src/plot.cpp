#include "dss/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dss {

namespace {

constexpr double kWidth = 900, kHeight = 520;
constexpr double kLeft = 70, kRight = 150, kTop = 50, kBottom = 55;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("plot series size mismatch: " + s.label);
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
         "font-size=\"18\" font-family=\"sans-serif\">" << title << "</text>\n";

  // axes
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\""
      << kLeft + pw << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n";

  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / ticks;
    const double fy = ymin + (ymax - ymin) * i / ticks;
    out << "<text x=\"" << sx(fx) << "\" y=\"" << kTop + ph + 20
        << "\" text-anchor=\"middle\" font-size=\"11\" "
           "font-family=\"sans-serif\">" << num(fx) << "</text>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
        << num(fy) << "</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << sy(fy) << "\" x2=\""
        << kLeft + pw << "\" y2=\"" << sy(fy)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">"
      << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << y_label
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.3\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << num(sx(s.x[i])) << "," << num(sy(s.y[i])) << " ";
    out << "\"/>\n";
    const double ly = kTop + 14 + double(si) * 18;
    out << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + pw + 36 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + pw + 42 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dss
