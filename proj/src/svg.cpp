#include "qburst/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qburst::svg {

namespace {

constexpr int kW = 640, kH = 440;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Canvas {
  std::ofstream out;

  explicit Canvas(const std::string& path) : out(path) {
    if (!out) throw std::runtime_error("cannot write svg " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
        << "' viewBox='0 0 " << kW << " " << kH << "'>\n";
    out << "<rect width='" << kW << "' height='" << kH << "' fill='white'/>\n";
  }
  ~Canvas() { out << "</svg>\n"; }

  void frame(const std::string& title, const std::string& x_label, const std::string& y_label) {
    out << "<rect x='" << kMarginL << "' y='" << kMarginT << "' width='" << kW - kMarginL - kMarginR
        << "' height='" << kH - kMarginT - kMarginB
        << "' fill='none' stroke='black' stroke-width='1'/>\n";
    text(kW / 2, 22, title, 15, "middle");
    text(kW / 2, kH - 12, x_label, 12, "middle");
    out << "<text x='16' y='" << kH / 2
        << "' font-size='12' text-anchor='middle' font-family='sans-serif' transform='rotate(-90 16 "
        << kH / 2 << ")'>" << y_label << "</text>\n";
  }

  void text(double x, double y, const std::string& s, int size, const char* anchor) {
    out << "<text x='" << x << "' y='" << y << "' font-size='" << size << "' text-anchor='"
        << anchor << "' font-family='sans-serif'>" << s << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* color, double w = 1.0) {
    out << "<line x1='" << x1 << "' y1='" << y1 << "' x2='" << x2 << "' y2='" << y2 << "' stroke='"
        << color << "' stroke-width='" << w << "'/>\n";
  }
};

double map_x(double v, double lo, double hi) {
  return kMarginL + (v - lo) / (hi - lo) * (kW - kMarginL - kMarginR);
}

double map_y(double v, double lo, double hi) {
  return kH - kMarginB - (v - lo) / (hi - lo) * (kH - kMarginT - kMarginB);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void write_histogram(const std::string& path, const Histogram& plot) {
  Canvas c(path);
  c.frame(plot.title, plot.x_label, plot.log_y ? "count (log)" : "count");
  std::vector<std::uint64_t> counts(plot.bins, 0);
  for (double v : plot.values) {
    if (v < plot.lo || v >= plot.hi) continue;
    const int b = std::min(plot.bins - 1,
                           static_cast<int>((v - plot.lo) / (plot.hi - plot.lo) * plot.bins));
    ++counts[b];
  }
  const std::uint64_t peak = std::max<std::uint64_t>(
      1, *std::max_element(counts.begin(), counts.end()));
  const double y_hi = plot.log_y ? std::log10(static_cast<double>(peak)) + 0.2 : peak * 1.05;
  for (int b = 0; b < plot.bins; ++b) {
    if (counts[b] == 0) continue;
    const double v = plot.log_y ? std::log10(static_cast<double>(counts[b])) : counts[b];
    const double x0 = map_x(plot.lo + b * (plot.hi - plot.lo) / plot.bins, plot.lo, plot.hi);
    const double x1 = map_x(plot.lo + (b + 1) * (plot.hi - plot.lo) / plot.bins, plot.lo, plot.hi);
    const double y = map_y(std::max(0.0, v), 0, y_hi);
    c.out << "<rect x='" << x0 << "' y='" << y << "' width='" << x1 - x0 << "' height='"
          << (kH - kMarginB) - y << "' fill='#1f77b4' stroke='none'/>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double v = plot.lo + t * (plot.hi - plot.lo) / 4;
    c.text(map_x(v, plot.lo, plot.hi), kH - kMarginB + 16, fmt(v), 10, "middle");
  }
}

void write_scatter(const std::string& path, const Scatter& plot) {
  Canvas c(path);
  c.frame(plot.title, plot.x_label, plot.y_label);
  c.line(map_x(0, plot.x_lo, plot.x_hi), kMarginT, map_x(0, plot.x_lo, plot.x_hi), kH - kMarginB,
         "#cccccc");
  c.line(kMarginL, map_y(0, plot.y_lo, plot.y_hi), kW - kMarginR, map_y(0, plot.y_lo, plot.y_hi),
         "#cccccc");
  for (const auto& [x, y] : plot.points) {
    if (x < plot.x_lo || x > plot.x_hi || y < plot.y_lo || y > plot.y_hi) continue;
    c.out << "<circle cx='" << map_x(x, plot.x_lo, plot.x_hi) << "' cy='"
          << map_y(y, plot.y_lo, plot.y_hi) << "' r='1.6' fill='#1f77b4' fill-opacity='0.45'/>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double vx = plot.x_lo + t * (plot.x_hi - plot.x_lo) / 4;
    const double vy = plot.y_lo + t * (plot.y_hi - plot.y_lo) / 4;
    c.text(map_x(vx, plot.x_lo, plot.x_hi), kH - kMarginB + 16, fmt(vx), 10, "middle");
    c.text(kMarginL - 8, map_y(vy, plot.y_lo, plot.y_hi) + 4, fmt(vy), 10, "end");
  }
}

void write_curves(const std::string& path, const Curves& plot) {
  Canvas c(path);
  c.frame(plot.title, plot.x_label, plot.y_label);
  double x_lo = 1e300, x_hi = -1e300, y_hi = 0;
  for (const auto& [label, pts] : plot.series) {
    for (const auto& [x, y] : pts) {
      const double xv = plot.log_x ? std::log10(std::max(x, 1e-300)) : x;
      x_lo = std::min(x_lo, xv);
      x_hi = std::max(x_hi, xv);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  y_hi = y_hi > 0 ? y_hi * 1.1 : 1.0;
  int ci = 0;
  double legend_y = kMarginT + 16;
  for (const auto& [label, pts] : plot.series) {
    const char* color = kPalette[ci++ % 6];
    c.out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    auto sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [x, y] : sorted) {
      const double xv = plot.log_x ? std::log10(std::max(x, 1e-300)) : x;
      c.out << map_x(xv, x_lo, x_hi) << "," << map_y(y, 0, y_hi) << " ";
    }
    c.out << "'/>\n";
    c.line(kW - 200, legend_y, kW - 180, legend_y, color, 2);
    c.text(kW - 174, legend_y + 4, label, 10, "start");
    legend_y += 14;
  }
  for (int t = 0; t <= 4; ++t) {
    const double v = x_lo + t * (x_hi - x_lo) / 4;
    const std::string s = plot.log_x ? ("1e" + fmt(v)) : fmt(v);
    c.text(map_x(v, x_lo, x_hi), kH - kMarginB + 16, s, 10, "middle");
    const double vy = t * y_hi / 4;
    c.text(kMarginL - 8, map_y(vy, 0, y_hi) + 4, fmt(vy), 10, "end");
  }
}

}  // namespace qburst::svg
