#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace qburst::svg {

struct Histogram {
  std::string title, x_label;
  double lo = 0, hi = 1;
  int bins = 50;
  bool log_y = false;
  std::vector<double> values;
};

struct Scatter {
  std::string title, x_label, y_label;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  std::vector<std::pair<double, double>> points;
};

struct Curves {
  std::string title, x_label, y_label;
  bool log_x = false;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
};

void write_histogram(const std::string& path, const Histogram& plot);
void write_scatter(const std::string& path, const Scatter& plot);
void write_curves(const std::string& path, const Curves& plot);

}  // namespace qburst::svg
