#pragma once

#include <string>
#include <vector>

namespace widthflow::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

// Polyline plot with axes, five ticks per axis and a legend.
std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series);

}  // namespace widthflow::cli
