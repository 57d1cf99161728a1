#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ridesim {

// Minimal static chart output for the --plots flag. No dependencies, just
// enough SVG to eyeball trends and distributions.

struct PlotSeries {
  std::string label;
  std::string colour;  // any SVG colour
  std::vector<std::pair<double, double>> points;
};

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series);

struct HistogramGroup {
  std::string label;
  std::string colour;
  std::vector<double> values;
};

std::string histogram_svg(const std::string& title, const std::string& x_label,
                          const std::vector<HistogramGroup>& groups, int bins);

}  // namespace ridesim
