#include "ridesim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ridesim/csv.hpp"
#include "ridesim/errors.hpp"

namespace ridesim {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

double sx(double x, const Range& r) {
  return kMarginLeft + (x - r.lo) / (r.hi - r.lo) * (kWidth - kMarginLeft - kMarginRight);
}

double sy(double y, const Range& r) {
  return kHeight - kMarginBottom - (y - r.lo) / (r.hi - r.lo) * (kHeight - kMarginTop - kMarginBottom);
}

std::string num(double v) {
  const double rounded = std::round(v * 1000.0) / 1000.0;
  return fmt_double(rounded);
}

void open_svg(std::string& s, const std::string& title) {
  s += "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kWidth) + "' height='" +
       num(kHeight) + "' viewBox='0 0 " + num(kWidth) + " " + num(kHeight) + "'>\n";
  s += "<rect width='100%' height='100%' fill='white'/>\n";
  s += "<text x='" + num(kWidth / 2) + "' y='22' text-anchor='middle' font-family='sans-serif' "
       "font-size='15'>" + title + "</text>\n";
}

void axes(std::string& s, const Range& xr, const Range& yr, const std::string& x_label,
          const std::string& y_label) {
  const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  s += "<line x1='" + num(x0) + "' y1='" + num(y0) + "' x2='" + num(x1) + "' y2='" + num(y0) +
       "' stroke='black'/>\n";
  s += "<line x1='" + num(x0) + "' y1='" + num(y0) + "' x2='" + num(x0) + "' y2='" + num(y1) +
       "' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    s += "<text x='" + num(sx(fx, xr)) + "' y='" + num(y0 + 18) +
         "' text-anchor='middle' font-family='sans-serif' font-size='11'>" + num(fx) + "</text>\n";
    s += "<text x='" + num(x0 - 8) + "' y='" + num(sy(fy, yr) + 4) +
         "' text-anchor='end' font-family='sans-serif' font-size='11'>" + num(fy) + "</text>\n";
  }
  s += "<text x='" + num((x0 + x1) / 2) + "' y='" + num(kHeight - 10) +
       "' text-anchor='middle' font-family='sans-serif' font-size='12'>" + x_label + "</text>\n";
  s += "<text x='16' y='" + num((y0 + y1) / 2) +
       "' text-anchor='middle' font-family='sans-serif' font-size='12' transform='rotate(-90 16 " +
       num((y0 + y1) / 2) + ")'>" + y_label + "</text>\n";
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xr.add(x);
      yr.add(y);
    }
  }
  xr.pad();
  yr.pad();

  std::string out;
  open_svg(out, title);
  axes(out, xr, yr, x_label, y_label);
  double legend_y = kMarginTop + 6;
  for (const auto& s : series) {
    if (s.points.empty()) continue;
    std::string pts;
    for (const auto& [x, y] : s.points) pts += num(sx(x, xr)) + "," + num(sy(y, yr)) + " ";
    out += "<polyline fill='none' stroke='" + s.colour + "' stroke-width='2' points='" + pts +
           "'/>\n";
    for (const auto& [x, y] : s.points)
      out += "<circle cx='" + num(sx(x, xr)) + "' cy='" + num(sy(y, yr)) + "' r='2.5' fill='" +
             s.colour + "'/>\n";
    out += "<rect x='" + num(kWidth - 170) + "' y='" + num(legend_y - 9) +
           "' width='12' height='12' fill='" + s.colour + "'/>\n";
    out += "<text x='" + num(kWidth - 152) + "' y='" + num(legend_y + 1) +
           "' font-family='sans-serif' font-size='12'>" + s.label + "</text>\n";
    legend_y += 18;
  }
  out += "</svg>\n";
  return out;
}

std::string histogram_svg(const std::string& title, const std::string& x_label,
                          const std::vector<HistogramGroup>& groups, int bins) {
  if (bins < 1) throw InputError("histogram needs at least 1 bin");
  Range xr;
  for (const auto& g : groups)
    for (double v : g.values) xr.add(v);
  xr.pad();

  std::vector<std::vector<long>> counts(groups.size(), std::vector<long>(bins, 0));
  long max_count = 1;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (double v : groups[gi].values) {
      auto b = static_cast<long>((v - xr.lo) / (xr.hi - xr.lo) * bins);
      b = std::clamp<long>(b, 0, bins - 1);
      max_count = std::max(max_count, ++counts[gi][static_cast<std::size_t>(b)]);
    }
  }

  Range yr;
  yr.add(0.0);
  yr.add(static_cast<double>(max_count));
  yr.pad();

  std::string out;
  open_svg(out, title);
  axes(out, xr, yr, x_label, "count");
  const double band = (kWidth - kMarginLeft - kMarginRight) / bins;
  const double bar = band / std::max<std::size_t>(1, groups.size());
  double legend_y = kMarginTop + 6;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (int b = 0; b < bins; ++b) {
      const long c = counts[gi][static_cast<std::size_t>(b)];
      if (c == 0) continue;
      const double x = kMarginLeft + band * b + bar * static_cast<double>(gi);
      const double y = sy(static_cast<double>(c), yr);
      out += "<rect x='" + num(x) + "' y='" + num(y) + "' width='" + num(bar * 0.9) +
             "' height='" + num(kHeight - kMarginBottom - y) + "' fill='" + groups[gi].colour +
             "' fill-opacity='0.75'/>\n";
    }
    out += "<rect x='" + num(kWidth - 170) + "' y='" + num(legend_y - 9) +
           "' width='12' height='12' fill='" + groups[gi].colour + "'/>\n";
    out += "<text x='" + num(kWidth - 152) + "' y='" + num(legend_y + 1) +
           "' font-family='sans-serif' font-size='12'>" + groups[gi].label + "</text>\n";
    legend_y += 18;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ridesim
