#include "cubmom/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cubmom::cli {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 160;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series, bool log_y) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_y && y <= 0.0) continue;
      const double yy = log_y ? std::log10(y) : y;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, yy);
      y_max = std::max(y_max, yy);
    }
  }
  if (!(x_min < x_max)) {
    x_min = 0.0;
    x_max = 1.0;
  }
  if (!(y_min < y_max)) {
    y_min -= 0.5;
    y_max += 0.5;
  }

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto px = [&](double x) {
    return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto py = [&](double y) {
    const double yy = log_y ? std::log10(y) : y;
    return kMarginTop + (y_max - yy) / (y_max - y_min) * plot_h;
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n"
     << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";

  // frame
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
     << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // ticks
  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / n_ticks;
    const double gx = px(fx);
    os << "<line x1=\"" << num(gx) << "\" y1=\"" << kMarginTop + plot_h
       << "\" x2=\"" << num(gx) << "\" y2=\"" << kMarginTop + plot_h + 5
       << "\" stroke=\"#333333\"/>\n"
       << "<text x=\"" << num(gx) << "\" y=\"" << kMarginTop + plot_h + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << num(fx) << "</text>\n";
    const double fy = y_min + (y_max - y_min) * i / n_ticks;
    const double gy = kMarginTop + plot_h - plot_h * i / n_ticks;
    const std::string label = log_y ? ("1e" + num(fy)) : num(fy);
    os << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << num(gy)
       << "\" x2=\"" << kMarginLeft << "\" y2=\"" << num(gy)
       << "\" stroke=\"#333333\"/>\n"
       << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(gy + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << label << "</text>\n";
  }

  // axis labels
  os << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << x_label << "</text>\n"
     << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        "transform=\"rotate(-90 18 "
     << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  // one polyline per series plus a legend entry
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[k].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_y && y <= 0.0) continue;
      os << (first ? "" : " ") << num(px(x)) << "," << num(py(y));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kMarginTop + 16.0 + 18.0 * k;
    os << "<line x1=\"" << kWidth - kMarginRight + 12 << "\" y1=\"" << num(ly)
       << "\" x2=\"" << kWidth - kMarginRight + 36 << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << kWidth - kMarginRight + 42 << "\" y=\"" << num(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[k].name
       << "</text>\n";
  }

  os << "</svg>\n";
  return os.str();
}

}  // namespace cubmom::cli
