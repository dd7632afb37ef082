#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace demogp::tools {

namespace {

constexpr double kWidth = 840.0;
constexpr double kHeight = 520.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 25.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 55.0;

struct Scale {
  double x0, x1, y0, y1;

  double x(double age) const {
    return kMarginLeft +
           (age - x0) / (x1 - x0) * (kWidth - kMarginLeft - kMarginRight);
  }
  double y(double value) const {
    return kHeight - kMarginBottom -
           (value - y0) / (y1 - y0) * (kHeight - kMarginTop - kMarginBottom);
  }
};

std::string path_data(const std::vector<int>& ages, const Eigen::VectorXd& v,
                      const Scale& scale) {
  std::ostringstream d;
  d << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < ages.size(); ++i) {
    d << (i == 0 ? "M" : " L") << scale.x(ages[i]) << ' ' << scale.y(v(i));
  }
  return d.str();
}

}  // namespace

void write_forecast_svg(std::ostream& out, const ForecastPlot& plot) {
  const auto n = static_cast<Eigen::Index>(plot.ages.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    lo = std::min({lo, plot.lower(i), plot.mean(i)});
    hi = std::max({hi, plot.upper(i), plot.mean(i)});
  }
  for (double v : plot.observed) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double pad = 0.05 * (hi - lo + 1e-12);
  const Scale scale{static_cast<double>(plot.ages.front()),
                    static_cast<double>(plot.ages.back()), lo - pad, hi + pad};

  out << std::fixed << std::setprecision(2);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";

  // axes
  out << "  <line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop
      << "\" x2=\"" << kMarginLeft << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << kMarginLeft << "\" y1=\""
      << kHeight - kMarginBottom << "\" x2=\"" << kWidth - kMarginRight
      << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">Forecast "
      << plot.target_year << " (log rate by age, 95% interval)</text>\n";
  out << "  <text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">age</text>\n";

  // interval bounds first so the mean draws on top
  out << "  <path d=\"" << path_data(plot.ages, plot.lower, scale)
      << "\" fill=\"none\" stroke=\"#4477aa\" stroke-dasharray=\"6 4\"/>\n";
  out << "  <path d=\"" << path_data(plot.ages, plot.upper, scale)
      << "\" fill=\"none\" stroke=\"#4477aa\" stroke-dasharray=\"6 4\"/>\n";
  out << "  <path d=\"" << path_data(plot.ages, plot.mean, scale)
      << "\" fill=\"none\" stroke=\"#aa3311\" stroke-width=\"1.8\"/>\n";

  for (std::size_t i = 0; i < plot.observed.size() && i < plot.ages.size();
       ++i) {
    if (!std::isfinite(plot.observed[i])) continue;
    out << "  <circle cx=\"" << scale.x(plot.ages[i]) << "\" cy=\""
        << scale.y(plot.observed[i]) << "\" r=\"2\" fill=\"#222222\"/>\n";
  }
  if (!plot.observed.empty()) {
    out << "  <text x=\"" << kWidth - kMarginRight << "\" y=\""
        << kMarginTop - 6 << "\" text-anchor=\"end\" "
        << "font-family=\"sans-serif\" font-size=\"12\">points: observed "
        << plot.observed_year << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace demogp::tools
