#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

namespace demogp::tools {

// Data for one forecast-curve chart: x axis is age, y axis is log rate.
struct ForecastPlot {
  std::vector<int> ages;
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<double> observed;  // last observed curve; NaN = missing point
  int target_year = 0;
  int observed_year = 0;
};

// Observed points, solid mean line, dashed 95% interval lines.
void write_forecast_svg(std::ostream& out, const ForecastPlot& plot);

}  // namespace demogp::tools
