#pragma once

#include <Eigen/Core>
#include <vector>

#include "demogp/data_io.hpp"

namespace demogp {

// Lee-Carter rank-1 decomposition of a complete log-rate surface with a
// random-walk-with-drift time index. Normalized so that sum(b) = 1 and
// sum(k) = 0.
struct LCModel {
  std::vector<int> ages;
  std::vector<int> years;
  Eigen::VectorXd a;  // per-age intercepts
  Eigen::VectorXd b;  // per-age loadings
  Eigen::VectorXd k;  // time index
  double drift = 0.0;
  double drift_se = 0.0;
  double sigma_rw = 0.0;  // innovation std of the random walk
};

struct LCForecast {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double k_hat = 0.0;
  double k_var = 0.0;
};

LCModel fit_lee_carter(const DemographicSurface& log_surface);

LCForecast forecast_lc(const LCModel& model, int horizon, double alpha);

}  // namespace demogp
