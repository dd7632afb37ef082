#pragma once

#include <optional>
#include <string>
#include <vector>

#include "demogp/data_io.hpp"
#include "demogp/gp_core.hpp"

namespace demogp {

// One GP per age row of a log-rate surface. Ages that could not be fitted
// (too few points, optimizer failure) stay empty; fit_surface tolerates up
// to 10% of them.
struct SurfaceModel {
  std::vector<int> ages;
  std::vector<std::optional<GPModel>> models;
  FitConfig config;
  SurfaceKind kind = SurfaceKind::kMortality;
  std::vector<std::string> failures;  // per-age diagnostics

  int fitted_count() const;
  const GPModel& model_for(int age) const;  // throws MissingAgeModel
};

struct CurveForecast {
  int year = 0;
  std::vector<int> ages;
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // 95% level
  Eigen::VectorXd upper;
};

// Minimum unmasked observations required per age before a fit is attempted.
int min_points_per_age(const FitConfig& config);

// Independent gp_core fits per age on the unmasked points of each row.
// Throws SurfaceFitFailed when more than 10% of ages end up unfitted.
SurfaceModel fit_surface(const DemographicSurface& log_surface,
                         const FitConfig& config);

CurveForecast forecast_curve(const SurfaceModel& model, int target_year);

}  // namespace demogp
