#include "demogp/demography.hpp"

#include <cmath>

namespace demogp {

int SurfaceModel::fitted_count() const {
  int n = 0;
  for (const auto& m : models) {
    if (m.has_value()) ++n;
  }
  return n;
}

const GPModel& SurfaceModel::model_for(int age) const {
  for (std::size_t i = 0; i < ages.size(); ++i) {
    if (ages[i] == age) {
      if (!models[i].has_value()) throw MissingAgeModel(age);
      return *models[i];
    }
  }
  throw MissingAgeModel(age);
}

int min_points_per_age(const FitConfig& config) {
  return std::max(config.knot_count, 8);
}

SurfaceModel fit_surface(const DemographicSurface& log_surface,
                         const FitConfig& config) {
  SurfaceModel result;
  result.ages = log_surface.ages;
  result.config = config;
  result.kind = log_surface.kind;
  result.models.resize(log_surface.age_count());
  result.failures.resize(log_surface.age_count());

  const int min_points = min_points_per_age(config);
  for (int i = 0; i < log_surface.age_count(); ++i) {
    TrainingSet train;
    for (int j = 0; j < log_surface.year_count(); ++j) {
      if (log_surface.mask(i, j)) continue;
      train.times.push_back(static_cast<double>(log_surface.years[j]));
      train.values.push_back(log_surface.values(i, j));
    }
    if (train.size() < min_points) {
      result.failures[i] = "too few observations (" +
                           std::to_string(train.size()) + " < " +
                           std::to_string(min_points) + ")";
      continue;
    }
    try {
      result.models[i] = fit(train, config);
    } catch (const std::exception& e) {
      result.failures[i] = e.what();
    }
  }

  const int unfitted = log_surface.age_count() - result.fitted_count();
  if (unfitted * 10 > log_surface.age_count()) {
    std::string detail;
    for (int i = 0; i < log_surface.age_count(); ++i) {
      if (!result.models[i].has_value()) {
        detail += "\n  age " + std::to_string(log_surface.ages[i]) + ": " +
                  result.failures[i];
      }
    }
    throw SurfaceFitFailed(std::to_string(unfitted) + " of " +
                           std::to_string(log_surface.age_count()) +
                           " ages unfitted" + detail);
  }
  return result;
}

CurveForecast forecast_curve(const SurfaceModel& model, int target_year) {
  CurveForecast out;
  out.year = target_year;
  out.ages = model.ages;
  const auto n = static_cast<Eigen::Index>(model.ages.size());
  out.mean.resize(n);
  out.lower.resize(n);
  out.upper.resize(n);
  const double t = static_cast<double>(target_year);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!model.models[i].has_value()) throw MissingAgeModel(model.ages[i]);
    const auto pred = predict(*model.models[i], std::span(&t, 1));
    const auto interval = prediction_interval(pred, 0.05);
    out.mean(i) = pred.mean(0);
    out.lower(i) = interval.lower(0);
    out.upper(i) = interval.upper(0);
  }
  return out;
}

}  // namespace demogp
