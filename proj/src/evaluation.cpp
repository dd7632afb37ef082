#include "demogp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace demogp {

Eigen::MatrixXd GprForecaster::forecast(
    const DemographicSurface& train_surface,
    std::span<const int> target_years) const {
  const SurfaceModel model = fit_surface(train_surface, config_);
  Eigen::MatrixXd out(train_surface.age_count(), target_years.size());
  std::vector<double> times(target_years.begin(), target_years.end());
  for (int i = 0; i < train_surface.age_count(); ++i) {
    if (!model.models[i].has_value()) {
      throw MissingAgeModel(train_surface.ages[i]);
    }
    out.row(i) = predict(*model.models[i], times).mean.transpose();
  }
  return out;
}

Eigen::MatrixXd LcForecaster::forecast(const DemographicSurface& train_surface,
                                       std::span<const int> target_years) const {
  const LCModel model = fit_lee_carter(train_surface);
  const int last_year = train_surface.years.back();
  Eigen::MatrixXd out(train_surface.age_count(), target_years.size());
  for (std::size_t j = 0; j < target_years.size(); ++j) {
    const int h = target_years[j] - last_year;
    if (h < 1) throw WindowOverrun("LC forecast target inside training span");
    out.col(j) = forecast_lc(model, h, 0.05).mean;
  }
  return out;
}

double rmse_curve(const Eigen::VectorXd& predicted,
                  const Eigen::VectorXd& actual) {
  if (predicted.size() != actual.size()) {
    throw ShapeError("predicted/actual length mismatch: " +
                     std::to_string(predicted.size()) + " vs " +
                     std::to_string(actual.size()));
  }
  return std::sqrt((predicted - actual).squaredNorm() /
                   static_cast<double>(predicted.size()));
}

DemographicSurface restrict_years(const DemographicSurface& surface,
                                  int last_year) {
  DemographicSurface out;
  out.kind = surface.kind;
  out.ages = surface.ages;
  int keep = 0;
  while (keep < surface.year_count() && surface.years[keep] <= last_year) {
    ++keep;
  }
  out.years.assign(surface.years.begin(), surface.years.begin() + keep);
  out.values = surface.values.leftCols(keep);
  out.mask = surface.mask.leftCols(keep);
  return out;
}

EvaluationReport rolling_window_evaluate(
    const DemographicSurface& log_surface,
    const std::vector<const CurveForecaster*>& models,
    std::span<const int> horizons, int window_count, int t_m,
    const std::string& dataset_id) {
  const int t_n = log_surface.years.back();
  const int max_h = *std::max_element(horizons.begin(), horizons.end());
  if (t_m + window_count - 1 + max_h > t_n) {
    throw WindowOverrun("deepest window needs year " +
                        std::to_string(t_m + window_count - 1 + max_h) +
                        " but data ends at " + std::to_string(t_n));
  }

  const int ages = log_surface.age_count();
  // pooled squared errors and per-window breakdown: [model][horizon]
  std::vector<std::vector<double>> pooled(
      models.size(), std::vector<double>(horizons.size(), 0.0));
  std::vector<std::vector<std::vector<double>>> per_window(
      models.size(),
      std::vector<std::vector<double>>(horizons.size()));

  for (int w = 0; w < window_count; ++w) {
    const int train_end = t_m + w;
    const DemographicSurface train = restrict_years(log_surface, train_end);
    std::vector<int> targets(horizons.size());
    for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
      targets[hi] = train_end + horizons[hi];
    }
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      const Eigen::MatrixXd predicted = models[mi]->forecast(train, targets);
      for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
        const int col = log_surface.year_index(targets[hi]);
        if (col < 0) throw WindowOverrun("target year missing from surface");
        const Eigen::VectorXd actual = log_surface.values.col(col);
        const Eigen::VectorXd err = predicted.col(hi) - actual;
        pooled[mi][hi] += err.squaredNorm();
        per_window[mi][hi].push_back(
            std::sqrt(err.squaredNorm() / static_cast<double>(ages)));
      }
    }
  }

  EvaluationReport report;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
      EvaluationRow row;
      row.dataset = dataset_id;
      row.model = models[mi]->id();
      row.horizon = horizons[hi];
      row.window_count = window_count;
      row.rmse = std::sqrt(pooled[mi][hi] /
                           (static_cast<double>(window_count) * ages));
      row.per_window_rmse = per_window[mi][hi];
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const EvaluationReport& report) {
  out << "dataset,model,h,rmse,windows\n";
  out << std::setprecision(10);
  for (const auto& row : report.rows) {
    out << row.dataset << ',' << row.model << ',' << row.horizon << ','
        << row.rmse << ',' << row.window_count << '\n';
  }
}

std::string format_report_table(const EvaluationReport& report) {
  // One block per horizon, models across the columns, mirroring the usual
  // comparison-table layout.
  std::vector<std::string> models;
  std::vector<int> horizons;
  std::vector<std::string> datasets;
  for (const auto& row : report.rows) {
    if (std::find(models.begin(), models.end(), row.model) == models.end()) {
      models.push_back(row.model);
    }
    if (std::find(horizons.begin(), horizons.end(), row.horizon) ==
        horizons.end()) {
      horizons.push_back(row.horizon);
    }
    if (std::find(datasets.begin(), datasets.end(), row.dataset) ==
        datasets.end()) {
      datasets.push_back(row.dataset);
    }
  }

  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::setw(16) << std::left << "dataset";
  for (const auto& m : models) out << std::setw(10) << std::right << m;
  out << '\n';
  for (int h : horizons) {
    out << "h = " << h << '\n';
    for (const auto& d : datasets) {
      out << std::setw(16) << std::left << d;
      for (const auto& m : models) {
        double value = std::nan("");
        for (const auto& row : report.rows) {
          if (row.dataset == d && row.model == m && row.horizon == h) {
            value = row.rmse;
          }
        }
        out << std::setw(10) << std::right << value;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace demogp
