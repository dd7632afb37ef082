#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "demogp/baselines.hpp"
#include "demogp/data_io.hpp"
#include "demogp/demography.hpp"

namespace demogp {

// A model that trains on a log-rate surface and forecasts whole curves for
// the requested calendar years; one column per target year.
class CurveForecaster {
 public:
  virtual ~CurveForecaster() = default;
  virtual std::string id() const = 0;
  virtual Eigen::MatrixXd forecast(const DemographicSurface& train_surface,
                                   std::span<const int> target_years) const = 0;
};

class GprForecaster final : public CurveForecaster {
 public:
  explicit GprForecaster(FitConfig config) : config_(config) {}
  std::string id() const override { return "gpr"; }
  Eigen::MatrixXd forecast(const DemographicSurface& train_surface,
                           std::span<const int> target_years) const override;

 private:
  FitConfig config_;
};

class LcForecaster final : public CurveForecaster {
 public:
  std::string id() const override { return "lc"; }
  Eigen::MatrixXd forecast(const DemographicSurface& train_surface,
                           std::span<const int> target_years) const override;
};

struct EvaluationRow {
  std::string dataset;
  std::string model;
  int horizon = 0;
  double rmse = 0.0;  // pooled over windows and ages inside one root
  int window_count = 0;
  std::vector<double> per_window_rmse;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;
};

double rmse_curve(const Eigen::VectorXd& predicted,
                  const Eigen::VectorXd& actual);

// Keeps only the columns with year <= last_year.
DemographicSurface restrict_years(const DemographicSurface& surface,
                                  int last_year);

// Rolling-window protocol: window w trains on years [t_1, t_m + w] and is
// scored on year t_m + w + h for each horizon h. The reported RMSE pools
// the squared errors of all windows and ages inside a single root.
EvaluationReport rolling_window_evaluate(
    const DemographicSurface& log_surface,
    const std::vector<const CurveForecaster*>& models,
    std::span<const int> horizons, int window_count, int t_m,
    const std::string& dataset_id);

void write_report_csv(std::ostream& out, const EvaluationReport& report);
std::string format_report_table(const EvaluationReport& report);

}  // namespace demogp
