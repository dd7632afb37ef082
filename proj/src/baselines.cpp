#include "demogp/baselines.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "demogp/gp_core.hpp"

namespace demogp {

LCModel fit_lee_carter(const DemographicSurface& log_surface) {
  if (!log_surface.complete()) {
    throw IncompleteSurface("Lee-Carter requires a fully observed surface");
  }
  const int n = log_surface.year_count();
  if (n < 3) throw IncompleteSurface("need at least 3 years");

  LCModel model;
  model.ages = log_surface.ages;
  model.years = log_surface.years;
  model.a = log_surface.values.rowwise().mean();

  const Eigen::MatrixXd centered =
      log_surface.values.colwise() - model.a;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      centered, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const double s1 = svd.singularValues()(0);
  Eigen::VectorXd u = svd.matrixU().col(0);
  Eigen::VectorXd v = svd.matrixV().col(0);

  const double u_sum = u.sum();
  if (std::abs(u_sum) < 1e-12 || s1 < 1e-12) {
    // No usable time trend: flat loadings, zero index.
    model.b = Eigen::VectorXd::Constant(log_surface.age_count(),
                                        1.0 / log_surface.age_count());
    model.k = Eigen::VectorXd::Zero(n);
  } else {
    // Rescale the leading singular triple so that sum(b) = 1; rows of the
    // centered matrix have zero mean, so sum(k) = 0 follows.
    model.b = u / u_sum;
    model.k = s1 * u_sum * v;
  }

  model.drift = (model.k(n - 1) - model.k(0)) / (n - 1);
  double ss = 0.0;
  for (int t = 1; t < n; ++t) {
    const double innov = model.k(t) - model.k(t - 1) - model.drift;
    ss += innov * innov;
  }
  model.sigma_rw = n > 2 ? std::sqrt(ss / (n - 2)) : 0.0;
  model.drift_se = model.sigma_rw / std::sqrt(static_cast<double>(n - 1));
  return model;
}

LCForecast forecast_lc(const LCModel& model, int horizon, double alpha) {
  const int n = static_cast<int>(model.k.size());
  LCForecast out;
  out.k_hat = model.k(n - 1) + horizon * model.drift;
  out.k_var = horizon * model.sigma_rw * model.sigma_rw +
              (horizon * model.drift_se) * (horizon * model.drift_se);
  out.mean = model.a + model.b * out.k_hat;
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const Eigen::VectorXd half =
      z * std::sqrt(out.k_var) * model.b.cwiseAbs();
  out.lower = out.mean - half;
  out.upper = out.mean + half;
  return out;
}

}  // namespace demogp
