#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "demogp/errors.hpp"

namespace demogp {

// Strictly increasing knot locations in calendar-year units.
struct KnotVector {
  std::vector<double> knots;

  int size() const { return static_cast<int>(knots.size()); }
  double first() const { return knots.front(); }
  double last() const { return knots.back(); }
};

// Knots at the j/(K-1) quantiles of the observed times, j = 0..K-1, so the
// boundary knots coincide with the data endpoints.
KnotVector build_knots(std::span<const double> times, int knot_count);

// Reduced natural cubic spline basis of dimension K: intercept, linear term,
// and K-2 combinations of truncated cubics that are linear beyond the
// boundary knots. Times are expected in the same units as the knots.
Eigen::VectorXd basis_row(double t, const KnotVector& knots);

// Natural cubic spline mean fitted by least squares. Times are standardized
// to [0, 1] over the knot span before basis construction; coefficients are
// stored in standardized units with the affine map kept alongside.
class MeanModel {
 public:
  MeanModel() = default;

  static MeanModel fit_ols(std::span<const double> times,
                           std::span<const double> values,
                           const KnotVector& knots);

  // Rebuild a model from its knots and reduced coefficients (standardized
  // units), e.g. when loading a serialized model.
  static MeanModel restore(const KnotVector& knots,
                           const Eigen::VectorXd& coefficients);

  double operator()(double t) const;

  const KnotVector& knots() const { return knots_; }
  const Eigen::VectorXd& coefficients() const { return coef_; }

  // Linear tail mu(t) = tail_intercept + tail_slope * t for t >= last knot,
  // expressed in original time units.
  double tail_intercept() const { return tail_intercept_; }
  double tail_slope() const { return tail_slope_; }

  // Truncated-power representation (standardized units) for invariant checks:
  // mu(s) = alpha0 + alpha1 * s + sum_k beta_k (s - xi_k)^3_+.
  double alpha0() const { return alpha0_; }
  double alpha1() const { return alpha1_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const std::vector<double>& standardized_knots() const { return std_knots_; }

  double time_offset() const { return t_offset_; }
  double time_scale() const { return t_scale_; }

 private:
  void finalize();  // derive the truncated-power view and the linear tail

  KnotVector knots_;
  std::vector<double> std_knots_;
  double t_offset_ = 0.0;
  double t_scale_ = 1.0;
  Eigen::VectorXd coef_;
  double alpha0_ = 0.0;
  double alpha1_ = 0.0;
  Eigen::VectorXd beta_;
  double tail_intercept_ = 0.0;
  double tail_slope_ = 0.0;
};

inline double eval_mean(const MeanModel& model, double t) { return model(t); }

}  // namespace demogp
