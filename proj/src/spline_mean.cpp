#include "demogp/spline_mean.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

namespace demogp {

namespace {

double quantile_type7(std::span<const double> sorted, double q) {
  const auto n = sorted.size();
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double cube_plus(double v) { return v > 0.0 ? v * v * v : 0.0; }

// Reduced basis on standardized knots. For s beyond the last knot the
// truncated-cubic combinations collapse to closed-form affine functions,
// which avoids cancellation when extrapolating far out.
Eigen::VectorXd basis_row_std(double s, const std::vector<double>& xi) {
  const int K = static_cast<int>(xi.size());
  Eigen::VectorXd row(K);
  row(0) = 1.0;
  row(1) = s;
  if (K == 2) return row;

  const double xi_last = xi[K - 1];
  const double xi_prev = xi[K - 2];
  if (s >= xi_last) {
    for (int j = 0; j < K - 2; ++j) {
      row(j + 2) = (xi_prev - xi[j]) * (3.0 * s - xi[j] - xi_prev - xi_last);
    }
    return row;
  }

  const double d_last =
      (cube_plus(s - xi_prev) - cube_plus(s - xi_last)) / (xi_last - xi_prev);
  for (int j = 0; j < K - 2; ++j) {
    const double d_j =
        (cube_plus(s - xi[j]) - cube_plus(s - xi_last)) / (xi_last - xi[j]);
    row(j + 2) = d_j - d_last;
  }
  return row;
}

}  // namespace

KnotVector build_knots(std::span<const double> times, int knot_count) {
  if (knot_count < 2) throw DegenerateKnots("knot count must be at least 2");
  if (times.size() < static_cast<std::size_t>(knot_count)) {
    throw DegenerateKnots("fewer times than knots");
  }
  KnotVector kv;
  kv.knots.resize(knot_count);
  for (int j = 0; j < knot_count; ++j) {
    kv.knots[j] =
        quantile_type7(times, static_cast<double>(j) / (knot_count - 1));
  }
  for (int j = 1; j < knot_count; ++j) {
    if (!(kv.knots[j] > kv.knots[j - 1])) {
      throw DegenerateKnots("knots not strictly increasing (tied quantiles)");
    }
  }
  return kv;
}

Eigen::VectorXd basis_row(double t, const KnotVector& knots) {
  return basis_row_std(t, knots.knots);
}

void MeanModel::finalize() {
  const int K = knots_.size();
  t_offset_ = knots_.first();
  t_scale_ = knots_.last() - knots_.first();
  std_knots_.resize(K);
  for (int j = 0; j < K; ++j) {
    std_knots_[j] = (knots_.knots[j] - t_offset_) / t_scale_;
  }

  // Truncated-power view of the reduced coefficients; exposes the constants
  // of the forced linear tail.
  alpha0_ = coef_(0);
  alpha1_ = coef_(1);
  beta_ = Eigen::VectorXd::Zero(K);
  const double xi_last = std_knots_[K - 1];
  const double xi_prev = std_knots_[K - 2];
  for (int j = 0; j < K - 2; ++j) {
    const double g = coef_(j + 2);
    beta_(j) += g / (xi_last - std_knots_[j]);
    beta_(K - 2) -= g / (xi_last - xi_prev);
    beta_(K - 1) +=
        g * (1.0 / (xi_last - xi_prev) - 1.0 / (xi_last - std_knots_[j]));
  }

  double c0 = alpha0_;
  double c1 = alpha1_;
  for (int j = 0; j < K; ++j) {
    const double xi = std_knots_[j];
    c0 -= beta_(j) * xi * xi * xi;
    c1 += 3.0 * beta_(j) * xi * xi;
  }
  tail_slope_ = c1 / t_scale_;
  tail_intercept_ = c0 - c1 * t_offset_ / t_scale_;
}

MeanModel MeanModel::fit_ols(std::span<const double> times,
                             std::span<const double> values,
                             const KnotVector& knots) {
  const int K = knots.size();
  const auto n = static_cast<Eigen::Index>(times.size());
  if (n < K) throw SingularDesign("fewer observations than basis functions");

  MeanModel m;
  m.knots_ = knots;
  const double offset = knots.first();
  const double scale = knots.last() - knots.first();
  std::vector<double> std_knots(K);
  for (int j = 0; j < K; ++j) {
    std_knots[j] = (knots.knots[j] - offset) / scale;
  }

  Eigen::MatrixXd design(n, K);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = (times[i] - offset) / scale;
    design.row(i) = basis_row_std(s, std_knots).transpose();
    y(i) = values[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < K) throw SingularDesign("rank-deficient spline design");
  m.coef_ = qr.solve(y);
  m.finalize();
  return m;
}

MeanModel MeanModel::restore(const KnotVector& knots,
                             const Eigen::VectorXd& coefficients) {
  if (coefficients.size() != knots.size()) {
    throw SingularDesign("coefficient count does not match knot count");
  }
  MeanModel m;
  m.knots_ = knots;
  m.coef_ = coefficients;
  m.finalize();
  return m;
}

double MeanModel::operator()(double t) const {
  if (t >= knots_.last()) return tail_intercept_ + tail_slope_ * t;
  const double s = (t - t_offset_) / t_scale_;
  return basis_row_std(s, std_knots_).dot(coef_);
}

}  // namespace demogp
