#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "demogp/errors.hpp"
#include "demogp/kernels.hpp"
#include "demogp/spline_mean.hpp"

namespace demogp {

struct TrainingSet {
  std::vector<double> times;   // sorted ascending
  std::vector<double> values;  // log-rate units

  int size() const { return static_cast<int>(times.size()); }
};

struct FitConfig {
  KernelFamily family = KernelFamily::kSpectralMixture;
  int mixture_components = 2;  // Q, spectral mixture only
  int knot_count = 4;          // K
  int restarts = 10;
  std::uint64_t seed = 0;
  int max_iterations = 200;
};

// Noise variance floor keeping the likelihood well-posed.
inline constexpr double kNoiseFloor = 1e-8;

// Per-age fitted model: spline mean, kernel with estimated hyperparameters,
// noise variance, and the cached Cholesky factorization of the stabilized
// Gram matrix.
struct GPModel {
  MeanModel mean;
  KernelSpec kernel;
  double noise_var = 0.0;
  TrainingSet training;
  Eigen::MatrixXd chol;       // lower triangular
  Eigen::VectorXd alpha_vec;  // K^{-1} (y - mu)
  double log_likelihood = 0.0;
  std::uint64_t seed = 0;
};

struct PredictiveDistribution {
  std::vector<double> times;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd covariance;
};

// Cholesky of a symmetric matrix with escalating relative jitter
// (1e-10 .. 1e-4 of the mean diagonal). Throws NotPositiveDefinite when the
// whole ladder fails.
Eigen::MatrixXd stabilized_cholesky(const Eigen::MatrixXd& gram);

double log_marginal_likelihood(const TrainingSet& train, const MeanModel& mean,
                               const KernelSpec& kernel, double noise_var);

// Gradient of the negative log-likelihood over the unconstrained kernel
// hyperparameters followed by log(noise_var).
Eigen::VectorXd nll_gradient(const TrainingSet& train, const MeanModel& mean,
                             const KernelSpec& kernel, double noise_var);

// Two-step estimation: OLS spline mean, then maximum likelihood on the
// residuals over kernel and noise parameters with random restarts.
GPModel fit(const TrainingSet& train, const FitConfig& config);

// Refits only the covariance part against a fixed, already-fitted mean.
GPModel fit_with_mean(const TrainingSet& train, const MeanModel& mean,
                      const FitConfig& config);

// Posterior predictive at the given times. The observation noise enters the
// predictive covariance once; add_noise_twice additionally applies the
// delta-pattern noise inside the test-test block for exact-formula
// comparison.
PredictiveDistribution predict(const GPModel& model,
                               std::span<const double> test_times,
                               bool add_noise_twice = false);

struct Interval {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

Interval prediction_interval(const PredictiveDistribution& pred, double alpha);

// Inverse standard normal CDF.
double normal_quantile(double p);

}  // namespace demogp
