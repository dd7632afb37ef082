#include "demogp/gp_core.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "demogp/lbfgs.hpp"

namespace demogp {

namespace {

Eigen::VectorXd mean_vector(const MeanModel& mean,
                            std::span<const double> times) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(times.size()));
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = mean(times[i]);
  return mu;
}

// -L and its gradient for one parameter vector theta = [kernel..., log s2].
struct Objective {
  const TrainingSet& train;
  const Eigen::VectorXd& residual;
  const KernelSpec& prototype;

  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    const auto np = theta.size() - 1;
    const KernelSpec kernel = from_unconstrained(prototype, theta.head(np));
    const double noise_var = std::exp(theta(np));

    const Eigen::MatrixXd gram = gram_matrix(kernel, train.times, noise_var);
    const Eigen::MatrixXd chol = stabilized_cholesky(gram);
    const auto n = gram.rows();

    const Eigen::VectorXd alpha =
        chol.transpose().triangularView<Eigen::Upper>().solve(
            chol.triangularView<Eigen::Lower>().solve(residual));
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(chol(i, i));
    log_det *= 2.0;

    const double nll = 0.5 * log_det + 0.5 * residual.dot(alpha) +
                       0.5 * n * std::log(2.0 * std::numbers::pi);

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd inv =
        chol.transpose().triangularView<Eigen::Upper>().solve(
            chol.triangularView<Eigen::Lower>().solve(identity));
    const Eigen::MatrixXd inner = inv - alpha * alpha.transpose();

    grad.resize(theta.size());
    const auto dk = gram_gradients(kernel, train.times);
    for (Eigen::Index p = 0; p < np; ++p) {
      grad(p) = 0.5 * inner.cwiseProduct(dk[p]).sum();
    }
    // dK/dlog(s2) = s2 on entries with equal time stamps.
    double noise_term = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (train.times[i] == train.times[j]) noise_term += inner(i, j);
      }
    }
    grad(np) = 0.5 * noise_var * noise_term;
    return nll;
  }
};

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d4b49c58b4ff6bull;
  return z ^ (z >> 31);
}

KernelSpec initial_kernel(const FitConfig& config, double residual_var,
                          double span, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double amp = std::sqrt(std::max(residual_var, 1e-6));
  switch (config.family) {
    case KernelFamily::kSquaredExponential:
      return SquaredExponential{amp, span * (0.1 + 0.9 * unit(rng))};
    case KernelFamily::kPeriodic:
      return Periodic{amp, 0.5 + 1.5 * unit(rng),
                      span * (0.05 + 0.45 * unit(rng))};
    case KernelFamily::kRationalQuadratic:
      return RationalQuadratic{amp, span * (0.1 + 0.9 * unit(rng)),
                               std::exp(-1.0 + 2.0 * unit(rng))};
    case KernelFamily::kMatern32:
      return Matern32{amp, span * (0.1 + 0.9 * unit(rng))};
    case KernelFamily::kMatern52:
      return Matern52{amp, span * (0.1 + 0.9 * unit(rng))};
    case KernelFamily::kSpectralMixture: {
      SpectralMixture sm;
      const int q_count = std::max(1, config.mixture_components);
      for (int q = 0; q < q_count; ++q) {
        SpectralMixtureComponent c;
        c.weight = std::max(residual_var, 1e-6) / q_count;
        // Spectral means up to the Nyquist rate for annual data.
        c.spectral_mean = 0.005 + 0.495 * unit(rng);
        c.spectral_std = std::exp(-1.0 + 2.0 * unit(rng)) / span;
        sm.components.push_back(c);
      }
      return sm;
    }
  }
  throw std::logic_error("unknown kernel family");
}

}  // namespace

Eigen::MatrixXd stabilized_cholesky(const Eigen::MatrixXd& gram) {
  const double mean_diag = gram.diagonal().mean();
  double jitter = 0.0;
  for (int level = 0; level <= 7; ++level) {
    Eigen::MatrixXd stabilized = gram;
    if (jitter > 0.0) {
      stabilized.diagonal().array() += jitter;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(stabilized);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = (jitter == 0.0) ? 1e-10 * mean_diag : jitter * 10.0;
    if (jitter > 1e-4 * mean_diag) break;
  }
  throw NotPositiveDefinite("Gram matrix not positive definite after jitter");
}

double log_marginal_likelihood(const TrainingSet& train, const MeanModel& mean,
                               const KernelSpec& kernel, double noise_var) {
  const Eigen::Map<const Eigen::VectorXd> y(train.values.data(), train.size());
  const Eigen::VectorXd residual = y - mean_vector(mean, train.times);
  const Eigen::MatrixXd gram = gram_matrix(kernel, train.times, noise_var);
  const Eigen::MatrixXd chol = stabilized_cholesky(gram);
  const Eigen::VectorXd alpha =
      chol.transpose().triangularView<Eigen::Upper>().solve(
          chol.triangularView<Eigen::Lower>().solve(residual));
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < chol.rows(); ++i) {
    log_det += std::log(chol(i, i));
  }
  return -log_det - 0.5 * residual.dot(alpha) -
         0.5 * train.size() * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd nll_gradient(const TrainingSet& train, const MeanModel& mean,
                             const KernelSpec& kernel, double noise_var) {
  const Eigen::Map<const Eigen::VectorXd> y(train.values.data(), train.size());
  const Eigen::VectorXd residual = y - mean_vector(mean, train.times);
  Eigen::VectorXd theta(hyperparameter_count(kernel) + 1);
  theta.head(theta.size() - 1) = to_unconstrained(kernel);
  theta(theta.size() - 1) = std::log(noise_var);
  Eigen::VectorXd grad;
  Objective{train, residual, kernel}(theta, grad);
  return grad;
}

GPModel fit(const TrainingSet& train, const FitConfig& config) {
  const KnotVector knots = build_knots(train.times, config.knot_count);
  const Eigen::Map<const Eigen::VectorXd> y(train.values.data(), train.size());
  const MeanModel mean =
      MeanModel::fit_ols(train.times, train.values, knots);
  return fit_with_mean(train, mean, config);
}

GPModel fit_with_mean(const TrainingSet& train, const MeanModel& mean,
                      const FitConfig& config) {
  if (train.size() < 2) throw FitFailed("need at least 2 observations");

  const Eigen::Map<const Eigen::VectorXd> y(train.values.data(), train.size());
  const Eigen::VectorXd residual = y - mean_vector(mean, train.times);
  const double residual_var =
      std::max((residual.array() - residual.mean()).square().mean(), 1e-10);
  const double span =
      std::max(train.times.back() - train.times.front(), 1e-6);

  double best_nll = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;
  std::mt19937_64 proto_rng(config.seed);
  KernelSpec prototype = initial_kernel(config, residual_var, span, proto_rng);

  std::uint64_t seed_state = config.seed;
  for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
    std::mt19937_64 rng(splitmix64(seed_state));
    const KernelSpec init = initial_kernel(config, residual_var, span, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double s2_init = residual_var * (0.05 + 0.45 * unit(rng));

    const int np = hyperparameter_count(init);
    Eigen::VectorXd theta0(np + 1);
    theta0.head(np) = to_unconstrained(init);
    theta0(np) = std::log(std::max(s2_init, kNoiseFloor));

    LbfgsOptions options;
    options.max_iterations = config.max_iterations;
    options.lower_bounds = Eigen::VectorXd::Constant(
        np + 1, -std::numeric_limits<double>::infinity());
    options.lower_bounds(np) = std::log(kNoiseFloor);

    const Objective objective{train, residual, init};
    const LbfgsResult run = lbfgs_minimize(objective, theta0, options);
    if (std::isfinite(run.f) && run.f < best_nll) {
      best_nll = run.f;
      best_theta = run.x;
      prototype = init;
    }
  }
  if (!std::isfinite(best_nll)) {
    throw FitFailed("no restart reached a finite optimum");
  }

  GPModel model;
  model.mean = mean;
  const int np = hyperparameter_count(prototype);
  model.kernel = from_unconstrained(prototype, best_theta.head(np));
  model.noise_var = std::exp(best_theta(np));
  model.training = train;
  model.seed = config.seed;
  model.log_likelihood = -best_nll;

  const Eigen::MatrixXd gram =
      gram_matrix(model.kernel, train.times, model.noise_var);
  model.chol = stabilized_cholesky(gram);
  model.alpha_vec =
      model.chol.transpose().triangularView<Eigen::Upper>().solve(
          model.chol.triangularView<Eigen::Lower>().solve(residual));
  return model;
}

PredictiveDistribution predict(const GPModel& model,
                               std::span<const double> test_times,
                               bool add_noise_twice) {
  const auto n = static_cast<Eigen::Index>(model.training.times.size());
  const auto h = static_cast<Eigen::Index>(test_times.size());

  Eigen::MatrixXd cross(n, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < h; ++j) {
      cross(i, j) =
          kernel_eval(model.kernel, model.training.times[i], test_times[j]);
    }
  }
  Eigen::MatrixXd test_gram(h, h);
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < h; ++j) {
      test_gram(i, j) = kernel_eval(model.kernel, test_times[i], test_times[j]);
      if (add_noise_twice && test_times[i] == test_times[j]) {
        test_gram(i, j) += model.noise_var;
      }
    }
  }

  PredictiveDistribution pred;
  pred.times.assign(test_times.begin(), test_times.end());
  pred.mean = mean_vector(model.mean, test_times) +
              cross.transpose() * model.alpha_vec;

  const Eigen::MatrixXd v =
      model.chol.triangularView<Eigen::Lower>().solve(cross);
  pred.covariance = test_gram - v.transpose() * v;
  pred.covariance.diagonal().array() += model.noise_var;
  pred.variance = pred.covariance.diagonal();
  for (Eigen::Index i = 0; i < h; ++i) {
    if (pred.variance(i) < 0.0) {
      if (pred.variance(i) < -1e-10) {
        std::cerr << "warning: clipping negative predictive variance "
                  << pred.variance(i) << " at t=" << pred.times[i] << "\n";
      }
      pred.variance(i) = 0.0;
    }
  }
  return pred;
}

Interval prediction_interval(const PredictiveDistribution& pred, double alpha) {
  const double z = normal_quantile(1.0 - alpha / 2.0);
  Interval iv;
  const Eigen::VectorXd half = z * pred.variance.array().sqrt();
  iv.lower = pred.mean - half;
  iv.upper = pred.mean + half;
  return iv;
}

// Acklam's rational approximation refined by one Halley step.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile requires p in (0, 1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace demogp
