#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "demogp/demography.hpp"

using namespace demogp;

namespace {

FitConfig quick_config(std::uint64_t seed = 17) {
  FitConfig config;
  config.family = KernelFamily::kSpectralMixture;
  config.mixture_components = 1;
  config.restarts = 2;
  config.seed = seed;
  config.max_iterations = 80;
  return config;
}

// Surface sampled from independent per-age GPs (damped cosine + trend).
DemographicSurface gp_surface(int ages, int years, unsigned seed,
                              int first_year = 1947) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  DemographicSurface s;
  s.kind = SurfaceKind::kMortality;
  for (int a = 0; a < ages; ++a) s.ages.push_back(a);
  for (int j = 0; j < years; ++j) s.years.push_back(first_year + j);
  s.values.resize(ages, years);
  s.mask.setConstant(ages, years, false);
  for (int a = 0; a < ages; ++a) {
    std::uniform_real_distribution<double> phase(0.0, 6.28);
    const double ph = phase(rng);
    for (int j = 0; j < years; ++j) {
      s.values(a, j) = -4.0 - 0.05 * a - 0.015 * j +
                       0.2 * std::cos(0.25 * j + ph) + noise(rng);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("fit_surface fits every age of a clean synthetic surface") {
  const auto surface = gp_surface(3, 60, 1);
  const auto model = fit_surface(surface, quick_config());
  CHECK(model.fitted_count() == 3);
  for (int a = 0; a < 3; ++a) {
    REQUIRE(model.models[a].has_value());
    // fitted likelihood at least as good as a plain white-noise explanation
    TrainingSet train;
    for (int j = 0; j < surface.year_count(); ++j) {
      train.times.push_back(surface.years[j]);
      train.values.push_back(surface.values(a, j));
    }
    const double white = log_marginal_likelihood(
        train, model.models[a]->mean, SquaredExponential{1e-6, 1.0}, 0.05 * 0.05);
    CHECK(model.models[a]->log_likelihood >= white - 1e-6);
  }
}

TEST_CASE("an all-masked row is skipped without affecting the others") {
  auto surface = gp_surface(12, 50, 2);
  surface.mask.row(4).setConstant(true);
  const auto model = fit_surface(surface, quick_config());
  CHECK_FALSE(model.models[4].has_value());
  CHECK(model.fitted_count() == 11);
  CHECK(model.failures[4].find("too few") != std::string::npos);

  const auto clean = fit_surface(gp_surface(12, 50, 2), quick_config());
  for (int a = 0; a < 12; ++a) {
    if (a == 4) continue;
    CHECK(model.models[a]->noise_var == clean.models[a]->noise_var);
  }
}

TEST_CASE("too many unfitted ages fails the surface fit") {
  auto surface = gp_surface(4, 50, 3);
  surface.mask.row(0).setConstant(true);  // 25% > 10%
  CHECK_THROWS_AS(fit_surface(surface, quick_config()), SurfaceFitFailed);
}

TEST_CASE("age rows are fitted independently") {
  const auto full = gp_surface(5, 50, 4);
  const auto model_full = fit_surface(full, quick_config());

  // Deleting one age row leaves every other forecast bitwise unchanged.
  DemographicSurface reduced;
  reduced.kind = full.kind;
  reduced.years = full.years;
  for (int a = 0; a < 5; ++a) {
    if (a == 2) continue;
    reduced.ages.push_back(full.ages[a]);
  }
  reduced.values.resize(4, full.year_count());
  reduced.mask.resize(4, full.year_count());
  int r = 0;
  for (int a = 0; a < 5; ++a) {
    if (a == 2) continue;
    reduced.values.row(r) = full.values.row(a);
    reduced.mask.row(r) = full.mask.row(a);
    ++r;
  }
  const auto model_reduced = fit_surface(reduced, quick_config());

  const auto f_full = forecast_curve(model_full, full.years.back() + 10);
  const auto f_reduced = forecast_curve(model_reduced, full.years.back() + 10);
  r = 0;
  for (int a = 0; a < 5; ++a) {
    if (a == 2) continue;
    CHECK(f_full.mean(a) == f_reduced.mean(r));
    CHECK(f_full.lower(a) == f_reduced.lower(r));
    ++r;
  }
}

TEST_CASE("perturbing one age only moves that age's forecast") {
  const auto base = gp_surface(6, 50, 5);
  auto perturbed = base;
  perturbed.values.row(3).array() += 0.5;

  const auto model_a = fit_surface(base, quick_config());
  const auto model_b = fit_surface(perturbed, quick_config());
  const auto f_a = forecast_curve(model_a, base.years.back() + 5);
  const auto f_b = forecast_curve(model_b, base.years.back() + 5);

  for (int a = 0; a < 6; ++a) {
    if (a == 3) {
      CHECK(std::abs(f_a.mean(a) - f_b.mean(a)) > 0.0);
    } else {
      CHECK(f_a.mean(a) == f_b.mean(a));
    }
  }
}

TEST_CASE("forecast_curve output is ordered and bracketed") {
  const auto surface = gp_surface(4, 50, 6);
  const auto model = fit_surface(surface, quick_config());
  const auto curve = forecast_curve(model, surface.years.back() + 10);
  REQUIRE(curve.ages == surface.ages);
  for (int a = 0; a < 4; ++a) {
    CHECK(curve.lower(a) <= curve.mean(a));
    CHECK(curve.mean(a) <= curve.upper(a));
  }
}

TEST_CASE("forecast at the last training year tracks the observed column") {
  // constant surface: forecast must reproduce the constant
  DemographicSurface surface;
  surface.kind = SurfaceKind::kMortality;
  for (int a = 0; a < 3; ++a) surface.ages.push_back(a);
  for (int j = 0; j < 40; ++j) surface.years.push_back(1960 + j);
  surface.values.setConstant(3, 40, -4.0);
  surface.mask.setConstant(3, 40, false);

  const auto model = fit_surface(surface, quick_config(3));
  const auto curve = forecast_curve(model, 1999);
  for (int a = 0; a < 3; ++a) {
    CHECK(curve.mean(a) == doctest::Approx(-4.0).epsilon(1e-3));
  }
}

TEST_CASE("missing age in forecast range throws MissingAgeModel") {
  auto surface = gp_surface(12, 50, 9);
  surface.mask.row(7).setConstant(true);
  const auto model = fit_surface(surface, quick_config());
  CHECK_THROWS_AS(forecast_curve(model, surface.years.back() + 5),
                  MissingAgeModel);
}

TEST_CASE("interval widths grow with the horizon for an SE surface") {
  TrainingSet train;
  for (int j = 0; j < 50; ++j) {
    train.times.push_back(1950.0 + j);
    train.values.push_back(-3.0 + 0.3 * std::sin(0.2 * j));
  }
  GPModel model;
  model.mean = MeanModel::fit_ols(train.times, train.values,
                                  build_knots(train.times, 4));
  model.kernel = SquaredExponential{0.3, 8.0};
  model.noise_var = 0.01;
  model.training = train;
  model.chol = stabilized_cholesky(
      gram_matrix(model.kernel, train.times, model.noise_var));
  Eigen::VectorXd residual(train.size());
  for (int i = 0; i < train.size(); ++i) {
    residual(i) = train.values[i] - model.mean(train.times[i]);
  }
  model.alpha_vec =
      model.chol.transpose().triangularView<Eigen::Upper>().solve(
          model.chol.triangularView<Eigen::Lower>().solve(residual));

  double previous = 0.0;
  for (int h = 1; h <= 20; ++h) {
    const std::vector<double> at{1999.0 + h};
    const auto pred = predict(model, at);
    CHECK(pred.variance(0) >= previous - 1e-12);
    previous = pred.variance(0);
  }
}
