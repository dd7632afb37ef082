#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace demogp {

// Covariance families. All positive hyperparameters map to unconstrained
// optimizer coordinates through log/exp only.

struct SquaredExponential {
  double amplitude = 1.0;    // h
  double length_scale = 1.0; // l
};

struct Periodic {
  double amplitude = 1.0;
  double length_scale = 1.0;
  double period = 1.0;
};

struct RationalQuadratic {
  double amplitude = 1.0;
  double length_scale = 1.0;
  double shape = 1.0; // a
};

struct Matern32 {
  double amplitude = 1.0;
  double length_scale = 1.0;
};

struct Matern52 {
  double amplitude = 1.0;
  double length_scale = 1.0;
};

struct SpectralMixtureComponent {
  double weight = 1.0;        // w_q >= 0
  double spectral_mean = 0.1; // lambda_q >= 0, cycles per time unit
  double spectral_std = 0.1;  // nu_q > 0
};

struct SpectralMixture {
  std::vector<SpectralMixtureComponent> components;
};

using KernelSpec = std::variant<SquaredExponential, Periodic, RationalQuadratic,
                                Matern32, Matern52, SpectralMixture>;

enum class KernelFamily {
  kSquaredExponential,
  kPeriodic,
  kRationalQuadratic,
  kMatern32,
  kMatern52,
  kSpectralMixture,
};

KernelFamily kernel_family(const KernelSpec& spec);
std::string kernel_family_name(KernelFamily family);
std::string kernel_family_name(const KernelSpec& spec);
KernelFamily kernel_family_from_name(const std::string& name);

double kernel_eval(const KernelSpec& spec, double t, double t2);

int hyperparameter_count(const KernelSpec& spec);

// Round trip between a spec and its unconstrained (log) coordinates.
Eigen::VectorXd to_unconstrained(const KernelSpec& spec);
KernelSpec from_unconstrained(const KernelSpec& prototype,
                              const Eigen::VectorXd& theta);

// Gram matrix with entries k(t_i, t_j) + noise_var * delta(t_i == t_j).
// The Kronecker delta fires on equal time stamps, so duplicated times also
// pick up the noise term off the diagonal.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            std::span<const double> times, double noise_var);

// dK/d(log theta_j) for each unconstrained kernel hyperparameter, in the
// same order as to_unconstrained.
std::vector<Eigen::MatrixXd> gram_gradients(const KernelSpec& spec,
                                            std::span<const double> times);

}  // namespace demogp
