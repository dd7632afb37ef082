#include "demogp/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace demogp {

namespace {

constexpr double kPi = std::numbers::pi;

double eval_tau(const SquaredExponential& k, double tau) {
  const double z = tau / k.length_scale;
  return k.amplitude * k.amplitude * std::exp(-0.5 * z * z);
}

double eval_tau(const Periodic& k, double tau) {
  const double s = std::sin(kPi * tau / k.period);
  return k.amplitude * k.amplitude *
         std::exp(-2.0 * s * s / (k.length_scale * k.length_scale));
}

double eval_tau(const RationalQuadratic& k, double tau) {
  const double base =
      1.0 + tau * tau / (2.0 * k.shape * k.length_scale * k.length_scale);
  return k.amplitude * k.amplitude * std::pow(base, -k.shape);
}

double eval_tau(const Matern32& k, double tau) {
  const double s = std::sqrt(3.0) * std::abs(tau) / k.length_scale;
  return k.amplitude * k.amplitude * (1.0 + s) * std::exp(-s);
}

double eval_tau(const Matern52& k, double tau) {
  const double s = std::sqrt(5.0) * std::abs(tau) / k.length_scale;
  return k.amplitude * k.amplitude * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double eval_tau(const SpectralMixture& k, double tau) {
  double sum = 0.0;
  for (const auto& c : k.components) {
    const double damp =
        std::exp(-2.0 * kPi * kPi * tau * tau * c.spectral_std * c.spectral_std);
    sum += c.weight * damp * std::cos(2.0 * kPi * tau * c.spectral_mean);
  }
  return sum;
}

// d k / d log(theta_j), same ordering as to_unconstrained.
void grad_tau(const SquaredExponential& k, double tau, double* out) {
  const double v = eval_tau(k, tau);
  const double z = tau / k.length_scale;
  out[0] = 2.0 * v;
  out[1] = v * z * z;
}

void grad_tau(const Periodic& k, double tau, double* out) {
  const double v = eval_tau(k, tau);
  const double l2 = k.length_scale * k.length_scale;
  const double u = kPi * tau / k.period;
  const double s = std::sin(u);
  out[0] = 2.0 * v;
  out[1] = 4.0 * v * s * s / l2;
  out[2] = 2.0 * v * std::sin(2.0 * u) * u / l2;
}

void grad_tau(const RationalQuadratic& k, double tau, double* out) {
  const double l2 = k.length_scale * k.length_scale;
  const double base = 1.0 + tau * tau / (2.0 * k.shape * l2);
  const double v = k.amplitude * k.amplitude * std::pow(base, -k.shape);
  out[0] = 2.0 * v;
  out[1] = v * tau * tau / (l2 * base);
  out[2] = v * (-k.shape * std::log(base) + tau * tau / (2.0 * l2 * base));
}

void grad_tau(const Matern32& k, double tau, double* out) {
  const double s = std::sqrt(3.0) * std::abs(tau) / k.length_scale;
  const double h2e = k.amplitude * k.amplitude * std::exp(-s);
  out[0] = 2.0 * h2e * (1.0 + s);
  out[1] = h2e * s * s;
}

void grad_tau(const Matern52& k, double tau, double* out) {
  const double s = std::sqrt(5.0) * std::abs(tau) / k.length_scale;
  const double h2e = k.amplitude * k.amplitude * std::exp(-s);
  out[0] = 2.0 * h2e * (1.0 + s + s * s / 3.0);
  out[1] = h2e * s * s * (1.0 + s) / 3.0;
}

void grad_tau(const SpectralMixture& k, double tau, double* out) {
  int j = 0;
  for (const auto& c : k.components) {
    const double damp =
        std::exp(-2.0 * kPi * kPi * tau * tau * c.spectral_std * c.spectral_std);
    const double phase = 2.0 * kPi * tau * c.spectral_mean;
    const double kq = c.weight * damp * std::cos(phase);
    out[j++] = kq;
    out[j++] = -c.weight * damp * std::sin(phase) * phase;
    out[j++] = -4.0 * kPi * kPi * tau * tau * c.spectral_std * c.spectral_std * kq;
  }
}

}  // namespace

KernelFamily kernel_family(const KernelSpec& spec) {
  return static_cast<KernelFamily>(spec.index());
}

std::string kernel_family_name(const KernelSpec& spec) {
  return kernel_family_name(kernel_family(spec));
}

std::string kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::kSquaredExponential: return "se";
    case KernelFamily::kPeriodic: return "periodic";
    case KernelFamily::kRationalQuadratic: return "rq";
    case KernelFamily::kMatern32: return "matern32";
    case KernelFamily::kMatern52: return "matern52";
    case KernelFamily::kSpectralMixture: return "sm";
  }
  throw std::logic_error("unknown kernel family");
}

KernelFamily kernel_family_from_name(const std::string& name) {
  if (name == "se") return KernelFamily::kSquaredExponential;
  if (name == "periodic") return KernelFamily::kPeriodic;
  if (name == "rq") return KernelFamily::kRationalQuadratic;
  if (name == "matern32") return KernelFamily::kMatern32;
  if (name == "matern52") return KernelFamily::kMatern52;
  if (name == "sm") return KernelFamily::kSpectralMixture;
  throw std::invalid_argument("unknown kernel family: " + name);
}

double kernel_eval(const KernelSpec& spec, double t, double t2) {
  return std::visit([&](const auto& k) { return eval_tau(k, t - t2); }, spec);
}

int hyperparameter_count(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> int {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Periodic> ||
                      std::is_same_v<T, RationalQuadratic>) {
          return 3;
        } else if constexpr (std::is_same_v<T, SpectralMixture>) {
          return 3 * static_cast<int>(k.components.size());
        } else {
          return 2;
        }
      },
      spec);
}

Eigen::VectorXd to_unconstrained(const KernelSpec& spec) {
  Eigen::VectorXd theta(hyperparameter_count(spec));
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SpectralMixture>) {
          int j = 0;
          for (const auto& c : k.components) {
            theta(j++) = std::log(c.weight);
            theta(j++) = std::log(c.spectral_mean);
            theta(j++) = std::log(c.spectral_std);
          }
        } else if constexpr (std::is_same_v<T, Periodic>) {
          theta << std::log(k.amplitude), std::log(k.length_scale),
              std::log(k.period);
        } else if constexpr (std::is_same_v<T, RationalQuadratic>) {
          theta << std::log(k.amplitude), std::log(k.length_scale),
              std::log(k.shape);
        } else {
          theta << std::log(k.amplitude), std::log(k.length_scale);
        }
      },
      spec);
  return theta;
}

KernelSpec from_unconstrained(const KernelSpec& prototype,
                              const Eigen::VectorXd& theta) {
  KernelSpec spec = prototype;
  std::visit(
      [&](auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SpectralMixture>) {
          int j = 0;
          for (auto& c : k.components) {
            c.weight = std::exp(theta(j++));
            c.spectral_mean = std::exp(theta(j++));
            c.spectral_std = std::exp(theta(j++));
          }
        } else if constexpr (std::is_same_v<T, Periodic>) {
          k.amplitude = std::exp(theta(0));
          k.length_scale = std::exp(theta(1));
          k.period = std::exp(theta(2));
        } else if constexpr (std::is_same_v<T, RationalQuadratic>) {
          k.amplitude = std::exp(theta(0));
          k.length_scale = std::exp(theta(1));
          k.shape = std::exp(theta(2));
        } else {
          k.amplitude = std::exp(theta(0));
          k.length_scale = std::exp(theta(1));
        }
      },
      spec);
  return spec;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            std::span<const double> times, double noise_var) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = kernel_eval(spec, times[i], times[j]);
      if (times[i] == times[j]) v += noise_var;
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

std::vector<Eigen::MatrixXd> gram_gradients(const KernelSpec& spec,
                                            std::span<const double> times) {
  const auto n = static_cast<Eigen::Index>(times.size());
  const int np = hyperparameter_count(spec);
  std::vector<Eigen::MatrixXd> grads(np, Eigen::MatrixXd(n, n));
  std::vector<double> buf(np);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      std::visit([&](const auto& k) { grad_tau(k, times[i] - times[j],
                                               buf.data()); },
                 spec);
      for (int p = 0; p < np; ++p) {
        grads[p](i, j) = buf[p];
        grads[p](j, i) = buf[p];
      }
    }
  }
  return grads;
}

}  // namespace demogp
