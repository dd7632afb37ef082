#include "demogp/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <utility>

namespace demogp {

namespace {

void clamp_to_bounds(Eigen::VectorXd& x, const Eigen::VectorXd& lb) {
  if (lb.size() != x.size()) return;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < lb(i)) x(i) = lb(i);
  }
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& objective,
                           const Eigen::VectorXd& x0,
                           const LbfgsOptions& options) {
  const Eigen::Index d = x0.size();
  LbfgsResult result;
  result.x = x0;
  clamp_to_bounds(result.x, options.lower_bounds);

  Eigen::VectorXd grad(d);
  double f;
  try {
    f = objective(result.x, grad);
  } catch (...) {
    return result;
  }
  if (!finite(f) || !grad.allFinite()) return result;
  result.f = f;

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;  // (s, y)
  Eigen::VectorXd x = result.x;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (grad.norm() <= options.grad_tolerance * std::max(1.0, x.norm())) {
      result.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      const auto& [s, y] = memory[i];
      const double rho = 1.0 / y.dot(s);
      alpha[i] = rho * s.dot(q);
      q -= alpha[i] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const auto& [s, y] = memory[i];
      const double rho = 1.0 / y.dot(s);
      const double beta = rho * y.dot(q);
      q += (alpha[i] - beta) * s;
    }
    Eigen::VectorXd direction = -q;
    double dir_deriv = direction.dot(grad);
    if (dir_deriv >= 0.0) {  // not a descent direction; fall back to steepest
      direction = -grad;
      dir_deriv = -grad.squaredNorm();
      memory.clear();
    }

    // Backtracking Armijo line search.
    double step = memory.empty() ? std::min(1.0, 1.0 / grad.norm()) : 1.0;
    constexpr double kArmijo = 1e-4;
    Eigen::VectorXd x_new(d), grad_new(d);
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      x_new = x + step * direction;
      clamp_to_bounds(x_new, options.lower_bounds);
      bool ok = true;
      try {
        f_new = objective(x_new, grad_new);
      } catch (...) {
        ok = false;
      }
      if (ok && finite(f_new) && grad_new.allFinite() &&
          f_new <= f + kArmijo * step * dir_deriv) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double f_prev = f;
    x = x_new;
    f = f_new;
    grad = grad_new;
    result.x = x;
    result.f = f;
    result.iterations = iter + 1;

    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      if (static_cast<int>(memory.size()) > options.history) {
        memory.pop_front();
      }
    }
    if (std::abs(f_prev - f) <=
        options.f_tolerance * std::max({std::abs(f_prev), std::abs(f), 1.0})) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace demogp
