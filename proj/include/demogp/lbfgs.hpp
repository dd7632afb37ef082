#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>

namespace demogp {

struct LbfgsOptions {
  int max_iterations = 200;
  int history = 8;
  double grad_tolerance = 1e-7;
  double f_tolerance = 1e-11;
  int max_line_search = 40;
  // Optional per-coordinate lower bounds (clamped after each accepted step);
  // -inf disables a bound.
  Eigen::VectorXd lower_bounds;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Minimizes f(x) given a value-and-gradient callback. The callback may throw
// to signal an infeasible point; the line search treats that as a rejected
// step.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

LbfgsResult lbfgs_minimize(const ObjectiveFn& objective,
                           const Eigen::VectorXd& x0,
                           const LbfgsOptions& options = {});

}  // namespace demogp
