#pragma once

#include <iosfwd>

#include "demogp/demography.hpp"
#include "demogp/gp_core.hpp"

namespace demogp {

// Versioned JSON serialization of fitted models: knots, coefficients,
// kernel hyperparameters, noise variance, training data, and seed.

void write_model_json(std::ostream& out, const GPModel& model);
GPModel read_model_json(std::istream& in);

void write_surface_model_json(std::ostream& out, const SurfaceModel& model);
SurfaceModel read_surface_model_json(std::istream& in);

}  // namespace demogp
