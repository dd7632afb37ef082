#include "demogp/serialize.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace demogp {

namespace {

using nlohmann::json;

json kernel_to_json(const KernelSpec& spec) {
  json j;
  j["family"] = kernel_family_name(spec);
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SpectralMixture>) {
          j["components"] = json::array();
          for (const auto& c : k.components) {
            j["components"].push_back({{"weight", c.weight},
                                       {"spectral_mean", c.spectral_mean},
                                       {"spectral_std", c.spectral_std}});
          }
        } else if constexpr (std::is_same_v<T, Periodic>) {
          j["amplitude"] = k.amplitude;
          j["length_scale"] = k.length_scale;
          j["period"] = k.period;
        } else if constexpr (std::is_same_v<T, RationalQuadratic>) {
          j["amplitude"] = k.amplitude;
          j["length_scale"] = k.length_scale;
          j["shape"] = k.shape;
        } else {
          j["amplitude"] = k.amplitude;
          j["length_scale"] = k.length_scale;
        }
      },
      spec);
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  const auto family = kernel_family_from_name(j.at("family"));
  const auto num = [&](const char* key) { return j.at(key).get<double>(); };
  switch (family) {
    case KernelFamily::kSquaredExponential:
      return SquaredExponential{num("amplitude"), num("length_scale")};
    case KernelFamily::kPeriodic:
      return Periodic{num("amplitude"), num("length_scale"), num("period")};
    case KernelFamily::kRationalQuadratic:
      return RationalQuadratic{num("amplitude"), num("length_scale"),
                               num("shape")};
    case KernelFamily::kMatern32:
      return Matern32{num("amplitude"), num("length_scale")};
    case KernelFamily::kMatern52:
      return Matern52{num("amplitude"), num("length_scale")};
    case KernelFamily::kSpectralMixture: {
      SpectralMixture sm;
      for (const auto& c : j.at("components")) {
        sm.components.push_back({c.at("weight").get<double>(),
                                 c.at("spectral_mean").get<double>(),
                                 c.at("spectral_std").get<double>()});
      }
      return sm;
    }
  }
  throw std::invalid_argument("bad kernel family");
}

json model_to_json(const GPModel& model) {
  json j;
  j["format"] = "demogp-model";
  j["version"] = 1;
  j["seed"] = model.seed;
  j["noise_var"] = model.noise_var;
  j["log_likelihood"] = model.log_likelihood;
  j["mean"] = {{"knots", model.mean.knots().knots},
               {"coefficients",
                std::vector<double>(model.mean.coefficients().begin(),
                                    model.mean.coefficients().end())}};
  j["kernel"] = kernel_to_json(model.kernel);
  j["training"] = {{"times", model.training.times},
                   {"values", model.training.values}};
  return j;
}

GPModel model_from_json(const json& j) {
  if (j.at("format") != "demogp-model" || j.at("version") != 1) {
    throw std::invalid_argument("unrecognized model format");
  }
  GPModel model;
  model.seed = j.at("seed");
  model.noise_var = j.at("noise_var");
  model.log_likelihood = j.at("log_likelihood");

  KnotVector knots;
  knots.knots = j.at("mean").at("knots").get<std::vector<double>>();
  const auto coef_vec =
      j.at("mean").at("coefficients").get<std::vector<double>>();
  model.mean = MeanModel::restore(
      knots, Eigen::Map<const Eigen::VectorXd>(coef_vec.data(),
                                               coef_vec.size()));
  model.kernel = kernel_from_json(j.at("kernel"));
  model.training.times = j.at("training").at("times").get<std::vector<double>>();
  model.training.values =
      j.at("training").at("values").get<std::vector<double>>();

  // Rebuild the cached factorization.
  const Eigen::Map<const Eigen::VectorXd> y(model.training.values.data(),
                                            model.training.size());
  Eigen::VectorXd residual(model.training.size());
  for (int i = 0; i < model.training.size(); ++i) {
    residual(i) = y(i) - model.mean(model.training.times[i]);
  }
  const Eigen::MatrixXd gram =
      gram_matrix(model.kernel, model.training.times, model.noise_var);
  model.chol = stabilized_cholesky(gram);
  model.alpha_vec =
      model.chol.transpose().triangularView<Eigen::Upper>().solve(
          model.chol.triangularView<Eigen::Lower>().solve(residual));
  return model;
}

json config_to_json(const FitConfig& c) {
  return {{"family", kernel_family_name(c.family)},
          {"mixtures", c.mixture_components},
          {"knots", c.knot_count},
          {"restarts", c.restarts},
          {"seed", c.seed},
          {"max_iterations", c.max_iterations}};
}

FitConfig config_from_json(const json& j) {
  FitConfig c;
  c.family = kernel_family_from_name(j.at("family"));
  c.mixture_components = j.at("mixtures");
  c.knot_count = j.at("knots");
  c.restarts = j.at("restarts");
  c.seed = j.at("seed");
  c.max_iterations = j.at("max_iterations");
  return c;
}

}  // namespace

void write_model_json(std::ostream& out, const GPModel& model) {
  out << model_to_json(model).dump(2) << '\n';
}

GPModel read_model_json(std::istream& in) {
  return model_from_json(json::parse(in));
}

void write_surface_model_json(std::ostream& out, const SurfaceModel& model) {
  json j;
  j["format"] = "demogp-surface";
  j["version"] = 1;
  j["kind"] = surface_kind_name(model.kind);
  j["config"] = config_to_json(model.config);
  j["ages"] = model.ages;
  j["failures"] = model.failures;
  j["models"] = json::array();
  for (const auto& m : model.models) {
    if (m.has_value()) {
      j["models"].push_back(model_to_json(*m));
    } else {
      j["models"].push_back(nullptr);
    }
  }
  out << j.dump(2) << '\n';
}

SurfaceModel read_surface_model_json(std::istream& in) {
  const json j = json::parse(in);
  if (j.at("format") != "demogp-surface" || j.at("version") != 1) {
    throw std::invalid_argument("unrecognized surface model format");
  }
  SurfaceModel model;
  model.kind = surface_kind_from_name(j.at("kind"));
  model.config = config_from_json(j.at("config"));
  model.ages = j.at("ages").get<std::vector<int>>();
  model.failures = j.at("failures").get<std::vector<std::string>>();
  for (const auto& mj : j.at("models")) {
    if (mj.is_null()) {
      model.models.emplace_back(std::nullopt);
    } else {
      model.models.emplace_back(model_from_json(mj));
    }
  }
  return model;
}

}  // namespace demogp
