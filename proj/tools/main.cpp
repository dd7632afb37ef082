#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "demogp/data_io.hpp"
#include "demogp/demography.hpp"
#include "demogp/evaluation.hpp"
#include "demogp/serialize.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using namespace demogp;

namespace {

// Exit codes: 0 success, 1 model/numeric failure, 2 usage/IO.
constexpr int kExitModel = 1;
constexpr int kExitUsage = 2;

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string model_file;
  std::string kind = "mortality";
  std::string format = "canonical";
  std::string column;
  std::vector<std::string> models{"gpr", "lc"};
  std::string family = "sm";
  int knots = 4;
  int mixtures = 2;
  int restarts = 10;
  std::uint64_t seed = 0;
  int train_end = 0;  // 0 = use everything
  std::vector<int> years;
  std::vector<int> horizons{5, 10, 15, 20};
  int windows = 10;
  std::string out_dir = ".";
  bool svg = false;
  bool json_logs = false;
  bool no_truncate = false;
};

void log_line(const Options& opts, const std::string& level,
              const std::string& message) {
  if (opts.json_logs) {
    nlohmann::json entry{{"level", level}, {"msg", message}};
    std::cerr << entry.dump() << '\n';
  } else {
    std::cerr << "[" << level << "] " << message << '\n';
  }
}

// temp file + rename so interrupted runs never leave partial outputs
void write_atomic(const fs::path& path,
                  const std::function<void(std::ostream&)>& emit) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoFailure("cannot open " + tmp.string() + " for writing");
    emit(out);
    if (!out) throw IoFailure("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

FitConfig make_config(const Options& opts) {
  FitConfig config;
  config.family = kernel_family_from_name(opts.family);
  config.knot_count = opts.knots;
  config.mixture_components = opts.mixtures;
  config.restarts = opts.restarts;
  config.seed = opts.seed;
  return config;
}

DemographicSurface load_log_surface(const Options& opts) {
  std::ifstream in(opts.input);
  if (!in) throw IoFailure("cannot open input file: " + opts.input);
  const SurfaceKind kind = surface_kind_from_name(opts.kind);
  const RateFormat format = opts.format == "hmd" ? RateFormat::kHmdStyle
                                                 : RateFormat::kCanonicalCsv;
  DemographicSurface surface = parse_rates(in, format, opts.column, kind);
  if (!opts.no_truncate) surface = truncate_ages(surface, kind);
  return log_transform(surface);
}

SurfaceModel obtain_surface_model(const Options& opts) {
  if (!opts.model_file.empty()) {
    std::ifstream in(opts.model_file);
    if (!in) throw IoFailure("cannot open model file: " + opts.model_file);
    return read_surface_model_json(in);
  }
  if (opts.input.empty()) {
    throw IoFailure("either --input or --model-file is required");
  }
  DemographicSurface surface = load_log_surface(opts);
  if (opts.train_end > 0) surface = restrict_years(surface, opts.train_end);
  log_line(opts, "info",
           "fitting " + std::to_string(surface.age_count()) + " ages on " +
               std::to_string(surface.year_count()) + " years");
  return fit_surface(surface, make_config(opts));
}

int cmd_fit(const Options& opts) {
  DemographicSurface surface = load_log_surface(opts);
  if (opts.train_end > 0) surface = restrict_years(surface, opts.train_end);
  log_line(opts, "info",
           "fitting " + std::to_string(surface.age_count()) + " ages on " +
               std::to_string(surface.year_count()) + " years");
  const SurfaceModel model = fit_surface(surface, make_config(opts));

  fs::create_directories(opts.out_dir);
  write_atomic(fs::path(opts.out_dir) / "surface_model.json",
               [&](std::ostream& out) { write_surface_model_json(out, model); });
  write_atomic(fs::path(opts.out_dir) / "fit_summary.csv",
               [&](std::ostream& out) {
                 out << "age,points,log_likelihood,noise_sd,kernel,status\n";
                 for (std::size_t i = 0; i < model.ages.size(); ++i) {
                   out << model.ages[i] << ',';
                   if (model.models[i]) {
                     const GPModel& gp = *model.models[i];
                     out << gp.training.size() << ',' << gp.log_likelihood
                         << ',' << std::sqrt(gp.noise_var) << ','
                         << kernel_family_name(gp.kernel) << ",ok\n";
                   } else {
                     out << "0,,,," << model.failures[i] << '\n';
                   }
                 }
               });
  log_line(opts, "info",
           "fitted " + std::to_string(model.fitted_count()) + "/" +
               std::to_string(model.ages.size()) + " ages");
  return 0;
}

int cmd_forecast(const Options& opts) {
  if (opts.years.empty()) {
    throw CLI::ValidationError("--year is required for forecast");
  }
  const SurfaceModel model = obtain_surface_model(opts);

  // observed reference curve for the plot: last training year of age 0's model
  std::vector<double> observed;
  int observed_year = 0;
  if (opts.svg) {
    observed_year = std::numeric_limits<int>::min();
    for (const auto& gp : model.models) {
      if (gp) {
        observed_year = std::max(
            observed_year, static_cast<int>(std::lround(gp->training.times.back())));
      }
    }
    for (const auto& gp : model.models) {
      double value = std::numeric_limits<double>::quiet_NaN();
      if (gp && std::lround(gp->training.times.back()) == observed_year) {
        value = gp->training.values.back();
      }
      observed.push_back(value);
    }
  }

  fs::create_directories(opts.out_dir);
  for (int year : opts.years) {
    const CurveForecast curve = forecast_curve(model, year);
    const std::string stem = "forecast_" + std::to_string(year);
    write_atomic(fs::path(opts.out_dir) / (stem + ".csv"),
                 [&](std::ostream& out) {
                   out.precision(10);
                   out << "age,mean,lower95,upper95\n";
                   for (std::size_t i = 0; i < curve.ages.size(); ++i) {
                     out << curve.ages[i] << ',' << curve.mean(i) << ','
                         << curve.lower(i) << ',' << curve.upper(i) << '\n';
                   }
                 });
    if (opts.svg) {
      tools::ForecastPlot plot;
      plot.ages = curve.ages;
      plot.mean = curve.mean;
      plot.lower = curve.lower;
      plot.upper = curve.upper;
      plot.observed = observed;
      plot.observed_year = observed_year;
      plot.target_year = year;
      write_atomic(fs::path(opts.out_dir) / (stem + ".svg"),
                   [&](std::ostream& out) { tools::write_forecast_svg(out, plot); });
    }
    log_line(opts, "info", "wrote " + stem + ".csv");
  }
  return 0;
}

int cmd_evaluate(const Options& opts) {
  const DemographicSurface surface = load_log_surface(opts);
  if (opts.horizons.empty()) {
    throw CLI::ValidationError("--horizons must be non-empty");
  }
  int t_m = opts.train_end;
  if (t_m <= 0) {
    // deepest window's longest horizon lands on the last observed year
    const int max_h = *std::max_element(opts.horizons.begin(),
                                        opts.horizons.end());
    t_m = surface.years.back() - max_h - (opts.windows - 1);
    log_line(opts, "info", "using t_m = " + std::to_string(t_m));
  }

  const GprForecaster gpr(make_config(opts));
  const LcForecaster lc;
  std::vector<const CurveForecaster*> forecasters;
  for (const std::string& id : opts.models) {
    if (id == "gpr") {
      forecasters.push_back(&gpr);
    } else if (id == "lc") {
      forecasters.push_back(&lc);
    } else {
      throw CLI::ValidationError("unknown model id: " + id);
    }
  }

  const std::string dataset = fs::path(opts.input).stem().string();
  const EvaluationReport report = rolling_window_evaluate(
      surface, forecasters, opts.horizons, opts.windows, t_m, dataset);

  fs::create_directories(opts.out_dir);
  write_atomic(fs::path(opts.out_dir) / "evaluation.csv",
               [&](std::ostream& out) { write_report_csv(out, report); });
  std::cout << format_report_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-specific demographic rate forecasting with per-age "
               "Gaussian processes and a Lee-Carter baseline"};
  app.require_subcommand(1);
  Options opts;

  const auto add_common = [&](CLI::App* cmd, bool needs_input) {
    auto* input = cmd->add_option("--input", opts.input, "rate CSV path");
    if (needs_input) input->required();
    cmd->add_option("--kind", opts.kind, "mortality|fertility")
        ->check(CLI::IsMember({"mortality", "fertility"}));
    cmd->add_option("--format", opts.format, "canonical|hmd")
        ->check(CLI::IsMember({"canonical", "hmd"}));
    cmd->add_option("--column", opts.column, "rate column name (hmd format)");
    cmd->add_option("--kernel", opts.family,
                    "se|periodic|rq|matern32|matern52|sm");
    cmd->add_option("--knots", opts.knots, "spline knot count K")
        ->check(CLI::Range(2, 64));
    cmd->add_option("--mixtures", opts.mixtures, "spectral mixture components")
        ->check(CLI::Range(1, 16));
    cmd->add_option("--restarts", opts.restarts, "optimizer restarts")
        ->check(CLI::Range(1, 1000));
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--train-end", opts.train_end,
                    "last training year (evaluate: t_m)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_flag("--no-truncate", opts.no_truncate,
                  "skip the kind-specific age truncation");
    cmd->add_flag("--json-logs", opts.json_logs, "JSON log lines on stderr");
  };

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit per-age GP models");
  add_common(fit_cmd, true);

  CLI::App* forecast_cmd =
      app.add_subcommand("forecast", "forecast curves for target years");
  add_common(forecast_cmd, false);
  forecast_cmd->add_option("--model-file", opts.model_file,
                           "previously fitted surface_model.json");
  forecast_cmd->add_option("--year", opts.years, "target year(s)")
      ->delimiter(',')
      ->required();
  forecast_cmd->add_flag("--svg", opts.svg, "emit an SVG chart per year");

  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "rolling-window RMSE comparison");
  add_common(evaluate_cmd, true);
  evaluate_cmd->add_option("--model", opts.models, "model ids (gpr,lc)")
      ->delimiter(',');
  evaluate_cmd->add_option("--horizons", opts.horizons, "forecast horizons")
      ->delimiter(',');
  evaluate_cmd->add_option("--windows", opts.windows, "rolling window count")
      ->check(CLI::Range(1, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(opts);
    if (forecast_cmd->parsed()) return cmd_forecast(opts);
    return cmd_evaluate(opts);
  } catch (const CLI::ValidationError& e) {
    log_line(opts, "error", e.what());
    return kExitUsage;
  } catch (const IoFailure& e) {
    log_line(opts, "error", e.what());
    return kExitUsage;
  } catch (const ParseError& e) {
    log_line(opts, "error", e.what());
    return kExitUsage;
  } catch (const DuplicateCell& e) {
    log_line(opts, "error", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log_line(opts, "error", e.what());
    return kExitModel;
  }
}
