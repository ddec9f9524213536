// weave: lane-choice equilibrium at a highway weaving ramp.
//
//   weave solve run.ini
//   weave sweep run.ini --fixed-class enter --fixed-value 0.1667 --step 0.05
//   weave generate --coefficients baseline --preset calibration --out data.csv
//   weave ingest vehicles.csv --warmup 5000 --window 15000 --out data.csv
//   weave calibrate data.csv --out fitted.ini
//   weave validate fitted.ini data.csv --group-by n_enter
//   weave fr baseline.ini variant.ini
//
// Exit status: 0 ok, 1 domain error, 2 usage or parse error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "weave/calibration.hpp"
#include "weave/datagen.hpp"
#include "weave/equilibrium.hpp"
#include "weave/error.hpp"
#include "weave/io.hpp"
#include "weave/metrics.hpp"

namespace {

using namespace weave;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
  bool json = false;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  bool quiet = false;
};

// Writes to --out when given, stdout otherwise.
void emit(const GlobalFlags& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + g.out);
  f << text;
}

void note(const GlobalFlags& g, const std::string& text) {
  if (!g.quiet) std::cerr << text << '\n';
}

// "baseline" names the built-in calibrated set; anything else is a file.
CostCoefficients load_coefficients(const std::string& spec) {
  if (spec == "baseline") return baseline_coefficients();
  return io::read_coefficients(spec);
}

struct GridFlags {
  std::string fixed_class = "none";
  std::optional<double> fixed_value;
  std::optional<double> step;
  std::optional<double> free_min;
  std::optional<double> free_max;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--fixed-class", fixed_class, "Class held constant: enter, exit, lane2, none");
    cmd->add_option("--fixed-value", fixed_value, "Ratio of the fixed class");
    cmd->add_option("--step", step, "Lattice step of the free ratios");
    cmd->add_option("--free-min", free_min, "Lower bound on free ratios");
    cmd->add_option("--free-max", free_max, "Upper bound on free ratios");
  }

  // Flags win over [options] entries of the config file.
  ScenarioGrid resolve(const std::map<std::string, std::string>& options) const {
    ScenarioGrid grid;
    auto from_options = [&](const char* key, std::optional<double> flag, double& target) {
      if (flag) {
        target = *flag;
      } else if (auto it = options.find(key); it != options.end()) {
        try {
          target = std::stod(it->second);
        } catch (const std::exception&) {
          throw ParseError("[options]", 0, std::string("field options.") + key + " is not a number");
        }
      }
    };
    std::string cls = fixed_class;
    if (cls == "none") {
      if (auto it = options.find("fixed_class"); it != options.end()) cls = it->second;
    }
    const auto parsed = parse_flow_class(cls);
    if (!parsed) throw ParseError("--fixed-class", 0, "unknown flow class '" + cls + "'");
    grid.fixed_class = *parsed;
    from_options("fixed_value", fixed_value, grid.fixed_value);
    from_options("grid_step", step, grid.grid_step);
    from_options("free_min", free_min, grid.free_min);
    from_options("free_max", free_max, grid.free_max);
    return grid;
  }
};

int cmd_solve(const GlobalFlags& g, const std::string& path) {
  const auto cfg = io::read_config(path);
  const WeavingConfiguration weaving(io::require_flows(cfg), io::require_coefficients(cfg));
  const auto result = solve_equilibrium(weaving);
  emit(g, g.json ? io::to_json(weaving, result).dump(2) + "\n"
                 : io::format_solution(weaving, result));
  return kExitOk;
}

int cmd_sweep(const GlobalFlags& g, const std::string& path, const GridFlags& flags) {
  const auto cfg = io::read_config(path);
  const auto coeffs = io::require_coefficients(cfg);
  const auto configs = generate_grid(flags.resolve(cfg.options));

  std::ostringstream out;
  json rows = json::array();
  if (!g.json) out << "n_enter,n_exit,n2,x1_s,x1_b,case\n";
  for (const auto& flows : configs) {
    const WeavingConfiguration weaving(flows, coeffs);
    const auto r = solve_equilibrium(weaving);
    if (g.json) {
      rows.push_back(io::to_json(weaving, r));
    } else {
      out << io::format_sig(flows.n_enter(), 9) << ',' << io::format_sig(flows.n_exit(), 9) << ','
          << io::format_sig(flows.n2(), 9) << ',' << io::format_sig(r.distribution.x1_s(), 9)
          << ',' << io::format_sig(r.distribution.x1_b(), 9) << ',' << to_string(r.regime)
          << '\n';
    }
  }
  emit(g, g.json ? rows.dump(2) + "\n" : out.str());
  note(g, std::to_string(configs.size()) + " configurations");
  return kExitOk;
}

struct GenerateFlags {
  std::string coefficients = "baseline";
  std::string preset = "none";
  std::string oracle = "noise";
  double sigma = 0.0;
  int samples = 1;
  double sensitivity = 50.0;
  std::int64_t population = 500;
  int iterations = 200;
  GridFlags grid;
};

void write_dataset(const GlobalFlags& g, const Dataset& data) {
  if (g.json) {
    json points = json::array();
    for (const auto& p : data) {
      points.push_back({{"scenario_id", p.scenario_id},
                        {"n_enter", p.flows.n_enter()},
                        {"n_exit", p.flows.n_exit()},
                        {"n2", p.flows.n2()},
                        {"x1_s", p.observed.x1_s()},
                        {"x1_b", p.observed.x1_b()},
                        {"weight", p.weight}});
    }
    emit(g, json{{"points", points}}.dump(2) + "\n");
    return;
  }
  std::ostringstream out;
  io::write_dataset_csv(out, data);
  emit(g, out.str());
}

int cmd_generate(const GlobalFlags& g, const GenerateFlags& f) {
  const auto hidden = load_coefficients(f.coefficients);
  std::vector<FlowConfiguration> configs;
  if (f.preset == "calibration") {
    configs = generate_grids(calibration_grids());
  } else if (f.preset == "none") {
    configs = generate_grid(f.grid.resolve({}));
  } else {
    throw ParseError("--preset", 0, "unknown preset '" + f.preset + "'");
  }

  Dataset data;
  if (f.oracle == "noise") {
    data = synthesize_equilibrium_noise(configs, hidden, f.sigma, f.samples, g.seed);
  } else if (f.oracle == "logit") {
    auto r = synthesize_logit(configs, hidden, f.sensitivity, f.population, f.iterations, g.seed);
    for (const auto& w : r.warnings) note(g, "warning: " + w);
    data = std::move(r.data);
  } else {
    throw ParseError("--oracle", 0, "unknown oracle '" + f.oracle + "'");
  }
  write_dataset(g, data);
  note(g, std::to_string(data.size()) + " data points");
  return kExitOk;
}

int cmd_ingest(const GlobalFlags& g, const std::string& path, const IngestOptions& opts) {
  const auto r = ingest_vehicle_log(std::filesystem::path(path), opts);
  for (const auto& w : r.warnings) note(g, "warning: " + w);
  write_dataset(g, r.data);
  note(g, std::to_string(r.data.size()) + " scenarios, " + std::to_string(r.records_in_window) +
              " Through1 decisions in window");
  return kExitOk;
}

int cmd_calibrate(const GlobalFlags& g, const std::string& path, CalibrationOptions opts) {
  opts.seed = g.seed;
  const auto data = io::read_dataset(std::filesystem::path(path));
  const auto result = calibrate(data, opts);
  for (const auto& w : result.warnings) note(g, "warning: " + w);

  std::ostringstream file;
  io::write_coefficients(file, result.coeffs,
                         "calibrated on " + std::to_string(data.size()) +
                             " points, objective " + io::format_sig(result.objective, 6));
  if (g.json) {
    if (!g.out.empty()) emit(g, file.str());
    std::cout << io::to_json(result).dump(2) << '\n';
  } else {
    emit(g, file.str());
  }
  note(g, "objective " + io::format_sig(result.objective, 6) + " after " +
              std::to_string(result.iterations_used) + " iterations");
  return kExitOk;
}

int cmd_validate(const GlobalFlags& g, const std::string& coeffs_path, const std::string& data_path,
                 const std::string& group_by, const std::string& points_csv) {
  std::optional<GroupKey> key;
  if (!group_by.empty()) {
    key = parse_group_key(group_by);
    if (!key) throw ParseError("--group-by", 0, "unknown group key '" + group_by + "'");
  }
  const auto report = validate(load_coefficients(coeffs_path),
                               io::read_dataset(std::filesystem::path(data_path)), key);
  emit(g, g.json ? io::to_json(report).dump(2) + "\n" : io::format_report(report));
  if (!points_csv.empty()) {
    std::ofstream f(points_csv);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + points_csv);
    io::write_validation_csv(f, report);
  }
  return kExitOk;
}

int cmd_fr(const GlobalFlags& g, const std::string& baseline, const std::string& variant,
           double threshold, bool unit_costs) {
  const auto report = fluctuating_rate(load_coefficients(baseline), load_coefficients(variant),
                                       threshold, unit_costs);
  emit(g, g.json ? io::to_json(report).dump(2) + "\n" : io::format_report(report));
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::MissingHeader:
    case ErrorCode::IoError:
      return kExitUsage;
    default:
      return kExitDomain;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lane-choice equilibrium, calibration and validation for highway weaving ramps"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output path (default stdout)");
  app.add_flag("--quiet", g.quiet, "Suppress progress notes on stderr");

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "Solve one weaving configuration");
  solve->add_option("config", config_path, "INI config with [flows] and [coefficients]")
      ->required()
      ->check(CLI::ExistingFile);

  GridFlags sweep_grid;
  auto* sweep = app.add_subcommand("sweep", "Solve every point of a flow grid (CSV)");
  sweep->add_option("config", config_path, "INI config with [coefficients]")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_grid.add_to(sweep);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Synthesize a dataset from hidden coefficients");
  generate->add_option("--coefficients", gen.coefficients,
                       "Coefficients file, or 'baseline' for the built-in set")
      ->capture_default_str();
  generate->add_option("--preset", gen.preset, "Grid preset: calibration (415 points) or none")
      ->capture_default_str();
  generate->add_option("--oracle", gen.oracle, "noise or logit")->capture_default_str();
  generate->add_option("--sigma", gen.sigma, "Gaussian noise on x1_s")->capture_default_str();
  generate->add_option("--samples", gen.samples, "Samples per configuration")->capture_default_str();
  generate->add_option("--sensitivity", gen.sensitivity, "Logit sensitivity")
      ->capture_default_str();
  generate->add_option("--population", gen.population, "Vehicles sampled per configuration")
      ->capture_default_str();
  generate->add_option("--iterations", gen.iterations, "Logit fixed-point iterations")
      ->capture_default_str();
  gen.grid.add_to(generate);

  std::string log_path;
  IngestOptions ingest_opts;
  auto* ingest = app.add_subcommand("ingest", "Aggregate a per-vehicle decision log");
  ingest->add_option("log", log_path, "Vehicle log CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("--warmup", ingest_opts.warmup_steps, "Steps discarded before counting")
      ->capture_default_str();
  ingest->add_option("--window", ingest_opts.window_steps, "Steps counted after warmup")
      ->capture_default_str();

  std::string data_path;
  CalibrationOptions cal_opts;
  bool free_unit_costs = false;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit coefficients to a dataset");
  calibrate_cmd->add_option("data", data_path, "Dataset CSV or JSON")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate_cmd->add_option("--restarts", cal_opts.restarts)->capture_default_str();
  calibrate_cmd->add_option("--max-iterations", cal_opts.max_iterations)->capture_default_str();
  calibrate_cmd->add_option("--tolerance", cal_opts.tolerance)->capture_default_str();
  calibrate_cmd->add_option("--lower", cal_opts.weight_lower_bound, "Weight lower bound")
      ->capture_default_str();
  calibrate_cmd->add_option("--upper", cal_opts.weight_upper_bound, "Weight upper bound")
      ->capture_default_str();
  calibrate_cmd->add_flag("--free-unit-costs", free_unit_costs,
                          "Also fit C2t, C1m, C2m (C1t stays 1)");

  std::string coeffs_path;
  std::string group_by;
  std::string points_csv;
  auto* validate_cmd = app.add_subcommand("validate", "MPER of coefficients on a dataset");
  validate_cmd->add_option("coefficients", coeffs_path, "Coefficients file or 'baseline'")
      ->required();
  validate_cmd->add_option("data", data_path, "Dataset CSV or JSON")
      ->required()
      ->check(CLI::ExistingFile);
  validate_cmd->add_option("--group-by", group_by, "scenario_id, n_enter, n_exit or n2");
  validate_cmd->add_option("--points-csv", points_csv, "Write per-point rows here");

  std::string baseline_path;
  std::string variant_path;
  double threshold = kSignificantFr;
  bool fr_unit_costs = false;
  auto* fr = app.add_subcommand("fr", "Fluctuating rate of a variant against a baseline");
  fr->add_option("baseline", baseline_path, "Coefficients file or 'baseline'")->required();
  fr->add_option("variant", variant_path, "Coefficients file or 'baseline'")->required();
  fr->add_option("--threshold", threshold, "Significance threshold in percent")
      ->capture_default_str();
  fr->add_flag("--unit-costs", fr_unit_costs, "Include the four unit costs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(g, config_path);
    if (*sweep) return cmd_sweep(g, config_path, sweep_grid);
    if (*generate) return cmd_generate(g, gen);
    if (*ingest) return cmd_ingest(g, log_path, ingest_opts);
    if (*calibrate_cmd) {
      cal_opts.fixed_unit_costs = !free_unit_costs;
      return cmd_calibrate(g, data_path, cal_opts);
    }
    if (*validate_cmd) return cmd_validate(g, coeffs_path, data_path, group_by, points_csv);
    if (*fr) return cmd_fr(g, baseline_path, variant_path, threshold, fr_unit_costs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}
