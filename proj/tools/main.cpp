#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaiot/io.hpp"
#include "metaiot/pipeline.hpp"
#include "metaiot/rng.hpp"

namespace {

using namespace metaiot;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  std::optional<int> threads;
};

RunConfig resolve_config(const GlobalOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? default_run_config()
                                           : load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.mode) cfg.mode = parse_error_prob_mode(*opts.mode);
  if (opts.threads) cfg.threads = *opts.threads;
  cfg.validate();
  return cfg;
}

StructureVector parse_structure(const std::string& text) {
  StructureVector d;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) d.push_back(std::stod(cell));
  if (d.empty()) throw ConfigError("empty structure vector");
  return d;
}

void print_structure(const StructureVector& d) {
  std::cout << "structure_mm:";
  for (double g : d) std::cout << ' ' << format_double(g);
  std::cout << '\n';
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Passive meta-material sensor co-design: reflection-spectrum "
               "simulation, structure optimization, dataset synthesis, and "
               "sensing-function training"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path,
                 "JSON run configuration (omit to use the built-in defaults)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override the master seed");
  std::string out_value;
  auto* out_opt = app.add_option("--out", out_value, "override the output directory");
  std::string mode_value;
  auto* mode_opt =
      app.add_option("--mode", mode_value, "error-probability mode: paper|ml")
          ->check(CLI::IsMember({"paper", "ml"}));
  int threads_value = 1;
  auto* threads_opt =
      app.add_option("--threads", threads_value, "worker threads for parallel stages");

  auto* codesign = app.add_subcommand(
      "codesign", "optimize the structure, synthesize data, train, evaluate");

  auto* optimize = app.add_subcommand(
      "optimize-structure", "minimize the neighbor-confusion objective over gap widths");

  auto* gen = app.add_subcommand("gen-dataset",
                                 "simulate noisy received-power measurements");
  std::string gen_structure;
  gen->add_option("--structure", gen_structure,
                  "gap widths in mm, comma separated (e.g. 2.05,1.22)")
      ->required();
  std::string dump_tau_path;
  gen->add_option("--dump-tau", dump_tau_path,
                  "also write the noise-free expected spectra to this CSV");

  auto* train_cmd = app.add_subcommand("train", "train the sensing function");
  std::string train_data;
  train_cmd->add_option("--data", train_data,
                        "training dataset CSV (default <out>/dataset.csv)");

  auto* evaluate = app.add_subcommand("evaluate", "compute RMSE of a model on a dataset");
  std::string eval_model, eval_data;
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--data", eval_data, "dataset CSV")->required();

  auto* sweep_cmd =
      app.add_subcommand("sweep", "RMSE versus transmit power or distance");
  std::string axis = "power";
  sweep_cmd->add_option("--axis", axis, "sweep axis")
      ->check(CLI::IsMember({"power", "distance"}));
  bool retrain = false;
  sweep_cmd->add_flag("--retrain-per-point", retrain,
                      "retrain the sensing function at every sweep point");

  auto* infer_cmd =
      app.add_subcommand("infer", "estimate conditions from received power spectra");
  std::string infer_model, infer_input, infer_values;
  infer_cmd->add_option("--model", infer_model, "model file")->required();
  auto* input_opt = infer_cmd->add_option("--input", infer_input,
                                          "CSV with p_*_db columns, one row per spectrum");
  auto* values_opt = infer_cmd->add_option(
      "--values", infer_values, "one spectrum as comma-separated dB values");
  input_opt->excludes(values_opt);

  auto* init_cfg = app.add_subcommand("init-config", "write the default config JSON");
  std::string init_path = "config.json";
  init_cfg->add_option("--path", init_path, "destination file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  }

  if (seed_opt->count() > 0) opts.seed = seed_value;
  if (out_opt->count() > 0) opts.out_dir = out_value;
  if (mode_opt->count() > 0) opts.mode = mode_value;
  if (threads_opt->count() > 0) opts.threads = threads_value;

  if (init_cfg->parsed()) {
    std::ofstream out(init_path);
    if (!out) throw ConfigError("cannot write " + init_path);
    out << default_config_json();
    std::cout << "wrote " << init_path << '\n';
    return 0;
  }

  const RunConfig cfg = resolve_config(opts);

  if (codesign->parsed()) {
    const RunManifest manifest = run_codesign(cfg);
    print_structure(manifest.structure_mm);
    std::cout << "objective: " << format_double(manifest.indiscernibility) << '\n';
    std::cout << "rmse_train: " << format_double(manifest.rmse_train) << '\n';
    std::cout << "rmse_holdout: " << format_double(manifest.rmse_holdout) << '\n';
    std::cout << "artifacts in " << cfg.out_dir << '\n';
    return 0;
  }

  if (optimize->parsed()) {
    const auto result = optimize_structure(cfg);
    print_structure(result.best);
    std::cout << "objective: " << format_double(result.best_value) << '\n';
    std::cout << "trace: " << cfg.out_dir << "/trace.csv\n";
    return 0;
  }

  if (gen->parsed()) {
    const StructureVector d = parse_structure(gen_structure);
    const ConditionGrid grid = cfg.condition_grid();
    const Dataset ds =
        generate_dataset(cfg.system, grid, d, cfg.dataset.measurements_per_condition,
                         mix_seed(cfg.seed, seed_tag("dataset")), cfg.threads);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/dataset.csv";
    write_dataset_csv(ds, path);
    std::cout << "wrote " << path << " (" << ds.records.size() << " records)\n";
    if (!dump_tau_path.empty()) {
      write_tau_csv(cfg.system, grid, d, dump_tau_path);
      std::cout << "wrote " << dump_tau_path << '\n';
    }
    return 0;
  }

  if (train_cmd->parsed()) {
    const std::string path =
        train_data.empty() ? cfg.out_dir + "/dataset.csv" : train_data;
    const Dataset ds = load_dataset_csv(path);
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.seed, seed_tag("train"));
    const ConditionGrid grid = cfg.condition_grid();
    const auto [lo, hi] = grid.value_ranges();
    const TrainResult result = train(ds, tc, lo, hi, cfg.condition_units());
    std::filesystem::create_directories(cfg.out_dir);
    save_model(result.model, cfg.out_dir + "/model.txt");
    write_history_csv(result.train_rmse_history, result.val_rmse_history,
                      cfg.out_dir + "/history.csv");
    std::cout << "best rmse: " << format_double(result.best_rmse) << " (epoch "
              << result.best_epoch << ")\n";
    std::cout << "wrote " << cfg.out_dir << "/model.txt\n";
    return 0;
  }

  if (evaluate->parsed()) {
    const SensingModel model = load_model(eval_model);
    const Dataset ds = load_dataset_csv(eval_data);
    std::cout << "rmse: " << format_double(rmse(model, ds)) << '\n';
    return 0;
  }

  if (sweep_cmd->parsed()) {
    RunConfig sweep_cfg = cfg;
    if (retrain) sweep_cfg.sweep.retrain_per_point = true;
    const auto rows = run_sweep(sweep_cfg, parse_sweep_axis(axis));
    for (const auto& row : rows) {
      std::cout << format_double(row.axis_value) << ',' << row.case_name << ','
                << format_double(row.rmse) << '\n';
    }
    return 0;
  }

  if (infer_cmd->parsed()) {
    const SensingModel model = load_model(infer_model);
    std::vector<ReceivedPowerVector> spectra;
    if (values_opt->count() > 0) {
      spectra.push_back(parse_structure(infer_values));
    } else if (input_opt->count() > 0) {
      spectra = load_power_vectors_csv(infer_input);
    } else {
      throw ConfigError("infer needs --input or --values");
    }
    std::cout << "# units:";
    for (int k = 0; k < model.n_out; ++k) {
      const std::string& unit =
          static_cast<std::size_t>(k) < model.target_units.size()
              ? model.target_units[static_cast<std::size_t>(k)]
              : std::string();
      std::cout << ' ' << (unit.empty() ? "-" : unit);
    }
    std::cout << '\n';
    for (int k = 1; k <= model.n_out; ++k) {
      std::cout << "cond_" << k << (k == model.n_out ? '\n' : ',');
    }
    for (const auto& p : spectra) {
      const ConditionVector estimate = forward(model, p);
      for (std::size_t k = 0; k < estimate.size(); ++k) {
        std::cout << format_double(estimate[k])
                  << (k + 1 == estimate.size() ? '\n' : ',');
      }
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
