#include "metaiot/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

#include "metaiot/io.hpp"
#include "metaiot/parallel.hpp"
#include "metaiot/rng.hpp"

namespace metaiot {

namespace {

namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

/// Rethrows any stage failure with the stage name attached so a run aborts
/// with a usable message while earlier artifacts stay on disk.
template <typename Fn>
auto run_stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error(std::string("stage ") + name + ": " + e.what());
  }
}

Objective indiscernibility_objective(const RunConfig& cfg, const ConditionGrid& grid) {
  return [&cfg, grid](const StructureVector& d) {
    return indiscernibility_en(cfg.system, grid, d, cfg.mode, cfg.threads).value;
  };
}

std::vector<StructureVector> capped_grid(const std::vector<StructureVector>& grid,
                                         int limit) {
  if (limit <= 0 || static_cast<std::size_t>(limit) >= grid.size()) return grid;
  std::vector<StructureVector> subset;
  subset.reserve(static_cast<std::size_t>(limit));
  if (limit == 1) {
    subset.push_back(grid[grid.size() / 2]);
    return subset;
  }
  // Evenly strided deterministic subsample.
  for (int i = 0; i < limit; ++i) {
    const std::size_t index = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(grid.size() - 1) /
                     static_cast<double>(limit - 1)));
    subset.push_back(grid[index]);
  }
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  return subset;
}

struct TrainedCase {
  SensingModel model;
};

/// Trains one model per distinct structure with shared data/init seeds, so
/// equal structures produce bit-identical models.
std::map<StructureVector, SensingModel> train_per_structure(
    const RunConfig& cfg, const SystemModel& system, const ConditionGrid& grid,
    const std::vector<StructureVector>& structures, std::uint64_t data_seed,
    std::uint64_t init_seed) {
  std::vector<StructureVector> unique_structures = structures;
  std::sort(unique_structures.begin(), unique_structures.end());
  unique_structures.erase(
      std::unique(unique_structures.begin(), unique_structures.end()),
      unique_structures.end());

  const auto [lo, hi] = grid.value_ranges();
  const auto units = cfg.condition_units();
  TrainConfig tc = cfg.train;
  tc.seed = init_seed;

  std::vector<SensingModel> models(unique_structures.size());
  parallel_for(unique_structures.size(), cfg.threads, [&](std::size_t i) {
    const Dataset ds = generate_dataset(system, grid, unique_structures[i],
                                        cfg.dataset.measurements_per_condition,
                                        data_seed, 1);
    models[i] = train(ds, tc, lo, hi, units).model;
  });

  std::map<StructureVector, SensingModel> out;
  for (std::size_t i = 0; i < unique_structures.size(); ++i) {
    out.emplace(unique_structures[i], std::move(models[i]));
  }
  return out;
}

}  // namespace

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "power") return SweepAxis::Power;
  if (name == "distance") return SweepAxis::Distance;
  throw ConfigError("unknown sweep axis: " + name + " (use power|distance)");
}

OptimizationResult optimize_structure(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = ensure_out_dir(cfg);
  const ConditionGrid grid = cfg.condition_grid();

  SurrogateConfig sc = cfg.surrogate;
  if (cfg.seed_integer_grid) sc.seed_points = cfg.space.integer_grid();

  const auto result =
      surrogate_optimize(indiscernibility_objective(cfg, grid), cfg.space, sc,
                         mix_seed(cfg.seed, seed_tag("structopt")));
  write_trace_csv(result.trace, (dir / "trace.csv").string());
  return result;
}

RunManifest run_codesign(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = ensure_out_dir(cfg);
  const ConditionGrid grid = cfg.condition_grid();

  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.config_hash = config_hash(cfg);
  manifest.seed = cfg.seed;
  manifest.mode = error_prob_mode_name(cfg.mode);
  manifest.created_utc = utc_now();

  const auto optimization =
      run_stage("optimize-structure", [&] { return optimize_structure(cfg); });
  manifest.structure_mm = optimization.best;
  manifest.indiscernibility = optimization.best_value;

  const Dataset ds = run_stage("gen-dataset", [&] {
    Dataset out = generate_dataset(cfg.system, grid, optimization.best,
                                   cfg.dataset.measurements_per_condition,
                                   mix_seed(cfg.seed, seed_tag("dataset")), cfg.threads);
    write_dataset_csv(out, (dir / "dataset.csv").string());
    return out;
  });
  const Dataset holdout = run_stage("gen-dataset", [&] {
    Dataset out = generate_dataset(cfg.system, grid, optimization.best,
                                   cfg.dataset.measurements_per_condition,
                                   mix_seed(cfg.seed, seed_tag("holdout")), cfg.threads);
    write_dataset_csv(out, (dir / "holdout.csv").string());
    return out;
  });

  const TrainResult trained = run_stage("train", [&] {
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.seed, seed_tag("train"));
    const auto [lo, hi] = grid.value_ranges();
    TrainResult result = train(ds, tc, lo, hi, cfg.condition_units());
    save_model(result.model, (dir / "model.txt").string());
    write_history_csv(result.train_rmse_history, result.val_rmse_history,
                      (dir / "history.csv").string());
    return result;
  });
  manifest.best_epoch = trained.best_epoch;

  run_stage("evaluate", [&] {
    manifest.rmse_train = rmse(trained.model, ds);
    manifest.rmse_holdout = rmse(trained.model, holdout);
    return 0;
  });

  for (const char* name :
       {"trace.csv", "dataset.csv", "holdout.csv", "model.txt", "history.csv"}) {
    manifest.artifacts.push_back(
        {name, name, file_checksum((dir / name).string())});
  }
  manifest.completed_utc = utc_now();
  save_manifest(manifest, (dir / "manifest.json").string());
  return manifest;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, SweepAxis axis) {
  cfg.validate();
  const fs::path dir = ensure_out_dir(cfg);
  const ConditionGrid grid = cfg.condition_grid();
  const std::vector<double>& values = axis == SweepAxis::Power
                                          ? cfg.sweep.power_values_w
                                          : cfg.sweep.distance_values_m;
  if (values.empty()) {
    throw ConfigError("sweep requires a non-empty value list for the chosen axis");
  }

  // The three structure cases under comparison.
  const auto optimization =
      run_stage("optimize-structure", [&] { return optimize_structure(cfg); });
  const auto integer_grid = cfg.space.integer_grid();
  const auto nominal_objective = indiscernibility_objective(cfg, grid);
  const auto grid_best =
      run_stage("grid-search", [&] { return grid_search(nominal_objective, integer_grid); });
  const auto averaged = capped_grid(integer_grid, cfg.sweep.grid_average_limit);

  std::vector<StructureVector> all_structures{optimization.best, grid_best.best};
  all_structures.insert(all_structures.end(), averaged.begin(), averaged.end());

  const std::uint64_t axis_tag =
      axis == SweepAxis::Power ? seed_tag("sweep-power") : seed_tag("sweep-distance");
  const std::uint64_t base = mix_seed(cfg.seed, axis_tag);

  std::map<StructureVector, SensingModel> nominal_models;
  if (!cfg.sweep.retrain_per_point) {
    nominal_models = run_stage("train", [&] {
      return train_per_structure(cfg, cfg.system, grid, all_structures,
                                 mix_seed(base, seed_tag("nominal-data")),
                                 mix_seed(base, seed_tag("nominal-init")));
    });
  }

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    SystemModel point_system = cfg.system;
    if (axis == SweepAxis::Power) {
      point_system.channel.tx_power_w = values[k];
    } else {
      point_system.channel.distance_m = values[k];
    }
    run_stage("sweep-geometry", [&] {
      point_system.validate();
      return 0;
    });

    const std::map<StructureVector, SensingModel>* models = &nominal_models;
    std::map<StructureVector, SensingModel> point_models;
    if (cfg.sweep.retrain_per_point) {
      point_models = run_stage("train", [&] {
        return train_per_structure(cfg, point_system, grid, all_structures,
                                   mix_seed(base, 3 * k + 1), mix_seed(base, 3 * k + 2));
      });
      models = &point_models;
    }

    // One shared test seed per sweep point: every structure sees the same
    // noise realization, so case comparisons are paired.
    const std::uint64_t test_seed = mix_seed(base, 3 * k);
    auto evaluate_structure = [&](const StructureVector& d) {
      const Dataset test = generate_dataset(point_system, grid, d,
                                            cfg.dataset.measurements_per_condition,
                                            test_seed, cfg.threads);
      return rmse(models->at(d), test);
    };

    rows.push_back({values[k], "optimized", evaluate_structure(optimization.best)});
    rows.push_back({values[k], "integer_best", evaluate_structure(grid_best.best)});
    double total = 0.0;
    for (const auto& d : averaged) total += evaluate_structure(d);
    rows.push_back({values[k], "integer_average",
                    total / static_cast<double>(averaged.size())});
  }

  const bool power = axis == SweepAxis::Power;
  std::ofstream out(dir / (power ? "sweep_power.csv" : "sweep_distance.csv"));
  if (!out) throw ConfigError("cannot write sweep results");
  out << (power ? "P_watt,case,rmse" : "D_m,case,rmse") << '\n';
  for (const auto& row : rows) {
    out << format_double(row.axis_value) << ',' << row.case_name << ','
        << format_double(row.rmse) << '\n';
  }
  return rows;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.seed = 1;
  cfg.threads = 1;
  cfg.mode = ErrorProbMode::Paper;
  cfg.out_dir = "out";

  // Resonances of the two units sweep across the band as the gap widths vary,
  // and the material responses are strong enough that neighboring conditions
  // separate by order-1 dB. Constants are illustrative, not measured.
  UnitCircuitParams t_unit;
  t_unit.inductance_h = 1.2e-9;
  t_unit.capacitance_f = 4e-13;
  t_unit.gap_capacitance_fmm = 1e-12;
  t_unit.ring_width_mm = 0.8;
  t_unit.ring_height_mm = 0.6;
  t_unit.material.kind = MaterialKind::NtcTemperature;
  t_unit.material.condition_dim = 0;
  t_unit.material.sigma_ref_spm = 10.0;
  t_unit.material.ref_value = 25.0;
  t_unit.material.sensitivity = 9000.0;
  t_unit.material.range_min = -40.0;
  t_unit.material.range_max = 125.0;

  UnitCircuitParams h_unit = t_unit;
  h_unit.inductance_h = 8e-10;
  h_unit.material.kind = MaterialKind::ExponentialHumidity;
  h_unit.material.condition_dim = 1;
  h_unit.material.sigma_ref_spm = 10.0;
  h_unit.material.ref_value = 40.0;
  h_unit.material.sensitivity = 0.12;
  h_unit.material.range_min = 0.0;
  h_unit.material.range_max = 100.0;

  cfg.system.circuit.units = {t_unit, h_unit};
  cfg.system.circuit.coupling_capacitance_f = 1e-6;
  cfg.system.circuit.z0_ohm = kFreeSpaceImpedanceOhm;

  cfg.system.channel.tx_power_w = 0.1;
  cfg.system.channel.distance_m = 2.0;
  cfg.system.channel.pathloss_exponent = 2.0;
  cfg.system.channel.wall_reflection = 0.05;
  cfg.system.channel.bias_power_w = 1e-9;
  cfg.system.channel.noise_std_db = 1.0;
  cfg.system.channel.wave_speed_mps = kSpeedOfLightMps;
  cfg.system.channel.beam_area_m2 = 0.5;
  cfg.system.channel.ref_distance_m = 1.0;
  cfg.system.channel.array = {7, 7, 0.1, 2};

  cfg.system.freqs = {2e9, 8e9, 32};

  cfg.condition_axes = {{5.0, 45.0, 5.0, "degC"}, {20.0, 60.0, 5.0, "%RH"}};

  cfg.space.lower_mm = {1.0, 1.0};
  cfg.space.upper_mm = {5.0, 5.0};
  cfg.space.min_separation_mm = 0.05;
  cfg.space.integer_step_mm = 1.0;

  cfg.surrogate.budget = 80;
  cfg.surrogate.initial_design = 0;
  cfg.surrogate.candidates_per_iteration = 100;
  cfg.seed_integer_grid = true;

  cfg.dataset.measurements_per_condition = 10;

  cfg.train.hidden_nodes = 64;
  cfg.train.activation = Activation::Sigmoid;
  cfg.train.learning_rate = 0.05;
  cfg.train.epochs = 600;
  cfg.train.batch_size = 0;
  cfg.train.validation_split = 0.0;

  cfg.sweep.power_values_w = {0.002, 0.008, 0.03, 0.1, 0.35, 1.0};
  cfg.sweep.distance_values_m = {1.5, 2.0, 2.7, 3.6, 4.9, 6.5};
  cfg.sweep.retrain_per_point = false;
  cfg.sweep.grid_average_limit = 6;

  return cfg;
}

}  // namespace metaiot
