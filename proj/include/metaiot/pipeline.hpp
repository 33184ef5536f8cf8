#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaiot/channel.hpp"
#include "metaiot/discernibility.hpp"
#include "metaiot/sensefn.hpp"
#include "metaiot/structopt.hpp"
#include "metaiot/types.hpp"

namespace metaiot {

struct DatasetConfig {
  int measurements_per_condition = 10;
};

struct SweepConfig {
  std::vector<double> power_values_w;
  std::vector<double> distance_values_m;
  bool retrain_per_point = false;
  int grid_average_limit = 0;  // 0 keeps the whole integer grid
};

/// Everything a run needs; loaded from one JSON config file or built in code.
struct RunConfig {
  SystemModel system;
  std::vector<GridAxis> condition_axes;
  DesignSpace space;
  SurrogateConfig surrogate;
  bool seed_integer_grid = true;  // evaluate the integer grid inside the initial design
  TrainConfig train;
  DatasetConfig dataset;
  SweepConfig sweep;
  ErrorProbMode mode = ErrorProbMode::Paper;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
  std::string correction_table_csv;  // optional; loaded into system.correction

  ConditionGrid condition_grid() const { return ConditionGrid::regular(condition_axes); }
  std::vector<std::string> condition_units() const;
  void validate() const;
};

/// Parses and validates the JSON run configuration.
RunConfig load_config(const std::string& path);
RunConfig load_config_string(const std::string& text);

/// Canonical serialization of a config; equal configs hash equal regardless of
/// the source file's formatting.
std::string canonical_config_string(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

/// A small, fast self-contained configuration used by tests and as the
/// starting point for `init-config`.
RunConfig default_run_config();
std::string default_config_json();

struct ArtifactRef {
  std::string name;
  std::string path;      // relative to the manifest's directory
  std::string checksum;  // "fnv1a:<hex>"
};

struct RunManifest {
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string mode;
  StructureVector structure_mm;
  double indiscernibility = 0.0;  // objective value at the chosen structure
  double rmse_train = 0.0;        // on the persisted training dataset
  double rmse_holdout = 0.0;      // on the persisted holdout dataset
  int best_epoch = 0;
  std::vector<ArtifactRef> artifacts;
  std::string created_utc;
  std::string completed_utc;
};

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

/// Checks that every artifact the manifest references exists and still
/// matches its recorded checksum. Throws ConfigError otherwise.
void verify_manifest(const RunManifest& manifest, const std::string& base_dir);

/// Structure optimization, Monte Carlo dataset synthesis, training, and
/// evaluation, end to end. Persists trace.csv, dataset.csv, holdout.csv,
/// model.txt, history.csv, and manifest.json under cfg.out_dir.
RunManifest run_codesign(const RunConfig& cfg);

/// Structure optimization alone; persists trace.csv and returns the result.
OptimizationResult optimize_structure(const RunConfig& cfg);

enum class SweepAxis { Power, Distance };

SweepAxis parse_sweep_axis(const std::string& name);

struct SweepRow {
  double axis_value = 0.0;
  std::string case_name;  // optimized | integer_best | integer_average
  double rmse = 0.0;
};

/// Evaluates sensing RMSE across transmit powers or measurement distances for
/// the optimized structure, the best integer-grid structure, and the
/// integer-grid average. Persists sweep_power.csv or sweep_distance.csv.
std::vector<SweepRow> run_sweep(const RunConfig& cfg, SweepAxis axis);

}  // namespace metaiot
