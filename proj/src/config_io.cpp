#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metaiot/io.hpp"
#include "metaiot/pipeline.hpp"

namespace metaiot {

namespace {

using nlohmann::json;

json material_to_json(const MaterialModel& m) {
  json j;
  j["kind"] = material_kind_name(m.kind);
  j["condition_dim"] = m.condition_dim;
  j["sigma_ref_spm"] = m.sigma_ref_spm;
  j["ref_value"] = m.ref_value;
  j["sensitivity"] = m.sensitivity;
  j["range"] = {m.range_min, m.range_max};
  if (!m.table_condition.empty()) {
    j["table_condition"] = m.table_condition;
    j["table_sigma_spm"] = m.table_sigma_spm;
  }
  if (!m.cross_coeffs.empty()) {
    j["cross_coeffs"] = m.cross_coeffs;
    j["cross_refs"] = m.cross_refs;
  }
  return j;
}

MaterialModel material_from_json(const json& j) {
  MaterialModel m;
  m.kind = parse_material_kind(j.at("kind").get<std::string>());
  m.condition_dim = j.value("condition_dim", 0);
  m.sigma_ref_spm = j.value("sigma_ref_spm", 1.0);
  m.ref_value = j.value("ref_value", 0.0);
  m.sensitivity = j.value("sensitivity", 0.0);
  if (j.contains("range")) {
    m.range_min = j.at("range").at(0).get<double>();
    m.range_max = j.at("range").at(1).get<double>();
  }
  if (j.contains("table_condition")) {
    m.table_condition = j.at("table_condition").get<std::vector<double>>();
    m.table_sigma_spm = j.at("table_sigma_spm").get<std::vector<double>>();
  }
  if (j.contains("cross_coeffs")) {
    m.cross_coeffs = j.at("cross_coeffs").get<std::vector<double>>();
    m.cross_refs = j.at("cross_refs").get<std::vector<double>>();
  }
  return m;
}

// Execution details (output directory, worker count) are serialized for
// config files but left out of the canonical form, so they never change a
// run's identity hash.
json config_to_json(const RunConfig& cfg, bool include_execution_fields) {
  json j;
  j["seed"] = cfg.seed;
  j["mode"] = error_prob_mode_name(cfg.mode);
  if (include_execution_fields) {
    j["threads"] = cfg.threads;
    j["out_dir"] = cfg.out_dir;
  }

  json circuit;
  circuit["z0_ohm"] = cfg.system.circuit.z0_ohm;
  circuit["coupling_capacitance_f"] = cfg.system.circuit.coupling_capacitance_f;
  circuit["units"] = json::array();
  for (const auto& u : cfg.system.circuit.units) {
    json unit;
    unit["inductance_h"] = u.inductance_h;
    unit["capacitance_f"] = u.capacitance_f;
    unit["gap_capacitance_fmm"] = u.gap_capacitance_fmm;
    unit["ring_width_mm"] = u.ring_width_mm;
    unit["ring_height_mm"] = u.ring_height_mm;
    unit["material"] = material_to_json(u.material);
    circuit["units"].push_back(unit);
  }
  j["circuit"] = circuit;

  const ChannelParams& ch = cfg.system.channel;
  j["channel"] = {
      {"tx_power_w", ch.tx_power_w},
      {"distance_m", ch.distance_m},
      {"pathloss_exponent", ch.pathloss_exponent},
      {"wall_reflection", ch.wall_reflection},
      {"bias_power_w", ch.bias_power_w},
      {"noise_std_db", ch.noise_std_db},
      {"wave_speed_mps", ch.wave_speed_mps},
      {"beam_area_m2", ch.beam_area_m2},
      {"ref_distance_m", ch.ref_distance_m},
      {"array",
       {{"count_x", ch.array.count_x},
        {"count_y", ch.array.count_y},
        {"sensor_side_m", ch.array.sensor_side_m},
        {"units_per_sensor", ch.array.units_per_sensor}}},
  };

  j["frequency_grid"] = {{"f_lb_hz", cfg.system.freqs.f_lb_hz},
                         {"f_ub_hz", cfg.system.freqs.f_ub_hz},
                         {"n_points", cfg.system.freqs.n_points}};

  json axes = json::array();
  for (const auto& axis : cfg.condition_axes) {
    axes.push_back({{"min", axis.min}, {"max", axis.max}, {"step", axis.step},
                    {"unit", axis.unit}});
  }
  j["condition_grid"] = {{"axes", axes}};

  j["design_space"] = {{"lower_mm", cfg.space.lower_mm},
                       {"upper_mm", cfg.space.upper_mm},
                       {"min_separation_mm", cfg.space.min_separation_mm},
                       {"integer_step_mm", cfg.space.integer_step_mm}};

  j["surrogate"] = {{"budget", cfg.surrogate.budget},
                    {"initial_design", cfg.surrogate.initial_design},
                    {"candidates_per_iteration", cfg.surrogate.candidates_per_iteration},
                    {"initial_radius", cfg.surrogate.initial_radius},
                    {"min_radius", cfg.surrogate.min_radius},
                    {"shrink_patience", cfg.surrogate.shrink_patience},
                    {"seed_integer_grid", cfg.seed_integer_grid}};

  j["dataset"] = {{"measurements_per_condition", cfg.dataset.measurements_per_condition}};

  j["train"] = {{"hidden_nodes", cfg.train.hidden_nodes},
                {"activation", activation_name(cfg.train.activation)},
                {"learning_rate", cfg.train.learning_rate},
                {"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"validation_split", cfg.train.validation_split}};

  j["sweep"] = {{"power_values_w", cfg.sweep.power_values_w},
                {"distance_values_m", cfg.sweep.distance_values_m},
                {"retrain_per_point", cfg.sweep.retrain_per_point},
                {"grid_average_limit", cfg.sweep.grid_average_limit}};

  if (!cfg.correction_table_csv.empty()) {
    j["correction_table_csv"] = cfg.correction_table_csv;
  }
  return j;
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.threads = j.value("threads", 1);
  cfg.mode = parse_error_prob_mode(j.value("mode", std::string("paper")));
  cfg.out_dir = j.value("out_dir", std::string("out"));

  const json& circuit = j.at("circuit");
  cfg.system.circuit.z0_ohm = circuit.value("z0_ohm", kFreeSpaceImpedanceOhm);
  cfg.system.circuit.coupling_capacitance_f =
      circuit.value("coupling_capacitance_f", 1e-6);
  for (const json& unit : circuit.at("units")) {
    UnitCircuitParams u;
    u.inductance_h = unit.at("inductance_h").get<double>();
    u.capacitance_f = unit.at("capacitance_f").get<double>();
    u.gap_capacitance_fmm = unit.at("gap_capacitance_fmm").get<double>();
    u.ring_width_mm = unit.at("ring_width_mm").get<double>();
    u.ring_height_mm = unit.at("ring_height_mm").get<double>();
    u.material = material_from_json(unit.at("material"));
    cfg.system.circuit.units.push_back(std::move(u));
  }

  const json& ch = j.at("channel");
  ChannelParams& channel = cfg.system.channel;
  channel.tx_power_w = ch.at("tx_power_w").get<double>();
  channel.distance_m = ch.at("distance_m").get<double>();
  channel.pathloss_exponent = ch.value("pathloss_exponent", 2.0);
  channel.wall_reflection = ch.value("wall_reflection", 0.3);
  channel.bias_power_w = ch.at("bias_power_w").get<double>();
  channel.noise_std_db = ch.at("noise_std_db").get<double>();
  channel.wave_speed_mps = ch.value("wave_speed_mps", kSpeedOfLightMps);
  channel.beam_area_m2 = ch.at("beam_area_m2").get<double>();
  channel.ref_distance_m = ch.value("ref_distance_m", 1.0);
  if (ch.contains("array")) {
    const json& array = ch.at("array");
    channel.array.count_x = array.value("count_x", 1);
    channel.array.count_y = array.value("count_y", 1);
    channel.array.sensor_side_m = array.value("sensor_side_m", 0.1);
    channel.array.units_per_sensor = array.value("units_per_sensor", 1);
  }

  const json& fg = j.at("frequency_grid");
  cfg.system.freqs.f_lb_hz = fg.at("f_lb_hz").get<double>();
  cfg.system.freqs.f_ub_hz = fg.at("f_ub_hz").get<double>();
  cfg.system.freqs.n_points = fg.at("n_points").get<int>();

  for (const json& axis : j.at("condition_grid").at("axes")) {
    GridAxis a;
    a.min = axis.at("min").get<double>();
    a.max = axis.at("max").get<double>();
    a.step = axis.at("step").get<double>();
    a.unit = axis.value("unit", std::string());
    cfg.condition_axes.push_back(std::move(a));
  }

  const json& space = j.at("design_space");
  cfg.space.lower_mm = space.at("lower_mm").get<std::vector<double>>();
  cfg.space.upper_mm = space.at("upper_mm").get<std::vector<double>>();
  cfg.space.min_separation_mm = space.value("min_separation_mm", 0.05);
  cfg.space.integer_step_mm = space.value("integer_step_mm", 1.0);

  if (j.contains("surrogate")) {
    const json& s = j.at("surrogate");
    cfg.surrogate.budget = s.value("budget", 80);
    cfg.surrogate.initial_design = s.value("initial_design", 0);
    cfg.surrogate.candidates_per_iteration = s.value("candidates_per_iteration", 100);
    cfg.surrogate.initial_radius = s.value("initial_radius", 0.2);
    cfg.surrogate.min_radius = s.value("min_radius", 1e-3);
    cfg.surrogate.shrink_patience = s.value("shrink_patience", 5);
    cfg.seed_integer_grid = s.value("seed_integer_grid", true);
  }

  if (j.contains("dataset")) {
    cfg.dataset.measurements_per_condition =
        j.at("dataset").value("measurements_per_condition", 10);
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    cfg.train.hidden_nodes = t.value("hidden_nodes", 64);
    cfg.train.activation = parse_activation(t.value("activation", std::string("sigmoid")));
    cfg.train.learning_rate = t.value("learning_rate", 0.05);
    cfg.train.epochs = t.value("epochs", 2000);
    cfg.train.batch_size = t.value("batch_size", 0);
    cfg.train.validation_split = t.value("validation_split", 0.0);
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    cfg.sweep.power_values_w = s.value("power_values_w", std::vector<double>{});
    cfg.sweep.distance_values_m = s.value("distance_values_m", std::vector<double>{});
    cfg.sweep.retrain_per_point = s.value("retrain_per_point", false);
    cfg.sweep.grid_average_limit = s.value("grid_average_limit", 0);
  }

  if (j.contains("correction_table_csv")) {
    cfg.correction_table_csv = j.at("correction_table_csv").get<std::string>();
    std::filesystem::path table_path(cfg.correction_table_csv);
    if (table_path.is_relative()) table_path = base_dir / table_path;
    cfg.system.correction = CorrectionTable::load_csv(table_path.string());
  }

  cfg.validate();
  return cfg;
}

}  // namespace

std::vector<std::string> RunConfig::condition_units() const {
  std::vector<std::string> units;
  units.reserve(condition_axes.size());
  for (const auto& axis : condition_axes) units.push_back(axis.unit);
  return units;
}

void RunConfig::validate() const {
  system.validate();
  if (condition_axes.empty()) throw ConfigError("config needs condition axes");
  for (const auto& axis : condition_axes) axis.validate();

  const std::size_t n_targets = condition_axes.size();
  if (system.circuit.units.size() != n_targets) {
    throw ConfigError("circuit unit count must match the number of condition axes");
  }
  if (space.lower_mm.size() != n_targets) {
    throw ConfigError("design space dimension must match the number of condition axes");
  }
  for (const auto& unit : system.circuit.units) {
    const auto& m = unit.material;
    if (m.condition_dim >= static_cast<int>(n_targets)) {
      throw ConfigError("material condition_dim exceeds the number of condition axes");
    }
    const auto& axis = condition_axes[static_cast<std::size_t>(m.condition_dim)];
    if (axis.min < m.range_min || axis.max > m.range_max) {
      throw ConfigError("condition axis exceeds the material's valid range");
    }
  }
  space.validate();
  surrogate.validate(space);
  train.validate();
  if (dataset.measurements_per_condition < 1) {
    throw ConfigError("measurements_per_condition must be positive");
  }
  if (threads < 1) throw ConfigError("threads must be positive");
  if (sweep.grid_average_limit < 0) {
    throw ConfigError("grid_average_limit must be >= 0");
  }
  for (double p : sweep.power_values_w) {
    if (!(p > 0.0)) throw ConfigError("sweep power values must be positive");
  }
  for (double d : sweep.distance_values_m) {
    if (!(d > 0.0)) throw ConfigError("sweep distance values must be positive");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return config_from_json(j, std::filesystem::path(path).parent_path());
  } catch (const json::exception& e) {
    throw ConfigError("config field error in " + path + ": " + e.what());
  }
}

RunConfig load_config_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    return config_from_json(j, std::filesystem::current_path());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

std::string canonical_config_string(const RunConfig& cfg) {
  return config_to_json(cfg, false).dump();
}

std::string config_hash(const RunConfig& cfg) {
  return "fnv1a:" + fnv1a_hex(canonical_config_string(cfg));
}

std::string default_config_json() {
  return config_to_json(default_run_config(), true).dump(2) + "\n";
}

namespace {

json manifest_to_json(const RunManifest& m) {
  json j;
  j["tool_version"] = m.tool_version;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["mode"] = m.mode;
  j["structure_mm"] = m.structure_mm;
  j["indiscernibility"] = m.indiscernibility;
  j["rmse_train"] = m.rmse_train;
  j["rmse_holdout"] = m.rmse_holdout;
  j["best_epoch"] = m.best_epoch;
  j["artifacts"] = json::array();
  for (const auto& a : m.artifacts) {
    j["artifacts"].push_back({{"name", a.name}, {"path", a.path}, {"checksum", a.checksum}});
  }
  j["created_utc"] = m.created_utc;
  j["completed_utc"] = m.completed_utc;
  return j;
}

}  // namespace

void save_manifest(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write manifest: " + path);
  out << manifest_to_json(manifest).dump(2) << '\n';
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("manifest parse error in " + path + ": " + e.what());
  }
  RunManifest m;
  try {
    m.tool_version = j.value("tool_version", std::string());
    m.config_hash = j.value("config_hash", std::string());
    m.seed = j.value("seed", std::uint64_t{0});
    m.mode = j.value("mode", std::string());
    m.structure_mm = j.value("structure_mm", StructureVector{});
    m.indiscernibility = j.value("indiscernibility", 0.0);
    m.rmse_train = j.value("rmse_train", 0.0);
    m.rmse_holdout = j.value("rmse_holdout", 0.0);
    m.best_epoch = j.value("best_epoch", 0);
    if (j.contains("artifacts")) {
      for (const json& a : j.at("artifacts")) {
        m.artifacts.push_back({a.value("name", std::string()),
                               a.value("path", std::string()),
                               a.value("checksum", std::string())});
      }
    }
    m.created_utc = j.value("created_utc", std::string());
    m.completed_utc = j.value("completed_utc", std::string());
  } catch (const json::exception& e) {
    throw ConfigError("manifest field error in " + path + ": " + e.what());
  }
  return m;
}

void verify_manifest(const RunManifest& manifest, const std::string& base_dir) {
  for (const auto& artifact : manifest.artifacts) {
    const std::filesystem::path path = std::filesystem::path(base_dir) / artifact.path;
    if (!std::filesystem::exists(path)) {
      throw ConfigError("manifest artifact missing: " + path.string());
    }
    const std::string checksum = file_checksum(path.string());
    if (checksum != artifact.checksum) {
      throw ConfigError("manifest checksum mismatch for " + artifact.path + ": " +
                        checksum + " != " + artifact.checksum);
    }
  }
}

}  // namespace metaiot
