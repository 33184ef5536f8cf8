#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metaiot/channel.hpp"
#include "metaiot/circuit.hpp"
#include "metaiot/discernibility.hpp"
#include "metaiot/io.hpp"
#include "metaiot/pipeline.hpp"
#include "metaiot/rng.hpp"
#include "metaiot/sensefn.hpp"
#include "metaiot/structopt.hpp"

namespace py = pybind11;
using namespace metaiot;

PYBIND11_MODULE(_metaiot, m) {
  m.doc() = "Passive meta-material sensor co-design core";
  m.attr("__version__") = kVersion;
  m.attr("FREE_SPACE_IMPEDANCE_OHM") = kFreeSpaceImpedanceOhm;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::class_<Rng>(m, "Rng", "Deterministic random stream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("gaussian", py::overload_cast<>(&Rng::gaussian));
  m.def("mix_seed", py::overload_cast<std::uint64_t, std::uint64_t>(&mix_seed),
        py::arg("master"), py::arg("stream"));

  // circuit
  py::enum_<MaterialKind>(m, "MaterialKind")
      .value("NTC_TEMPERATURE", MaterialKind::NtcTemperature)
      .value("EXPONENTIAL_HUMIDITY", MaterialKind::ExponentialHumidity)
      .value("TABLE_LOOKUP", MaterialKind::TableLookup);

  py::class_<MaterialModel>(m, "MaterialModel")
      .def(py::init<>())
      .def_readwrite("kind", &MaterialModel::kind)
      .def_readwrite("condition_dim", &MaterialModel::condition_dim)
      .def_readwrite("sigma_ref_spm", &MaterialModel::sigma_ref_spm)
      .def_readwrite("ref_value", &MaterialModel::ref_value)
      .def_readwrite("sensitivity", &MaterialModel::sensitivity)
      .def_readwrite("table_condition", &MaterialModel::table_condition)
      .def_readwrite("table_sigma_spm", &MaterialModel::table_sigma_spm)
      .def_readwrite("range_min", &MaterialModel::range_min)
      .def_readwrite("range_max", &MaterialModel::range_max)
      .def_readwrite("cross_coeffs", &MaterialModel::cross_coeffs)
      .def_readwrite("cross_refs", &MaterialModel::cross_refs);

  py::class_<UnitCircuitParams>(m, "UnitCircuitParams")
      .def(py::init<>())
      .def_readwrite("inductance_h", &UnitCircuitParams::inductance_h)
      .def_readwrite("capacitance_f", &UnitCircuitParams::capacitance_f)
      .def_readwrite("gap_capacitance_fmm", &UnitCircuitParams::gap_capacitance_fmm)
      .def_readwrite("ring_width_mm", &UnitCircuitParams::ring_width_mm)
      .def_readwrite("ring_height_mm", &UnitCircuitParams::ring_height_mm)
      .def_readwrite("material", &UnitCircuitParams::material);

  py::class_<SensorCircuitParams>(m, "SensorCircuitParams")
      .def(py::init<>())
      .def_readwrite("units", &SensorCircuitParams::units)
      .def_readwrite("coupling_capacitance_f", &SensorCircuitParams::coupling_capacitance_f)
      .def_readwrite("z0_ohm", &SensorCircuitParams::z0_ohm);

  py::class_<CorrectionTable>(m, "CorrectionTable")
      .def(py::init<std::vector<double>, std::vector<std::vector<double>>,
                    std::vector<double>>(),
           py::arg("freqs_hz"), py::arg("gap_axes_mm"), py::arg("factors"))
      .def_static("load_csv", &CorrectionTable::load_csv, py::arg("path"))
      .def("factor", &CorrectionTable::factor, py::arg("f_hz"), py::arg("d"));

  m.def("conductivity", &conductivity, py::arg("material"), py::arg("c"));
  m.def("unit_impedance", &unit_impedance, py::arg("f_hz"), py::arg("c"),
        py::arg("gap_mm"), py::arg("params"));
  m.def("sensor_impedance", &sensor_impedance, py::arg("f_hz"), py::arg("c"),
        py::arg("d"), py::arg("params"));
  m.def("reflection_coefficient", &reflection_coefficient, py::arg("z"),
        py::arg("z0_ohm") = kFreeSpaceImpedanceOhm);
  m.def("fitted_gamma", &fitted_gamma, py::arg("f_hz"), py::arg("c"), py::arg("d"),
        py::arg("params"), py::arg("table") = nullptr);

  // channel
  py::class_<SensorArrayGeometry>(m, "SensorArrayGeometry")
      .def(py::init<>())
      .def_readwrite("count_x", &SensorArrayGeometry::count_x)
      .def_readwrite("count_y", &SensorArrayGeometry::count_y)
      .def_readwrite("sensor_side_m", &SensorArrayGeometry::sensor_side_m)
      .def_readwrite("units_per_sensor", &SensorArrayGeometry::units_per_sensor)
      .def("area_m2", &SensorArrayGeometry::area_m2);

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("tx_power_w", &ChannelParams::tx_power_w)
      .def_readwrite("distance_m", &ChannelParams::distance_m)
      .def_readwrite("pathloss_exponent", &ChannelParams::pathloss_exponent)
      .def_readwrite("wall_reflection", &ChannelParams::wall_reflection)
      .def_readwrite("bias_power_w", &ChannelParams::bias_power_w)
      .def_readwrite("noise_std_db", &ChannelParams::noise_std_db)
      .def_readwrite("wave_speed_mps", &ChannelParams::wave_speed_mps)
      .def_readwrite("beam_area_m2", &ChannelParams::beam_area_m2)
      .def_readwrite("ref_distance_m", &ChannelParams::ref_distance_m)
      .def_readwrite("array", &ChannelParams::array)
      .def("validate", &ChannelParams::validate);

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init<>())
      .def(py::init([](double lb, double ub, int n) {
             return FrequencyGrid{lb, ub, n};
           }),
           py::arg("f_lb_hz"), py::arg("f_ub_hz"), py::arg("n_points"))
      .def_readwrite("f_lb_hz", &FrequencyGrid::f_lb_hz)
      .def_readwrite("f_ub_hz", &FrequencyGrid::f_ub_hz)
      .def_readwrite("n_points", &FrequencyGrid::n_points)
      .def("frequencies", &FrequencyGrid::frequencies);

  py::class_<AreaFractions>(m, "AreaFractions")
      .def_readonly("sensor", &AreaFractions::sensor)
      .def_readonly("environment", &AreaFractions::environment);

  m.def("to_dbm", &to_dbm, py::arg("power_w"));
  m.def("from_dbm", &from_dbm, py::arg("dbm"));
  m.def("pathloss", &pathloss, py::arg("f_hz"), py::arg("distance_m"), py::arg("alpha"),
        py::arg("wave_speed_mps") = kSpeedOfLightMps);
  m.def("area_fractions", &area_fractions, py::arg("channel"));
  m.def("expected_rx_power_db", &expected_rx_power_db, py::arg("f_hz"), py::arg("c"),
        py::arg("d"), py::arg("channel"), py::arg("circuit"),
        py::arg("table") = nullptr);
  m.def("sample_rx_power_db", &sample_rx_power_db, py::arg("f_hz"), py::arg("c"),
        py::arg("d"), py::arg("channel"), py::arg("circuit"), py::arg("rng"),
        py::arg("table") = nullptr);
  m.def("rx_power_vector", &rx_power_vector, py::arg("c"), py::arg("d"),
        py::arg("channel"), py::arg("grid"), py::arg("circuit"), py::arg("rng"),
        py::arg("table") = nullptr);

  py::class_<SystemModel>(m, "SystemModel")
      .def(py::init<>())
      .def_readwrite("circuit", &SystemModel::circuit)
      .def_readwrite("channel", &SystemModel::channel)
      .def_readwrite("freqs", &SystemModel::freqs)
      .def_readwrite("correction", &SystemModel::correction)
      .def("validate", &SystemModel::validate);
  m.def("expected_spectrum_db", &expected_spectrum_db, py::arg("system"), py::arg("c"),
        py::arg("d"));

  // discernibility
  py::class_<GridAxis>(m, "GridAxis")
      .def(py::init<>())
      .def(py::init([](double lo, double hi, double step, const std::string& unit) {
             return GridAxis{lo, hi, step, unit};
           }),
           py::arg("min"), py::arg("max"), py::arg("step"), py::arg("unit") = "")
      .def_readwrite("min", &GridAxis::min)
      .def_readwrite("max", &GridAxis::max)
      .def_readwrite("step", &GridAxis::step)
      .def_readwrite("unit", &GridAxis::unit)
      .def("values", &GridAxis::values);

  py::class_<ConditionGrid>(m, "ConditionGrid")
      .def_static("regular", &ConditionGrid::regular, py::arg("axes"))
      .def_static("from_points", &ConditionGrid::from_points, py::arg("points"))
      .def("size", &ConditionGrid::size)
      .def("dims", &ConditionGrid::dims)
      .def("points", &ConditionGrid::points)
      .def("value_ranges", &ConditionGrid::value_ranges);

  py::enum_<ErrorProbMode>(m, "ErrorProbMode")
      .value("PAPER", ErrorProbMode::Paper)
      .value("ML", ErrorProbMode::Ml);

  m.def("nearest_neighbor_set", &nearest_neighbor_set, py::arg("grid"), py::arg("j"));
  m.def("pair_error_probability",
        [](const std::vector<double>& tau_a, const std::vector<double>& tau_b,
           double sigma, ErrorProbMode mode) {
          return pair_error_probability(tau_a, tau_b, sigma, mode);
        },
        py::arg("tau_truth"), py::arg("tau_other"), py::arg("noise_std_db"),
        py::arg("mode"));
  m.def("pairwise_error_prob", &pairwise_error_prob, py::arg("system"),
        py::arg("truth"), py::arg("other"), py::arg("d"), py::arg("mode"));
  m.def("mc_error_oracle", &mc_error_oracle, py::arg("system"), py::arg("truth"),
        py::arg("other"), py::arg("d"), py::arg("trials"), py::arg("rng"));

  py::class_<IndiscernibilityStats>(m, "IndiscernibilityStats")
      .def_readonly("value", &IndiscernibilityStats::value)
      .def_readonly("pair_terms", &IndiscernibilityStats::pair_terms)
      .def_readonly("spectra_evaluated", &IndiscernibilityStats::spectra_evaluated);

  m.def("indiscernibility_en", &indiscernibility_en, py::arg("system"), py::arg("grid"),
        py::arg("d"), py::arg("mode") = ErrorProbMode::Paper, py::arg("threads") = 1);
  m.def("indiscernibility_ed", &indiscernibility_ed, py::arg("system"), py::arg("grid"),
        py::arg("d"), py::arg("threads") = 1);

  // structopt
  py::class_<DesignSpace>(m, "DesignSpace")
      .def(py::init<>())
      .def_readwrite("lower_mm", &DesignSpace::lower_mm)
      .def_readwrite("upper_mm", &DesignSpace::upper_mm)
      .def_readwrite("min_separation_mm", &DesignSpace::min_separation_mm)
      .def_readwrite("integer_step_mm", &DesignSpace::integer_step_mm)
      .def("feasible", &DesignSpace::feasible, py::arg("d"))
      .def("integer_grid", &DesignSpace::integer_grid);

  py::class_<SurrogateConfig>(m, "SurrogateConfig")
      .def(py::init<>())
      .def_readwrite("initial_design", &SurrogateConfig::initial_design)
      .def_readwrite("budget", &SurrogateConfig::budget)
      .def_readwrite("candidates_per_iteration", &SurrogateConfig::candidates_per_iteration)
      .def_readwrite("initial_radius", &SurrogateConfig::initial_radius)
      .def_readwrite("min_radius", &SurrogateConfig::min_radius)
      .def_readwrite("shrink_patience", &SurrogateConfig::shrink_patience)
      .def_readwrite("seed_points", &SurrogateConfig::seed_points);

  py::class_<TracePoint>(m, "TracePoint")
      .def_readonly("eval_index", &TracePoint::eval_index)
      .def_readonly("d", &TracePoint::d)
      .def_readonly("value", &TracePoint::value);

  py::class_<OptimizationResult>(m, "OptimizationResult")
      .def_readonly("best", &OptimizationResult::best)
      .def_readonly("best_value", &OptimizationResult::best_value)
      .def_readonly("trace", &OptimizationResult::trace);

  py::class_<GridSearchResult>(m, "GridSearchResult")
      .def_readonly("best", &GridSearchResult::best)
      .def_readonly("best_value", &GridSearchResult::best_value);

  m.def("surrogate_optimize", &surrogate_optimize, py::arg("objective"),
        py::arg("space"), py::arg("config"), py::arg("seed"));
  m.def("grid_search", &grid_search, py::arg("objective"), py::arg("grid"));
  m.def("grid_average", &grid_average, py::arg("objective"), py::arg("grid"));

  // sensefn
  py::class_<DatasetRecord>(m, "DatasetRecord")
      .def(py::init<>())
      .def_readwrite("condition", &DatasetRecord::condition)
      .def_readwrite("power_db", &DatasetRecord::power_db)
      .def_readwrite("measurement_index", &DatasetRecord::measurement_index);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("records", &Dataset::records)
      .def_readwrite("structure", &Dataset::structure)
      .def_readwrite("seed", &Dataset::seed)
      .def_readwrite("n_freq", &Dataset::n_freq)
      .def("__len__", &Dataset::size);

  m.def("generate_dataset", &generate_dataset, py::arg("system"), py::arg("grid"),
        py::arg("d"), py::arg("n_measurements"), py::arg("seed"),
        py::arg("threads") = 1);

  py::enum_<Activation>(m, "Activation")
      .value("SIGMOID", Activation::Sigmoid)
      .value("TANH", Activation::Tanh)
      .value("RELU", Activation::Relu)
      .value("SOFTMAX", Activation::Softmax);

  py::class_<SensingModel>(m, "SensingModel")
      .def(py::init<>())
      .def_readwrite("n_in", &SensingModel::n_in)
      .def_readwrite("n_hidden", &SensingModel::n_hidden)
      .def_readwrite("n_out", &SensingModel::n_out)
      .def_readwrite("activation", &SensingModel::activation)
      .def_readwrite("w1", &SensingModel::w1)
      .def_readwrite("b1", &SensingModel::b1)
      .def_readwrite("w2", &SensingModel::w2)
      .def_readwrite("b2", &SensingModel::b2)
      .def_readwrite("input_mean", &SensingModel::input_mean)
      .def_readwrite("input_std", &SensingModel::input_std)
      .def_readwrite("output_min", &SensingModel::output_min)
      .def_readwrite("output_max", &SensingModel::output_max)
      .def_readwrite("target_units", &SensingModel::target_units)
      .def("parameter_count", &SensingModel::parameter_count)
      .def("flat_parameters", &SensingModel::flat_parameters)
      .def("set_flat_parameters",
           [](SensingModel& self, const std::vector<double>& w) {
             self.set_flat_parameters(w);
           });

  m.def("forward", &forward, py::arg("model"), py::arg("p"));
  m.def("rmse", &rmse, py::arg("model"), py::arg("dataset"));
  m.def("training_loss",
        [](const SensingModel& model, const std::vector<DatasetRecord>& batch) {
          return training_loss(model, batch);
        },
        py::arg("model"), py::arg("batch"));
  m.def("gradient",
        [](const SensingModel& model, const std::vector<DatasetRecord>& batch) {
          return gradient(model, batch);
        },
        py::arg("model"), py::arg("batch"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("hidden_nodes", &TrainConfig::hidden_nodes)
      .def_readwrite("activation", &TrainConfig::activation)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("validation_split", &TrainConfig::validation_split)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("train_rmse_history", &TrainResult::train_rmse_history)
      .def_readonly("val_rmse_history", &TrainResult::val_rmse_history)
      .def_readonly("best_rmse", &TrainResult::best_rmse)
      .def_readonly("best_epoch", &TrainResult::best_epoch);

  m.def("train", &train, py::arg("dataset"), py::arg("config"), py::arg("output_lo"),
        py::arg("output_hi"), py::arg("target_units") = std::vector<std::string>{});
  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));

  // io
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("dataset"), py::arg("path"));
  m.def("load_dataset_csv", &load_dataset_csv, py::arg("path"));
  m.def("load_power_vectors_csv", &load_power_vectors_csv, py::arg("path"));

  // pipeline
  py::class_<DatasetConfig>(m, "DatasetConfig")
      .def(py::init<>())
      .def_readwrite("measurements_per_condition", &DatasetConfig::measurements_per_condition);

  py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("power_values_w", &SweepConfig::power_values_w)
      .def_readwrite("distance_values_m", &SweepConfig::distance_values_m)
      .def_readwrite("retrain_per_point", &SweepConfig::retrain_per_point)
      .def_readwrite("grid_average_limit", &SweepConfig::grid_average_limit);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("system", &RunConfig::system)
      .def_readwrite("condition_axes", &RunConfig::condition_axes)
      .def_readwrite("space", &RunConfig::space)
      .def_readwrite("surrogate", &RunConfig::surrogate)
      .def_readwrite("seed_integer_grid", &RunConfig::seed_integer_grid)
      .def_readwrite("train", &RunConfig::train)
      .def_readwrite("dataset", &RunConfig::dataset)
      .def_readwrite("sweep", &RunConfig::sweep)
      .def_readwrite("mode", &RunConfig::mode)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def("validate", &RunConfig::validate)
      .def("condition_grid", &RunConfig::condition_grid);

  m.def("load_config", &load_config, py::arg("path"));
  m.def("load_config_string", &load_config_string, py::arg("text"));
  m.def("config_hash", &config_hash, py::arg("config"));
  m.def("default_run_config", &default_run_config);
  m.def("default_config_json", &default_config_json);

  py::class_<ArtifactRef>(m, "ArtifactRef")
      .def_readonly("name", &ArtifactRef::name)
      .def_readonly("path", &ArtifactRef::path)
      .def_readonly("checksum", &ArtifactRef::checksum);

  py::class_<RunManifest>(m, "RunManifest")
      .def_readonly("tool_version", &RunManifest::tool_version)
      .def_readonly("config_hash", &RunManifest::config_hash)
      .def_readonly("seed", &RunManifest::seed)
      .def_readonly("mode", &RunManifest::mode)
      .def_readonly("structure_mm", &RunManifest::structure_mm)
      .def_readonly("indiscernibility", &RunManifest::indiscernibility)
      .def_readonly("rmse_train", &RunManifest::rmse_train)
      .def_readonly("rmse_holdout", &RunManifest::rmse_holdout)
      .def_readonly("best_epoch", &RunManifest::best_epoch)
      .def_readonly("artifacts", &RunManifest::artifacts)
      .def_readonly("created_utc", &RunManifest::created_utc)
      .def_readonly("completed_utc", &RunManifest::completed_utc);

  m.def("run_codesign", &run_codesign, py::arg("config"));
  m.def("optimize_structure", &optimize_structure, py::arg("config"));

  py::enum_<SweepAxis>(m, "SweepAxis")
      .value("POWER", SweepAxis::Power)
      .value("DISTANCE", SweepAxis::Distance);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("axis_value", &SweepRow::axis_value)
      .def_readonly("case_name", &SweepRow::case_name)
      .def_readonly("rmse", &SweepRow::rmse);

  m.def("run_sweep", &run_sweep, py::arg("config"), py::arg("axis"));
  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def("verify_manifest", &verify_manifest, py::arg("manifest"), py::arg("base_dir"));
}
