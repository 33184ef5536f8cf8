#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metaiot/channel.hpp"
#include "metaiot/discernibility.hpp"
#include "metaiot/types.hpp"

namespace metaiot {

struct DatasetRecord {
  ConditionVector condition;
  ReceivedPowerVector power_db;
  int measurement_index = 1;  // m in [1, N_M]
};

struct Dataset {
  std::vector<DatasetRecord> records;
  StructureVector structure;
  std::uint64_t seed = 0;
  int n_freq = 0;

  std::size_t size() const { return records.size(); }
};

/// Monte Carlo training data: for every grid condition, n_measurements noisy
/// power spectra at structure d. The noise of record (j, m) comes from its own
/// substream of `seed`, so the dataset is identical for any thread count.
Dataset generate_dataset(const SystemModel& system, const ConditionGrid& grid,
                         const StructureVector& d, int n_measurements,
                         std::uint64_t seed, int threads = 1);

enum class Activation { Sigmoid, Tanh, Relu, Softmax };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

/// One-hidden-layer fully connected regressor mapping a received power
/// spectrum to condition estimates. Inputs are z-scored with the stored
/// training statistics and targets are min-max scaled to [0, 1]; both sets of
/// statistics travel with the model.
struct SensingModel {
  int n_in = 0;
  int n_hidden = 0;
  int n_out = 0;
  Activation activation = Activation::Sigmoid;
  std::vector<double> w1;  // n_hidden x n_in, row-major
  std::vector<double> b1;  // n_hidden
  std::vector<double> w2;  // n_out x n_hidden, row-major
  std::vector<double> b2;  // n_out
  std::vector<double> input_mean;   // n_in
  std::vector<double> input_std;    // n_in, strictly positive
  std::vector<double> output_min;   // n_out
  std::vector<double> output_max;   // n_out
  std::vector<std::string> target_units;  // optional, n_out

  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> w);
  void validate() const;
};

/// Forward pass: normalize, two affine layers with the hidden activation,
/// denormalize.
ConditionVector forward(const SensingModel& model, const ReceivedPowerVector& p);

/// Root mean squared error per condition element, in condition units.
double rmse(const SensingModel& model, const Dataset& ds);

/// Mean squared training loss over a batch, computed on the normalized
/// targets (so learning rates in (0, 1] behave across condition scales).
double training_loss(const SensingModel& model, std::span<const DatasetRecord> batch);

/// Exact gradient of training_loss with respect to the flat parameter vector
/// [w1, b1, w2, b2], via backpropagation.
std::vector<double> gradient(const SensingModel& model,
                             std::span<const DatasetRecord> batch);

struct TrainConfig {
  int hidden_nodes = 64;
  Activation activation = Activation::Sigmoid;
  double learning_rate = 0.05;  // in [0, 1]
  int epochs = 2000;
  int batch_size = 0;           // 0 = full batch
  double validation_split = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  SensingModel model;             // parameters of the best checkpoint
  std::vector<double> train_rmse_history;  // per epoch, condition units
  std::vector<double> val_rmse_history;    // per epoch; equals train when no split
  double best_rmse = 0.0;
  int best_epoch = 0;
};

/// Plain gradient descent on the normalized squared loss. Returns the
/// parameters with the best validation RMSE seen over the epochs (training
/// RMSE when no validation split is configured). Deterministic given the
/// config seed. Output normalization comes from `output_lo`/`output_hi`
/// (typically the configured condition ranges).
TrainResult train(const Dataset& ds, const TrainConfig& cfg,
                  const std::vector<double>& output_lo,
                  const std::vector<double>& output_hi,
                  const std::vector<std::string>& target_units = {});

void save_model(const SensingModel& model, const std::string& path);
SensingModel load_model(const std::string& path);

}  // namespace metaiot
