#include "metaiot/sensefn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "metaiot/parallel.hpp"
#include "metaiot/rng.hpp"

namespace metaiot {

Dataset generate_dataset(const SystemModel& system, const ConditionGrid& grid,
                         const StructureVector& d, int n_measurements,
                         std::uint64_t seed, int threads) {
  if (n_measurements < 1) throw ConfigError("need at least one measurement per condition");
  system.validate();

  const std::size_t n_cond = grid.size();
  const std::size_t n_freq = static_cast<std::size_t>(system.freqs.n_points);
  const double sigma = system.channel.noise_std_db;

  Dataset ds;
  ds.structure = d;
  ds.seed = seed;
  ds.n_freq = system.freqs.n_points;
  ds.records.resize(n_cond * static_cast<std::size_t>(n_measurements));

  parallel_for(n_cond, threads, [&](std::size_t j) {
    const auto tau = expected_spectrum_db(system, grid.point(j), d);
    for (int m = 0; m < n_measurements; ++m) {
      DatasetRecord& rec =
          ds.records[j * static_cast<std::size_t>(n_measurements) + static_cast<std::size_t>(m)];
      rec.condition = grid.point(j);
      rec.measurement_index = m + 1;
      rec.power_db = tau;
      if (sigma > 0.0) {
        Rng noise(mix_seed(seed, j, static_cast<std::uint64_t>(m)));
        for (std::size_t i = 0; i < n_freq; ++i) {
          rec.power_db[i] += noise.gaussian(0.0, sigma);
        }
      }
    }
  });
  return ds;
}

Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "softmax") return Activation::Softmax;
  throw ConfigError("unknown activation: " + name);
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

std::size_t SensingModel::parameter_count() const {
  return static_cast<std::size_t>(n_hidden) * static_cast<std::size_t>(n_in) +
         static_cast<std::size_t>(n_hidden) +
         static_cast<std::size_t>(n_out) * static_cast<std::size_t>(n_hidden) +
         static_cast<std::size_t>(n_out);
}

std::vector<double> SensingModel::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.insert(flat.end(), b2.begin(), b2.end());
  return flat;
}

void SensingModel::set_flat_parameters(std::span<const double> w) {
  if (w.size() != parameter_count()) {
    throw DomainError("flat parameter vector has wrong length");
  }
  std::size_t offset = 0;
  auto take = [&](std::vector<double>& dst, std::size_t count) {
    dst.assign(w.begin() + static_cast<std::ptrdiff_t>(offset),
               w.begin() + static_cast<std::ptrdiff_t>(offset + count));
    offset += count;
  };
  take(w1, static_cast<std::size_t>(n_hidden) * static_cast<std::size_t>(n_in));
  take(b1, static_cast<std::size_t>(n_hidden));
  take(w2, static_cast<std::size_t>(n_out) * static_cast<std::size_t>(n_hidden));
  take(b2, static_cast<std::size_t>(n_out));
}

void SensingModel::validate() const {
  if (n_in < 1 || n_hidden < 1 || n_out < 1) {
    throw ConfigError("model layer sizes must be positive");
  }
  auto expect = [](std::size_t got, std::size_t want, const char* what) {
    if (got != want) throw ConfigError(std::string("model field has wrong size: ") + what);
  };
  expect(w1.size(), static_cast<std::size_t>(n_hidden) * static_cast<std::size_t>(n_in), "w1");
  expect(b1.size(), static_cast<std::size_t>(n_hidden), "b1");
  expect(w2.size(), static_cast<std::size_t>(n_out) * static_cast<std::size_t>(n_hidden), "w2");
  expect(b2.size(), static_cast<std::size_t>(n_out), "b2");
  expect(input_mean.size(), static_cast<std::size_t>(n_in), "input_mean");
  expect(input_std.size(), static_cast<std::size_t>(n_in), "input_std");
  expect(output_min.size(), static_cast<std::size_t>(n_out), "output_min");
  expect(output_max.size(), static_cast<std::size_t>(n_out), "output_max");
  for (double s : input_std) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("input_std must be positive");
  }
}

namespace {

void apply_activation(Activation act, std::vector<double>& a) {
  switch (act) {
    case Activation::Sigmoid:
      for (double& v : a) v = 1.0 / (1.0 + std::exp(-v));
      break;
    case Activation::Tanh:
      for (double& v : a) v = std::tanh(v);
      break;
    case Activation::Relu:
      for (double& v : a) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::Softmax: {
      const double peak = *std::max_element(a.begin(), a.end());
      double total = 0.0;
      for (double& v : a) {
        v = std::exp(v - peak);
        total += v;
      }
      for (double& v : a) v /= total;
      break;
    }
  }
}

struct ForwardCache {
  std::vector<double> x_norm;    // normalized input
  std::vector<double> pre_act;   // hidden pre-activation
  std::vector<double> hidden;    // hidden activation
  std::vector<double> y_norm;    // normalized output
};

void forward_normalized(const SensingModel& model, const ReceivedPowerVector& p,
                        ForwardCache& cache) {
  const std::size_t n_in = static_cast<std::size_t>(model.n_in);
  const std::size_t n_hidden = static_cast<std::size_t>(model.n_hidden);
  const std::size_t n_out = static_cast<std::size_t>(model.n_out);
  if (p.size() != n_in) throw DomainError("power vector length does not match model input");

  cache.x_norm.resize(n_in);
  for (std::size_t i = 0; i < n_in; ++i) {
    cache.x_norm[i] = (p[i] - model.input_mean[i]) / model.input_std[i];
  }

  cache.pre_act.assign(n_hidden, 0.0);
  for (std::size_t h = 0; h < n_hidden; ++h) {
    double acc = model.b1[h];
    const double* row = model.w1.data() + h * n_in;
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * cache.x_norm[i];
    cache.pre_act[h] = acc;
  }
  cache.hidden = cache.pre_act;
  apply_activation(model.activation, cache.hidden);

  cache.y_norm.assign(n_out, 0.0);
  for (std::size_t k = 0; k < n_out; ++k) {
    double acc = model.b2[k];
    const double* row = model.w2.data() + k * n_hidden;
    for (std::size_t h = 0; h < n_hidden; ++h) acc += row[h] * cache.hidden[h];
    cache.y_norm[k] = acc;
  }
}

double output_span(const SensingModel& model, std::size_t k) {
  const double span = model.output_max[k] - model.output_min[k];
  return span > 0.0 ? span : 1.0;  // degenerate single-value targets
}

double normalized_target(const SensingModel& model, const ConditionVector& c,
                         std::size_t k) {
  return (c[k] - model.output_min[k]) / output_span(model, k);
}

}  // namespace

ConditionVector forward(const SensingModel& model, const ReceivedPowerVector& p) {
  ForwardCache cache;
  forward_normalized(model, p, cache);
  ConditionVector out(static_cast<std::size_t>(model.n_out));
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = model.output_min[k] + cache.y_norm[k] * output_span(model, k);
  }
  return out;
}

double rmse(const SensingModel& model, const Dataset& ds) {
  if (ds.records.empty()) throw DomainError("rmse over an empty dataset");
  double total = 0.0;
  ForwardCache cache;
  for (const auto& rec : ds.records) {
    forward_normalized(model, rec.power_db, cache);
    for (std::size_t k = 0; k < static_cast<std::size_t>(model.n_out); ++k) {
      const double estimate = model.output_min[k] + cache.y_norm[k] * output_span(model, k);
      const double err = estimate - rec.condition[k];
      total += err * err;
    }
  }
  const double denom = static_cast<double>(ds.records.size()) *
                       static_cast<double>(model.n_out);
  return std::sqrt(total / denom);
}

double training_loss(const SensingModel& model, std::span<const DatasetRecord> batch) {
  if (batch.empty()) throw DomainError("training loss over an empty batch");
  double total = 0.0;
  ForwardCache cache;
  for (const auto& rec : batch) {
    forward_normalized(model, rec.power_db, cache);
    for (std::size_t k = 0; k < static_cast<std::size_t>(model.n_out); ++k) {
      const double err = cache.y_norm[k] - normalized_target(model, rec.condition, k);
      total += err * err;
    }
  }
  return total / (static_cast<double>(batch.size()) * static_cast<double>(model.n_out));
}

std::vector<double> gradient(const SensingModel& model,
                             std::span<const DatasetRecord> batch) {
  if (batch.empty()) throw DomainError("gradient over an empty batch");
  const std::size_t n_in = static_cast<std::size_t>(model.n_in);
  const std::size_t n_hidden = static_cast<std::size_t>(model.n_hidden);
  const std::size_t n_out = static_cast<std::size_t>(model.n_out);

  std::vector<double> dw1(n_hidden * n_in, 0.0);
  std::vector<double> db1(n_hidden, 0.0);
  std::vector<double> dw2(n_out * n_hidden, 0.0);
  std::vector<double> db2(n_out, 0.0);

  const double scale = 2.0 / (static_cast<double>(batch.size()) * static_cast<double>(n_out));
  ForwardCache cache;
  std::vector<double> dy(n_out);
  std::vector<double> dh(n_hidden);
  std::vector<double> da(n_hidden);

  for (const auto& rec : batch) {
    forward_normalized(model, rec.power_db, cache);

    for (std::size_t k = 0; k < n_out; ++k) {
      dy[k] = scale * (cache.y_norm[k] - normalized_target(model, rec.condition, k));
    }

    for (std::size_t k = 0; k < n_out; ++k) {
      const double g = dy[k];
      double* row = dw2.data() + k * n_hidden;
      for (std::size_t h = 0; h < n_hidden; ++h) row[h] += g * cache.hidden[h];
      db2[k] += g;
    }

    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t k = 0; k < n_out; ++k) {
      const double g = dy[k];
      const double* row = model.w2.data() + k * n_hidden;
      for (std::size_t h = 0; h < n_hidden; ++h) dh[h] += g * row[h];
    }

    switch (model.activation) {
      case Activation::Sigmoid:
        for (std::size_t h = 0; h < n_hidden; ++h) {
          da[h] = dh[h] * cache.hidden[h] * (1.0 - cache.hidden[h]);
        }
        break;
      case Activation::Tanh:
        for (std::size_t h = 0; h < n_hidden; ++h) {
          da[h] = dh[h] * (1.0 - cache.hidden[h] * cache.hidden[h]);
        }
        break;
      case Activation::Relu:
        for (std::size_t h = 0; h < n_hidden; ++h) {
          da[h] = cache.pre_act[h] > 0.0 ? dh[h] : 0.0;
        }
        break;
      case Activation::Softmax: {
        double dot = 0.0;
        for (std::size_t h = 0; h < n_hidden; ++h) dot += dh[h] * cache.hidden[h];
        for (std::size_t h = 0; h < n_hidden; ++h) {
          da[h] = cache.hidden[h] * (dh[h] - dot);
        }
        break;
      }
    }

    for (std::size_t h = 0; h < n_hidden; ++h) {
      const double g = da[h];
      if (g == 0.0) continue;
      double* row = dw1.data() + h * n_in;
      for (std::size_t i = 0; i < n_in; ++i) row[i] += g * cache.x_norm[i];
      db1[h] += g;
    }
  }

  std::vector<double> flat;
  flat.reserve(model.parameter_count());
  flat.insert(flat.end(), dw1.begin(), dw1.end());
  flat.insert(flat.end(), db1.begin(), db1.end());
  flat.insert(flat.end(), dw2.begin(), dw2.end());
  flat.insert(flat.end(), db2.begin(), db2.end());
  return flat;
}

void TrainConfig::validate() const {
  if (hidden_nodes < 1) throw ConfigError("hidden_nodes must be positive");
  if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) {
    throw ConfigError("learning_rate must lie in [0, 1]");
  }
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (batch_size < 0) throw ConfigError("batch_size must be >= 0");
  if (!(validation_split >= 0.0 && validation_split < 1.0)) {
    throw ConfigError("validation_split must lie in [0, 1)");
  }
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg,
                  const std::vector<double>& output_lo,
                  const std::vector<double>& output_hi,
                  const std::vector<std::string>& target_units) {
  cfg.validate();
  if (ds.records.empty()) throw ConfigError("training dataset is empty");
  const std::size_t n_in = ds.records[0].power_db.size();
  const std::size_t n_out = ds.records[0].condition.size();
  if (output_lo.size() != n_out || output_hi.size() != n_out) {
    throw ConfigError("output range size does not match target dimension");
  }

  Rng rng(cfg.seed);

  // Deterministic shuffled split; validation takes the tail.
  std::vector<std::size_t> order(ds.records.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  const std::size_t n_val =
      static_cast<std::size_t>(std::floor(cfg.validation_split *
                                          static_cast<double>(order.size())));
  const std::size_t n_train = order.size() - n_val;
  if (n_train == 0) throw ConfigError("validation split leaves no training data");

  std::vector<DatasetRecord> train_set(n_train);
  std::vector<DatasetRecord> val_set(n_val);
  for (std::size_t i = 0; i < n_train; ++i) train_set[i] = ds.records[order[i]];
  for (std::size_t i = 0; i < n_val; ++i) val_set[i] = ds.records[order[n_train + i]];

  SensingModel model;
  model.n_in = static_cast<int>(n_in);
  model.n_hidden = cfg.hidden_nodes;
  model.n_out = static_cast<int>(n_out);
  model.activation = cfg.activation;
  model.output_min = output_lo;
  model.output_max = output_hi;
  model.target_units = target_units;

  // Input statistics from the training subset; constant features fall back to
  // unit scale.
  model.input_mean.assign(n_in, 0.0);
  model.input_std.assign(n_in, 0.0);
  for (const auto& rec : train_set) {
    for (std::size_t i = 0; i < n_in; ++i) model.input_mean[i] += rec.power_db[i];
  }
  for (std::size_t i = 0; i < n_in; ++i) {
    model.input_mean[i] /= static_cast<double>(n_train);
  }
  for (const auto& rec : train_set) {
    for (std::size_t i = 0; i < n_in; ++i) {
      const double diff = rec.power_db[i] - model.input_mean[i];
      model.input_std[i] += diff * diff;
    }
  }
  for (std::size_t i = 0; i < n_in; ++i) {
    model.input_std[i] = std::sqrt(model.input_std[i] / static_cast<double>(n_train));
    if (!(model.input_std[i] > 0.0)) model.input_std[i] = 1.0;
  }

  // Glorot-style uniform init, seeded.
  auto init_layer = [&](std::vector<double>& w, std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w) v = rng.uniform(-bound, bound);
  };
  model.w1.assign(static_cast<std::size_t>(cfg.hidden_nodes) * n_in, 0.0);
  model.b1.assign(static_cast<std::size_t>(cfg.hidden_nodes), 0.0);
  model.w2.assign(n_out * static_cast<std::size_t>(cfg.hidden_nodes), 0.0);
  model.b2.assign(n_out, 0.0);
  init_layer(model.w1, n_in, static_cast<std::size_t>(cfg.hidden_nodes));
  init_layer(model.w2, static_cast<std::size_t>(cfg.hidden_nodes), n_out);

  Dataset train_view;
  train_view.records = train_set;
  Dataset val_view;
  val_view.records = val_set;

  TrainResult result;
  result.model = model;
  result.best_rmse = std::numeric_limits<double>::infinity();
  result.best_epoch = 0;

  const std::size_t batch =
      cfg.batch_size > 0 ? std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n_train)
                         : n_train;
  std::vector<std::size_t> batch_order(n_train);
  std::iota(batch_order.begin(), batch_order.end(), 0);
  std::vector<DatasetRecord> minibatch;

  std::vector<double> params = model.flat_parameters();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (batch < n_train) {
      for (std::size_t i = batch_order.size(); i > 1; --i) {
        std::swap(batch_order[i - 1], batch_order[rng.uniform_index(i)]);
      }
    }
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t stop = std::min(start + batch, n_train);
      std::span<const DatasetRecord> view;
      if (batch < n_train) {
        minibatch.clear();
        for (std::size_t i = start; i < stop; ++i) {
          minibatch.push_back(train_set[batch_order[i]]);
        }
        view = minibatch;
      } else {
        view = train_set;
      }
      const auto grad = gradient(model, view);
      params = model.flat_parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= cfg.learning_rate * grad[i];
      }
      model.set_flat_parameters(params);
    }

    const double train_rmse = rmse(model, train_view);
    const double val_rmse = n_val > 0 ? rmse(model, val_view) : train_rmse;
    if (!std::isfinite(train_rmse) || !std::isfinite(val_rmse)) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch
          << " (learning_rate=" << cfg.learning_rate << ")";
      throw TrainingError(msg.str());
    }
    result.train_rmse_history.push_back(train_rmse);
    result.val_rmse_history.push_back(val_rmse);
    if (val_rmse < result.best_rmse) {
      result.best_rmse = val_rmse;
      result.best_epoch = epoch;
      result.model = model;
    }
  }

  if (!std::isfinite(result.best_rmse)) {
    throw TrainingError("training produced no finite checkpoint");
  }
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_values(std::ostream& out, const char* key, const std::vector<double>& v) {
  out << key;
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

}  // namespace

void save_model(const SensingModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file: " + path);
  out << "metaiot-model v1\n";
  out << "layers " << model.n_in << ' ' << model.n_hidden << ' ' << model.n_out << '\n';
  out << "activation " << activation_name(model.activation) << '\n';
  out << "units";
  for (std::size_t k = 0; k < static_cast<std::size_t>(model.n_out); ++k) {
    std::string unit = k < model.target_units.size() ? model.target_units[k] : "";
    out << ' ' << (unit.empty() ? "-" : unit);
  }
  out << '\n';
  write_values(out, "input_mean", model.input_mean);
  write_values(out, "input_std", model.input_std);
  write_values(out, "output_min", model.output_min);
  write_values(out, "output_max", model.output_max);
  write_values(out, "w1", model.w1);
  write_values(out, "b1", model.b1);
  write_values(out, "w2", model.w2);
  write_values(out, "b2", model.b2);
  if (!out) throw ConfigError("failed writing model file: " + path);
}

SensingModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "metaiot-model" || version != "v1") {
    throw ConfigError("unrecognized model file header in " + path);
  }

  SensingModel model;
  std::string key;
  in >> key;
  if (key != "layers") throw ConfigError("model file missing layer sizes");
  in >> model.n_in >> model.n_hidden >> model.n_out;
  if (!in || model.n_in < 1 || model.n_hidden < 1 || model.n_out < 1) {
    throw ConfigError("model file has invalid layer sizes");
  }
  in >> key;
  if (key != "activation") throw ConfigError("model file missing activation");
  std::string act;
  in >> act;
  model.activation = parse_activation(act);
  in >> key;
  if (key != "units") throw ConfigError("model file missing target units");
  model.target_units.resize(static_cast<std::size_t>(model.n_out));
  for (auto& unit : model.target_units) {
    in >> unit;
    if (unit == "-") unit.clear();
  }

  auto read_values = [&](const char* want, std::vector<double>& dst, std::size_t count) {
    in >> key;
    if (key != want) throw ConfigError(std::string("model file missing field ") + want);
    dst.resize(count);
    for (double& v : dst) in >> v;
    if (!in) throw ConfigError(std::string("model file truncated in field ") + want);
  };
  const std::size_t n_in = static_cast<std::size_t>(model.n_in);
  const std::size_t n_hidden = static_cast<std::size_t>(model.n_hidden);
  const std::size_t n_out = static_cast<std::size_t>(model.n_out);
  read_values("input_mean", model.input_mean, n_in);
  read_values("input_std", model.input_std, n_in);
  read_values("output_min", model.output_min, n_out);
  read_values("output_max", model.output_max, n_out);
  read_values("w1", model.w1, n_hidden * n_in);
  read_values("b1", model.b1, n_hidden);
  read_values("w2", model.w2, n_out * n_hidden);
  read_values("b2", model.b2, n_out);
  model.validate();
  return model;
}

}  // namespace metaiot
