#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "metaiot/pipeline.hpp"
#include "metaiot/rng.hpp"
#include "metaiot/sensefn.hpp"

using namespace metaiot;

namespace {

SensingModel random_model(int n_in, int n_hidden, int n_out, Activation act, Rng& rng) {
  SensingModel model;
  model.n_in = n_in;
  model.n_hidden = n_hidden;
  model.n_out = n_out;
  model.activation = act;
  auto fill = [&](std::vector<double>& v, std::size_t count, double scale) {
    v.resize(count);
    for (double& x : v) x = rng.uniform(-scale, scale);
  };
  fill(model.w1, static_cast<std::size_t>(n_hidden) * static_cast<std::size_t>(n_in), 0.8);
  fill(model.b1, static_cast<std::size_t>(n_hidden), 0.3);
  fill(model.w2, static_cast<std::size_t>(n_out) * static_cast<std::size_t>(n_hidden), 0.8);
  fill(model.b2, static_cast<std::size_t>(n_out), 0.3);
  model.input_mean.assign(static_cast<std::size_t>(n_in), 0.0);
  model.input_std.assign(static_cast<std::size_t>(n_in), 1.0);
  model.output_min.assign(static_cast<std::size_t>(n_out), 0.0);
  model.output_max.assign(static_cast<std::size_t>(n_out), 1.0);
  return model;
}

std::vector<DatasetRecord> random_batch(int n_in, int n_out, int count, Rng& rng) {
  std::vector<DatasetRecord> batch(static_cast<std::size_t>(count));
  for (auto& rec : batch) {
    rec.power_db.resize(static_cast<std::size_t>(n_in));
    for (double& v : rec.power_db) v = rng.gaussian(0.0, 1.0);
    rec.condition.resize(static_cast<std::size_t>(n_out));
    for (double& v : rec.condition) v = rng.uniform(0.0, 1.0);
  }
  return batch;
}

/// Central finite differences of the training loss, the gradient oracle.
std::vector<double> fd_gradient(SensingModel model,
                                const std::vector<DatasetRecord>& batch, double step) {
  auto params = model.flat_parameters();
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + step;
    model.set_flat_parameters(params);
    const double up = training_loss(model, batch);
    params[i] = keep - step;
    model.set_flat_parameters(params);
    const double down = training_loss(model, batch);
    params[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  model.set_flat_parameters(params);
  return grad;
}

Dataset linear_toy_dataset(int count) {
  Dataset ds;
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    DatasetRecord rec;
    rec.power_db = {-40.0 + 10.0 * t, -50.0 - 5.0 * t};
    rec.condition = {10.0 + 20.0 * t};
    rec.measurement_index = 1;
    ds.records.push_back(std::move(rec));
  }
  ds.n_freq = 2;
  return ds;
}

}  // namespace

TEST_CASE("dataset generation is reproducible and counts out") {
  const RunConfig cfg = default_run_config();
  const ConditionGrid grid = cfg.condition_grid();
  const StructureVector d{2.0, 3.0};

  const Dataset a = generate_dataset(cfg.system, grid, d, 10, 42, 1);
  CHECK(a.records.size() == 810);  // 81 conditions x 10 measurements
  CHECK(a.records[0].power_db.size() ==
        static_cast<std::size_t>(cfg.system.freqs.n_points));
  CHECK(a.records[0].measurement_index == 1);
  CHECK(a.records[9].measurement_index == 10);

  const Dataset b = generate_dataset(cfg.system, grid, d, 10, 42, 4);
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].power_db == b.records[i].power_db);
    CHECK(a.records[i].condition == b.records[i].condition);
  }

  const Dataset c = generate_dataset(cfg.system, grid, d, 10, 43, 1);
  CHECK(c.records[0].power_db != a.records[0].power_db);
}

TEST_CASE("zero noise duplicates the expected spectrum per condition") {
  RunConfig cfg = default_run_config();
  cfg.system.channel.noise_std_db = 0.0;
  const ConditionGrid grid =
      ConditionGrid::regular({{5.0, 15.0, 5.0, ""}, {20.0, 30.0, 5.0, ""}});
  const Dataset ds = generate_dataset(cfg.system, grid, {2.0, 3.0}, 3, 7, 1);
  REQUIRE(ds.records.size() == 27);
  for (std::size_t j = 0; j < 9; ++j) {
    const auto tau = expected_spectrum_db(cfg.system, grid.point(j), {2.0, 3.0});
    for (int m = 0; m < 3; ++m) {
      CHECK(ds.records[j * 3 + static_cast<std::size_t>(m)].power_db == tau);
    }
  }
}

TEST_CASE("noise across many measurements matches the configured std") {
  RunConfig cfg = default_run_config();
  cfg.system.channel.noise_std_db = 1.5;
  cfg.system.freqs = {4e9, 5e9, 2};
  const ConditionGrid grid = ConditionGrid::from_points({{25.0, 40.0}});
  const int n = 10000;
  const Dataset ds = generate_dataset(cfg.system, grid, {2.0, 3.0}, n, 99, 1);
  const auto tau = expected_spectrum_db(cfg.system, grid.point(0), {2.0, 3.0});
  for (std::size_t i = 0; i < 2; ++i) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& rec : ds.records) {
      const double e = rec.power_db[i] - tau[i];
      sum += e;
      sum_sq += e * e;
    }
    const double mean = sum / n;
    const double std_dev = std::sqrt(sum_sq / n - mean * mean);
    CHECK(std_dev == doctest::Approx(1.5).epsilon(0.05));
  }
}

TEST_CASE("zero parameters map to the output floor") {
  SensingModel model;
  model.n_in = 3;
  model.n_hidden = 4;
  model.n_out = 2;
  model.w1.assign(12, 0.0);
  model.b1.assign(4, 0.0);
  model.w2.assign(8, 0.0);
  model.b2.assign(2, 0.0);
  model.input_mean.assign(3, 0.0);
  model.input_std.assign(3, 1.0);
  model.output_min = {0.0, 0.0};
  model.output_max = {1.0, 1.0};
  CHECK(forward(model, {1.0, -2.0, 3.0}) == ConditionVector{0.0, 0.0});
}

TEST_CASE("a one-hidden-node network matches the hand computation") {
  SensingModel model;
  model.n_in = 2;
  model.n_hidden = 1;
  model.n_out = 1;
  model.activation = Activation::Sigmoid;
  model.w1 = {0.5, -0.25};
  model.b1 = {0.125};
  model.w2 = {2.0};
  model.b2 = {0.25};
  model.input_mean = {0.0, 0.0};
  model.input_std = {1.0, 1.0};
  model.output_min = {10.0};
  model.output_max = {30.0};

  const double pre = 0.5 * 1.0 - 0.25 * 2.0 + 0.125;
  const double hidden = 1.0 / (1.0 + std::exp(-pre));
  const double expected = 10.0 + (2.0 * hidden + 0.25) * 20.0;
  CHECK(forward(model, {1.0, 2.0})[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("forward is invariant under hidden-unit permutation") {
  // Dyadic weights keep the permuted sums exact.
  SensingModel model;
  model.n_in = 2;
  model.n_hidden = 2;
  model.n_out = 1;
  model.w1 = {0.5, 0.25, -0.75, 0.125};
  model.b1 = {0.25, -0.5};
  model.w2 = {1.5, -0.5};
  model.b2 = {0.125};
  model.input_mean = {0.0, 0.0};
  model.input_std = {1.0, 1.0};
  model.output_min = {0.0};
  model.output_max = {1.0};

  SensingModel swapped = model;
  swapped.w1 = {-0.75, 0.125, 0.5, 0.25};
  swapped.b1 = {-0.5, 0.25};
  swapped.w2 = {-0.5, 1.5};

  const ReceivedPowerVector p{0.5, -1.25};
  CHECK(forward(model, p) == forward(swapped, p));
}

TEST_CASE("rmse follows its definition") {
  // A model that always outputs (3, 4) against a zero target.
  SensingModel model;
  model.n_in = 1;
  model.n_hidden = 1;
  model.n_out = 2;
  model.w1 = {0.0};
  model.b1 = {0.0};
  model.w2 = {0.0, 0.0};
  model.b2 = {3.0, 4.0};
  model.input_mean = {0.0};
  model.input_std = {1.0};
  model.output_min = {0.0, 0.0};
  model.output_max = {1.0, 1.0};

  Dataset ds;
  ds.records.push_back({{0.0, 0.0}, {5.0}, 1});
  CHECK(rmse(model, ds) == doctest::Approx(std::sqrt(25.0 / 2.0)).epsilon(1e-15));

  // Perfect predictor.
  model.b2 = {0.0, 0.0};
  CHECK(rmse(model, ds) == 0.0);

  Dataset empty;
  CHECK_THROWS_AS(rmse(model, empty), DomainError);
}

TEST_CASE("rmse matches a brute-force loop on random data") {
  Rng rng(8);
  const SensingModel model = random_model(4, 5, 2, Activation::Tanh, rng);
  Dataset ds;
  for (int i = 0; i < 17; ++i) {
    DatasetRecord rec;
    rec.power_db = {rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
    rec.condition = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    ds.records.push_back(std::move(rec));
  }
  double total = 0.0;
  for (const auto& rec : ds.records) {
    const auto est = forward(model, rec.power_db);
    for (std::size_t k = 0; k < 2; ++k) {
      total += (est[k] - rec.condition[k]) * (est[k] - rec.condition[k]);
    }
  }
  CHECK(rmse(model, ds) == doctest::Approx(std::sqrt(total / (17.0 * 2.0))).epsilon(1e-13));
}

TEST_CASE("a perfect predictor has a zero gradient") {
  SensingModel model;
  model.n_in = 2;
  model.n_hidden = 2;
  model.n_out = 1;
  model.w1.assign(4, 0.0);
  model.b1.assign(2, 0.0);
  model.w2.assign(2, 0.0);
  model.b2 = {0.75};
  model.input_mean = {0.0, 0.0};
  model.input_std = {1.0, 1.0};
  model.output_min = {0.0};
  model.output_max = {1.0};

  std::vector<DatasetRecord> batch{{{0.75}, {1.0, 2.0}, 1}};  // condition 0.75
  const auto grad = gradient(model, batch);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backprop matches central finite differences for every activation") {
  Rng rng(31415);
  for (Activation act : {Activation::Sigmoid, Activation::Tanh, Activation::Relu,
                         Activation::Softmax}) {
    for (int trial = 0; trial < 5; ++trial) {
      const SensingModel model = random_model(6, 5, 2, act, rng);
      const auto batch = random_batch(6, 2, 4, rng);
      const auto analytic = gradient(model, batch);
      const auto numeric = fd_gradient(model, batch, 1e-5);
      REQUIRE(analytic.size() == numeric.size());
      for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
        CHECK(std::abs(analytic[i] - numeric[i]) / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
  Rng rng(1234);
  const SensingModel model = random_model(3, 4, 2, Activation::Sigmoid, rng);
  const auto batch = random_batch(3, 2, 5, rng);
  std::vector<DatasetRecord> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  const auto g1 = gradient(model, batch);
  const auto g2 = gradient(model, doubled);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-13));
  }
}

TEST_CASE("a zero learning rate leaves the initial weights untouched") {
  const Dataset ds = linear_toy_dataset(16);
  TrainConfig cfg;
  cfg.hidden_nodes = 4;
  cfg.learning_rate = 0.0;
  cfg.epochs = 5;
  cfg.seed = 3;
  const auto result = train(ds, cfg, {10.0}, {30.0});

  TrainConfig one_epoch = cfg;
  one_epoch.epochs = 1;
  const auto again = train(ds, one_epoch, {10.0}, {30.0});
  CHECK(result.model.w1 == again.model.w1);
  CHECK(result.model.w2 == again.model.w2);
  CHECK(result.model.b1 == again.model.b1);
  CHECK(result.model.b2 == again.model.b2);
}

TEST_CASE("training shrinks the loss on a noiseless linear toy problem") {
  const Dataset ds = linear_toy_dataset(32);
  TrainConfig cfg;
  cfg.hidden_nodes = 8;
  cfg.learning_rate = 0.2;
  cfg.epochs = 400;
  cfg.seed = 5;
  const auto result = train(ds, cfg, {10.0}, {30.0});
  REQUIRE(result.train_rmse_history.size() == 400);
  for (int e = 1; e < 10; ++e) {
    CHECK(result.train_rmse_history[static_cast<std::size_t>(e)] <=
          result.train_rmse_history[static_cast<std::size_t>(e - 1)]);
  }
  CHECK(result.train_rmse_history.back() < 0.1 * result.train_rmse_history.front());
  CHECK(result.best_rmse <=
        *std::min_element(result.val_rmse_history.begin(), result.val_rmse_history.end()));
}

TEST_CASE("training is deterministic for a fixed seed") {
  const Dataset ds = linear_toy_dataset(16);
  TrainConfig cfg;
  cfg.hidden_nodes = 6;
  cfg.learning_rate = 0.3;
  cfg.epochs = 50;
  cfg.seed = 11;
  const auto a = train(ds, cfg, {10.0}, {30.0});
  const auto b = train(ds, cfg, {10.0}, {30.0});
  CHECK(a.train_rmse_history == b.train_rmse_history);
  CHECK(a.model.w1 == b.model.w1);

  cfg.seed = 12;
  const auto c = train(ds, cfg, {10.0}, {30.0});
  CHECK(a.train_rmse_history != c.train_rmse_history);
}

TEST_CASE("mini-batch order is seeded and the split checkpoint works") {
  RunConfig run = default_run_config();
  run.system.channel.noise_std_db = 0.5;
  const ConditionGrid grid =
      ConditionGrid::regular({{5.0, 25.0, 10.0, ""}, {20.0, 40.0, 10.0, ""}});
  const Dataset ds = generate_dataset(run.system, grid, {2.0, 3.0}, 6, 17, 1);

  TrainConfig cfg;
  cfg.hidden_nodes = 8;
  cfg.learning_rate = 0.3;
  cfg.epochs = 30;
  cfg.batch_size = 8;
  cfg.validation_split = 0.25;
  cfg.seed = 21;
  const auto [lo, hi] = grid.value_ranges();
  const auto a = train(ds, cfg, lo, hi);
  const auto b = train(ds, cfg, lo, hi);
  CHECK(a.val_rmse_history == b.val_rmse_history);
  CHECK(a.best_rmse ==
        *std::min_element(a.val_rmse_history.begin(), a.val_rmse_history.end()));
}

TEST_CASE("training config validation") {
  TrainConfig cfg;
  cfg.learning_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.learning_rate = 0.5;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.epochs = 10;
  cfg.validation_split = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("model files round-trip bit for bit") {
  Rng rng(2718);
  SensingModel model = random_model(5, 3, 2, Activation::Tanh, rng);
  model.input_mean = {0.1, -0.2, 0.3, 1e-17, 4.0};
  model.input_std = {1.0, 2.0, 0.5, 1.0, 3.0};
  model.output_min = {5.0, 20.0};
  model.output_max = {45.0, 60.0};
  model.target_units = {"degC", "%RH"};

  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "metaiot_model_test.txt";
  save_model(model, path.string());
  const SensingModel loaded = load_model(path.string());

  CHECK(loaded.n_in == model.n_in);
  CHECK(loaded.activation == model.activation);
  CHECK(loaded.w1 == model.w1);
  CHECK(loaded.b1 == model.b1);
  CHECK(loaded.w2 == model.w2);
  CHECK(loaded.b2 == model.b2);
  CHECK(loaded.input_mean == model.input_mean);
  CHECK(loaded.input_std == model.input_std);
  CHECK(loaded.output_min == model.output_min);
  CHECK(loaded.output_max == model.output_max);
  CHECK(loaded.target_units == model.target_units);

  const ReceivedPowerVector p{0.3, -1.2, 0.9, 2.2, -0.1};
  CHECK(forward(loaded, p) == forward(model, p));
  fs::remove(path);

  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), ConfigError);
}
