#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "metaiot/channel.hpp"
#include "metaiot/rng.hpp"

using namespace metaiot;

namespace {

MaterialModel constant_material(double sigma) {
  MaterialModel m;
  m.kind = MaterialKind::ExponentialHumidity;
  m.sigma_ref_spm = sigma;
  m.sensitivity = 0.0;
  return m;
}

SensorCircuitParams one_unit_circuit() {
  UnitCircuitParams u;
  u.inductance_h = 10e-9;
  u.capacitance_f = 0.1e-12;
  u.gap_capacitance_fmm = 0.2e-12;
  u.ring_width_mm = 0.8;
  u.ring_height_mm = 0.6;
  u.material = constant_material(8.0);
  SensorCircuitParams p;
  p.units = {u};
  return p;
}

ChannelParams toy_channel() {
  ChannelParams cp;
  cp.tx_power_w = 0.1;
  cp.distance_m = 2.0;
  cp.pathloss_exponent = 2.0;
  cp.wall_reflection = 0.3;
  cp.bias_power_w = 1e-9;
  cp.noise_std_db = 1.0;
  cp.wave_speed_mps = 3e8;
  cp.beam_area_m2 = 1.0;
  cp.ref_distance_m = 1.0;
  cp.array = {2, 2, 0.1, 1};
  return cp;
}

}  // namespace

TEST_CASE("pathloss follows its power laws") {
  const double base = pathloss(5e9, 1.0, 2.0, 3e8);
  CHECK(pathloss(5e9, 2.0, 2.0, 3e8) ==
        doctest::Approx(base * std::pow(2.0, -2.0)).epsilon(1e-12));
  CHECK(pathloss(10e9, 1.0, 2.0, 3e8) == doctest::Approx(base / 4.0).epsilon(1e-12));
  const double base3 = pathloss(5e9, 1.0, 3.0, 3e8);
  CHECK(pathloss(5e9, 2.0, 3.0, 3e8) ==
        doctest::Approx(base3 * std::pow(2.0, -3.0)).epsilon(1e-12));
}

TEST_CASE("pathloss matches the arithmetic oracle") {
  // Frozen from an independent high-precision evaluation.
  CHECK(pathloss(5e9, 1.0, 2.0, 3e8) ==
        doctest::Approx(5.6993165798814996437e-6).epsilon(1e-12));
  CHECK(pathloss(5e9, 1.0, 2.0, 3e8) < 1.0);
}

TEST_CASE("pathloss rejects nonpositive inputs") {
  CHECK_THROWS_AS(pathloss(0.0, 1.0, 2.0, 3e8), DomainError);
  CHECK_THROWS_AS(pathloss(5e9, 0.0, 2.0, 3e8), DomainError);
  CHECK_THROWS_AS(pathloss(5e9, 1.0, 2.0, 0.0), DomainError);
}

TEST_CASE("area fractions sum to one and scale with distance") {
  ChannelParams cp = toy_channel();
  const auto eta = area_fractions(cp);
  CHECK(std::abs(eta.sensor + eta.environment - 1.0) <= 1e-15);

  ChannelParams far = cp;
  far.distance_m = 2.0 * cp.distance_m;
  CHECK(area_fractions(far).sensor == doctest::Approx(eta.sensor / 4.0).epsilon(1e-12));
}

TEST_CASE("full-coverage boundary gives eta_ms of one") {
  ChannelParams cp = toy_channel();
  cp.distance_m = cp.ref_distance_m;
  cp.beam_area_m2 = cp.array.area_m2();
  const auto eta = area_fractions(cp);
  CHECK(eta.sensor == 1.0);
  CHECK(eta.environment == 0.0);
}

TEST_CASE("an array larger than the beam footprint is a geometry error") {
  ChannelParams cp = toy_channel();
  cp.distance_m = 0.05;
  CHECK_THROWS_AS(area_fractions(cp), DomainError);
  CHECK_THROWS_AS(cp.validate(), ConfigError);
}

TEST_CASE("area fractions sum to one over random parameters") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    ChannelParams cp = toy_channel();
    cp.beam_area_m2 = rng.uniform(0.5, 10.0);
    cp.ref_distance_m = rng.uniform(0.5, 2.0);
    cp.distance_m = rng.uniform(1.0, 10.0);
    cp.array.sensor_side_m = rng.uniform(0.01, 0.1);
    const auto eta = area_fractions(cp);
    CHECK(std::abs(eta.sensor + eta.environment - 1.0) <= 1e-15);
  }
}

TEST_CASE("dBm conversion round-trips") {
  for (double w : {1e-12, 3.7e-8, 1e-3, 0.25, 10.0}) {
    CHECK(from_dbm(to_dbm(w)) == doctest::Approx(w).epsilon(1e-12));
  }
  CHECK(to_dbm(1e-3) == 0.0);  // dBm reference
}

TEST_CASE("bias dominance when the sensor reflects like the wall") {
  // A correction table pins gamma to the wall coefficient, making the power
  // split irrelevant.
  ChannelParams cp = toy_channel();
  const SensorCircuitParams circuit = one_unit_circuit();
  const double f = 4e9;
  const double raw = fitted_gamma(f, {0.0}, {2.0}, circuit);
  const double factor = cp.wall_reflection / raw;
  const CorrectionTable pin({1e9, 10e9}, {{1.0, 5.0}},
                            {factor, factor, factor, factor});

  const double tau = expected_rx_power_db(f, {0.0}, {2.0}, cp, circuit, &pin);
  const double pl = pathloss(f, cp.distance_m, cp.pathloss_exponent, cp.wave_speed_mps);
  const double expected =
      to_dbm(pl * cp.tx_power_w * cp.wall_reflection + cp.bias_power_w);
  CHECK(tau == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("expected power increases with transmit power and decreases with distance") {
  ChannelParams cp = toy_channel();
  const SensorCircuitParams circuit = one_unit_circuit();
  double prev = -1e300;
  for (double p : {0.001, 0.01, 0.1, 1.0}) {
    ChannelParams c2 = cp;
    c2.tx_power_w = p;
    const double tau = expected_rx_power_db(4e9, {0.0}, {2.0}, c2, circuit);
    CHECK(tau > prev);
    prev = tau;
  }
  prev = 1e300;
  for (double d : {1.0, 2.0, 4.0, 8.0}) {
    ChannelParams c2 = cp;
    c2.distance_m = d;
    const double tau = expected_rx_power_db(4e9, {0.0}, {2.0}, c2, circuit);
    CHECK(tau < prev);
    prev = tau;
  }
}

TEST_CASE("expected power equals the composed chain of its parts") {
  const ChannelParams cp = toy_channel();
  const SensorCircuitParams circuit = one_unit_circuit();
  const double f = 3.3e9;
  const double pl = pathloss(f, cp.distance_m, cp.pathloss_exponent, cp.wave_speed_mps);
  const auto eta = area_fractions(cp);
  const double gamma = fitted_gamma(f, {0.0}, {2.5}, circuit);
  const double manual = to_dbm(
      pl * (eta.environment * cp.tx_power_w * cp.wall_reflection +
            eta.sensor * cp.tx_power_w * gamma) +
      cp.bias_power_w);
  CHECK(expected_rx_power_db(f, {0.0}, {2.5}, cp, circuit) ==
        doctest::Approx(manual).epsilon(1e-14));
}

TEST_CASE("zero noise sampling is exact and seeded sampling reproduces") {
  ChannelParams cp = toy_channel();
  const SensorCircuitParams circuit = one_unit_circuit();
  cp.noise_std_db = 0.0;
  Rng rng(1);
  CHECK(sample_rx_power_db(4e9, {0.0}, {2.0}, cp, circuit, rng) ==
        expected_rx_power_db(4e9, {0.0}, {2.0}, cp, circuit));

  cp.noise_std_db = 1.5;
  const FrequencyGrid grid{2e9, 8e9, 8};
  Rng a(42), b(42);
  const auto va = rx_power_vector({0.0}, {2.0}, cp, grid, circuit, a);
  const auto vb = rx_power_vector({0.0}, {2.0}, cp, grid, circuit, b);
  CHECK(va == vb);
  CHECK(va.size() == 8);
}

TEST_CASE("noise sample moments match the configured std") {
  ChannelParams cp = toy_channel();
  cp.noise_std_db = 2.0;
  const SensorCircuitParams circuit = one_unit_circuit();
  const double tau = expected_rx_power_db(4e9, {0.0}, {2.0}, cp, circuit);

  Rng rng(777);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = sample_rx_power_db(4e9, {0.0}, {2.0}, cp, circuit, rng);
    sum += s - tau;
    sum_sq += (s - tau) * (s - tau);
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 * cp.noise_std_db / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(cp.noise_std_db * cp.noise_std_db).epsilon(0.05));
}

TEST_CASE("noise draws are uncorrelated across frequencies") {
  ChannelParams cp = toy_channel();
  cp.noise_std_db = 1.0;
  const SensorCircuitParams circuit = one_unit_circuit();
  const FrequencyGrid grid{2e9, 8e9, 4};
  const std::vector<double> tau = [&] {
    SystemModel system{circuit, cp, grid, std::nullopt};
    return expected_spectrum_db(system, {0.0}, {2.0});
  }();

  Rng rng(31);
  const int n = 10000;
  std::vector<std::vector<double>> noise(static_cast<std::size_t>(n));
  for (auto& row : noise) {
    row = rx_power_vector({0.0}, {2.0}, cp, grid, circuit, rng);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= tau[i];
  }
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      double saa = 0.0, sbb = 0.0, sab = 0.0;
      for (const auto& row : noise) {
        saa += row[a] * row[a];
        sbb += row[b] * row[b];
        sab += row[a] * row[b];
      }
      CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 0.05);
    }
  }
}

TEST_CASE("frequency grids are inclusive and degenerate to a single point") {
  const FrequencyGrid grid{2e9, 8e9, 4};
  const auto f = grid.frequencies();
  CHECK(f.front() == 2e9);
  CHECK(f.back() == 8e9);
  CHECK(f[1] == doctest::Approx(4e9));

  const FrequencyGrid single{5e9, 5e9, 1};
  CHECK(single.frequencies() == std::vector<double>{5e9});

  FrequencyGrid bad{8e9, 2e9, 4};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  FrequencyGrid zero{0.0, 2e9, 4};
  CHECK_THROWS_AS(zero.validate(), ConfigError);
}

TEST_CASE("channel validation enforces the bias bound") {
  ChannelParams cp = toy_channel();
  cp.bias_power_w = cp.tx_power_w;  // not << P
  CHECK_THROWS_AS(cp.validate(), ConfigError);
  cp.bias_power_w = 0.009 * cp.tx_power_w;
  CHECK_NOTHROW(cp.validate());
}
