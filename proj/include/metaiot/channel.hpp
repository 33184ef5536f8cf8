#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "metaiot/circuit.hpp"
#include "metaiot/rng.hpp"
#include "metaiot/types.hpp"

namespace metaiot {

/// Power in dBm (reference 1 mW); all persisted dB values use this convention.
inline double to_dbm(double power_w) { return 10.0 * std::log10(power_w / 1e-3); }
inline double from_dbm(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

/// Geometry of the reflector array mounted on the wall.
struct SensorArrayGeometry {
  int count_x = 1;
  int count_y = 1;
  double sensor_side_m = 0.1;  // side length of one sensor patch
  int units_per_sensor = 2;

  double area_m2() const {
    return static_cast<double>(units_per_sensor) * sensor_side_m * sensor_side_m *
           static_cast<double>(count_x) * static_cast<double>(count_y);
  }
};

struct ChannelParams {
  double tx_power_w = 0.1;
  double distance_m = 2.0;
  double pathloss_exponent = 2.0;
  double wall_reflection = 0.3;       // power reflection coefficient of the wall
  double bias_power_w = 1e-9;         // receiver bias, must stay << tx power
  double noise_std_db = 1.0;          // measurement noise std, dB
  double wave_speed_mps = kSpeedOfLightMps;
  double beam_area_m2 = 1.0;          // antenna coverage area at the reference distance
  double ref_distance_m = 1.0;
  SensorArrayGeometry array;

  void validate() const;  // throws ConfigError
};

/// Equally spaced probe frequencies, endpoints included. A single-point grid
/// degenerates to {f_lb}.
struct FrequencyGrid {
  double f_lb_hz = 2e9;
  double f_ub_hz = 8e9;
  int n_points = 16;

  void validate() const;
  std::vector<double> frequencies() const;
};

/// Free-space two-way pathloss factor (linear).
double pathloss(double f_hz, double distance_m, double alpha, double wave_speed_mps);

struct AreaFractions {
  double sensor;       // fraction of beam power hitting the sensor array
  double environment;  // remainder, reflected by the wall
};

/// Beam power split between the sensor array and the surrounding wall.
AreaFractions area_fractions(const ChannelParams& cp);

/// Noise-free expected received power at one frequency, dBm.
double expected_rx_power_db(double f_hz, const ConditionVector& c,
                            const StructureVector& d, const ChannelParams& cp,
                            const SensorCircuitParams& circuit,
                            const CorrectionTable* table = nullptr);

/// One noisy measurement at one frequency, dBm.
double sample_rx_power_db(double f_hz, const ConditionVector& c,
                          const StructureVector& d, const ChannelParams& cp,
                          const SensorCircuitParams& circuit, Rng& rng,
                          const CorrectionTable* table = nullptr);

/// One noisy measurement sweep across the grid; noise draws are independent
/// per frequency.
ReceivedPowerVector rx_power_vector(const ConditionVector& c, const StructureVector& d,
                                    const ChannelParams& cp, const FrequencyGrid& grid,
                                    const SensorCircuitParams& circuit, Rng& rng,
                                    const CorrectionTable* table = nullptr);

/// Everything fixed about the scene; evaluation varies only (c, d).
struct SystemModel {
  SensorCircuitParams circuit;
  ChannelParams channel;
  FrequencyGrid freqs;
  std::optional<CorrectionTable> correction;

  const CorrectionTable* table() const {
    return correction.has_value() ? &*correction : nullptr;
  }
  void validate() const;
};

/// Noise-free expected power spectrum over the whole frequency grid, dBm.
std::vector<double> expected_spectrum_db(const SystemModel& system,
                                         const ConditionVector& c,
                                         const StructureVector& d);

}  // namespace metaiot
