#include "metaiot/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace metaiot {

void ChannelParams::validate() const {
  if (!(tx_power_w > 0.0)) throw ConfigError("tx_power_w must be positive");
  if (!(distance_m > 0.0)) throw ConfigError("distance_m must be positive");
  if (!(wall_reflection >= 0.0 && wall_reflection <= 1.0)) {
    throw ConfigError("wall_reflection must lie in [0, 1]");
  }
  if (!(bias_power_w > 0.0)) throw ConfigError("bias_power_w must be positive");
  if (!(bias_power_w < 0.01 * tx_power_w)) {
    throw ConfigError("bias_power_w must be below 1% of tx_power_w");
  }
  if (!(noise_std_db >= 0.0)) throw ConfigError("noise_std_db must be >= 0");
  if (!(wave_speed_mps > 0.0)) throw ConfigError("wave_speed_mps must be positive");
  if (!(beam_area_m2 > 0.0)) throw ConfigError("beam_area_m2 must be positive");
  if (!(ref_distance_m > 0.0)) throw ConfigError("ref_distance_m must be positive");
  if (array.count_x < 1 || array.count_y < 1 || array.units_per_sensor < 1 ||
      !(array.sensor_side_m > 0.0)) {
    throw ConfigError("sensor array geometry must be positive");
  }
  try {
    area_fractions(*this);  // rejects arrays larger than the beam footprint
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

void FrequencyGrid::validate() const {
  if (n_points < 1) throw ConfigError("frequency grid needs at least one point");
  if (!(f_lb_hz > 0.0)) throw ConfigError("f_lb_hz must be positive");
  if (!(f_lb_hz <= f_ub_hz)) throw ConfigError("f_lb_hz must not exceed f_ub_hz");
  if (n_points > 1 && !(f_lb_hz < f_ub_hz)) {
    throw ConfigError("multi-point frequency grid needs f_lb_hz < f_ub_hz");
  }
}

std::vector<double> FrequencyGrid::frequencies() const {
  validate();
  if (n_points == 1) return {f_lb_hz};
  std::vector<double> out(static_cast<std::size_t>(n_points));
  const double step = (f_ub_hz - f_lb_hz) / static_cast<double>(n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    out[static_cast<std::size_t>(i)] = f_lb_hz + step * static_cast<double>(i);
  }
  out.back() = f_ub_hz;
  return out;
}

double pathloss(double f_hz, double distance_m, double alpha, double wave_speed_mps) {
  if (!(f_hz > 0.0)) throw DomainError("pathloss frequency must be positive");
  if (!(distance_m > 0.0)) throw DomainError("pathloss distance must be positive");
  if (!(wave_speed_mps > 0.0)) throw DomainError("wave speed must be positive");
  const double wavelength_term = wave_speed_mps / (4.0 * std::numbers::pi * f_hz);
  return wavelength_term * wavelength_term *
         std::pow(1.0 / (2.0 * distance_m), alpha);
}

AreaFractions area_fractions(const ChannelParams& cp) {
  const double footprint = cp.beam_area_m2 *
                           (cp.distance_m / cp.ref_distance_m) *
                           (cp.distance_m / cp.ref_distance_m);
  if (!(footprint > 0.0)) throw DomainError("beam footprint must be positive");
  const double sensor = cp.array.area_m2() / footprint;
  if (sensor > 1.0) {
    std::ostringstream msg;
    msg << "sensor array (" << cp.array.area_m2() << " m^2) exceeds the beam footprint ("
        << footprint << " m^2) at distance " << cp.distance_m << " m";
    throw DomainError(msg.str());
  }
  return {sensor, 1.0 - sensor};
}

double expected_rx_power_db(double f_hz, const ConditionVector& c,
                            const StructureVector& d, const ChannelParams& cp,
                            const SensorCircuitParams& circuit,
                            const CorrectionTable* table) {
  const double pl = pathloss(f_hz, cp.distance_m, cp.pathloss_exponent, cp.wave_speed_mps);
  const AreaFractions eta = area_fractions(cp);
  const double gamma = fitted_gamma(f_hz, c, d, circuit, table);
  const double reflected = eta.environment * cp.tx_power_w * cp.wall_reflection +
                           eta.sensor * cp.tx_power_w * gamma;
  return to_dbm(pl * reflected + cp.bias_power_w);
}

double sample_rx_power_db(double f_hz, const ConditionVector& c,
                          const StructureVector& d, const ChannelParams& cp,
                          const SensorCircuitParams& circuit, Rng& rng,
                          const CorrectionTable* table) {
  double tau = expected_rx_power_db(f_hz, c, d, cp, circuit, table);
  if (cp.noise_std_db > 0.0) tau += rng.gaussian(0.0, cp.noise_std_db);
  return tau;
}

ReceivedPowerVector rx_power_vector(const ConditionVector& c, const StructureVector& d,
                                    const ChannelParams& cp, const FrequencyGrid& grid,
                                    const SensorCircuitParams& circuit, Rng& rng,
                                    const CorrectionTable* table) {
  ReceivedPowerVector out;
  const auto freqs = grid.frequencies();
  out.reserve(freqs.size());
  for (double f : freqs) {
    out.push_back(sample_rx_power_db(f, c, d, cp, circuit, rng, table));
  }
  return out;
}

void SystemModel::validate() const {
  circuit.validate();
  channel.validate();
  freqs.validate();
}

std::vector<double> expected_spectrum_db(const SystemModel& system,
                                         const ConditionVector& c,
                                         const StructureVector& d) {
  const auto freqs = system.freqs.frequencies();
  std::vector<double> tau;
  tau.reserve(freqs.size());
  for (double f : freqs) {
    tau.push_back(expected_rx_power_db(f, c, d, system.channel, system.circuit,
                                       system.table()));
  }
  return tau;
}

}  // namespace metaiot
