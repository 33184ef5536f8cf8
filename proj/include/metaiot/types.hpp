#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace metaiot {

inline constexpr const char* kVersion = "0.1.0";

/// Impedance of free space, ohms.
inline constexpr double kFreeSpaceImpedanceOhm = 377.0;

/// Default signal propagation speed, m/s.
inline constexpr double kSpeedOfLightMps = 299792458.0;

/// Gap widths of the sensing units, one per unit, in mm.
using StructureVector = std::vector<double>;

/// Sensing target condition values, one per target (e.g. degC, %RH).
using ConditionVector = std::vector<double>;

/// Received power samples in dBm, one per probe frequency.
using ReceivedPowerVector = std::vector<double>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad or inconsistent configuration. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Numeric input outside the physical or configured domain.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Training diverged or produced non-finite values.
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& msg) : Error(msg) {}
};

}  // namespace metaiot
