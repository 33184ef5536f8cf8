#include "metaiot/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace metaiot {

namespace {

constexpr double kCelsiusToKelvin = 273.15;

double require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(what) + " must be positive and finite");
  }
  return v;
}

}  // namespace

MaterialKind parse_material_kind(const std::string& name) {
  if (name == "ntc" || name == "temperature-ntc") return MaterialKind::NtcTemperature;
  if (name == "exponential" || name == "humidity-exponential") {
    return MaterialKind::ExponentialHumidity;
  }
  if (name == "table" || name == "table-lookup") return MaterialKind::TableLookup;
  throw ConfigError("unknown material kind: " + name);
}

std::string material_kind_name(MaterialKind kind) {
  switch (kind) {
    case MaterialKind::NtcTemperature: return "ntc";
    case MaterialKind::ExponentialHumidity: return "exponential";
    case MaterialKind::TableLookup: return "table";
  }
  return "?";
}

void MaterialModel::validate() const {
  require_positive(sigma_ref_spm, "material sigma_ref_spm");
  if (condition_dim < 0) throw ConfigError("material condition_dim must be >= 0");
  if (!(range_min < range_max)) throw ConfigError("material range must be non-empty");
  if (kind == MaterialKind::TableLookup) {
    if (table_condition.size() < 2 || table_condition.size() != table_sigma_spm.size()) {
      throw ConfigError("table-lookup material needs >= 2 (condition, sigma) samples");
    }
    if (!std::is_sorted(table_condition.begin(), table_condition.end())) {
      throw ConfigError("table-lookup material conditions must be ascending");
    }
    for (double s : table_sigma_spm) require_positive(s, "table conductivity");
  }
  if (!cross_coeffs.empty() && cross_coeffs.size() != cross_refs.size()) {
    throw ConfigError("material cross_coeffs and cross_refs must have equal length");
  }
}

void UnitCircuitParams::validate() const {
  require_positive(inductance_h, "unit inductance_h");
  require_positive(capacitance_f, "unit capacitance_f");
  require_positive(gap_capacitance_fmm, "unit gap_capacitance_fmm");
  require_positive(ring_width_mm, "unit ring_width_mm");
  require_positive(ring_height_mm, "unit ring_height_mm");
  material.validate();
}

void SensorCircuitParams::validate() const {
  if (units.empty()) throw ConfigError("sensor needs at least one unit");
  require_positive(coupling_capacitance_f, "coupling_capacitance_f");
  require_positive(z0_ohm, "z0_ohm");
  for (const auto& u : units) u.validate();
}

double conductivity(const MaterialModel& material, const ConditionVector& c) {
  const int dim = material.condition_dim;
  if (dim >= static_cast<int>(c.size())) {
    throw DomainError("condition vector shorter than material condition_dim");
  }
  const double value = c[static_cast<std::size_t>(dim)];
  if (!(value >= material.range_min && value <= material.range_max)) {
    std::ostringstream msg;
    msg << "condition " << value << " outside material range [" << material.range_min
        << ", " << material.range_max << "]";
    throw DomainError(msg.str());
  }

  double sigma = 0.0;
  switch (material.kind) {
    case MaterialKind::NtcTemperature: {
      const double t_ref_k = material.ref_value + kCelsiusToKelvin;
      const double t_k = value + kCelsiusToKelvin;
      if (!(t_k > 0.0) || !(t_ref_k > 0.0)) {
        throw DomainError("NTC material requires temperatures above absolute zero");
      }
      sigma = material.sigma_ref_spm *
              std::exp(material.sensitivity * (1.0 / t_ref_k - 1.0 / t_k));
      break;
    }
    case MaterialKind::ExponentialHumidity:
      sigma = material.sigma_ref_spm *
              std::exp(material.sensitivity * (value - material.ref_value));
      break;
    case MaterialKind::TableLookup: {
      const auto& xs = material.table_condition;
      const auto& ys = material.table_sigma_spm;
      if (value < xs.front() || value > xs.back()) {
        throw DomainError("condition outside the material lookup table");
      }
      auto hi = std::lower_bound(xs.begin(), xs.end(), value);
      if (hi == xs.begin()) {
        sigma = ys.front();
      } else {
        std::size_t i1 = static_cast<std::size_t>(hi - xs.begin());
        std::size_t i0 = i1 - 1;
        if (i1 == xs.size()) {
          sigma = ys.back();
        } else {
          double t = (value - xs[i0]) / (xs[i1] - xs[i0]);
          sigma = ys[i0] + t * (ys[i1] - ys[i0]);
        }
      }
      break;
    }
  }

  if (!material.cross_coeffs.empty()) {
    double exponent = 0.0;
    for (std::size_t n = 0; n < material.cross_coeffs.size(); ++n) {
      if (static_cast<int>(n) == dim) continue;
      if (n >= c.size()) break;
      exponent += material.cross_coeffs[n] * (c[n] - material.cross_refs[n]);
    }
    sigma *= std::exp(exponent);
  }

  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("material conductivity is not positive finite");
  }
  return sigma;
}

double gap_resistance_ohm(const UnitCircuitParams& p, const ConditionVector& c,
                          double gap_mm) {
  if (!(gap_mm > 0.0)) throw DomainError("gap width must be positive");
  const double sigma = conductivity(p.material, c);
  // Lengths in mm convert to SI here.
  return (gap_mm * 1e-3) / (sigma * p.ring_width_mm * 1e-3 * p.ring_height_mm * 1e-3);
}

double gap_capacitance_f(const UnitCircuitParams& p, double gap_mm) {
  if (!(gap_mm > 0.0)) throw DomainError("gap width must be positive");
  // The gap capacitance constant is F*mm, so it divides by the width in mm.
  return p.gap_capacitance_fmm / gap_mm;
}

std::complex<double> unit_impedance(double f_hz, const ConditionVector& c,
                                    double gap_mm, const UnitCircuitParams& p) {
  if (!(f_hz > 0.0)) throw DomainError("frequency must be positive");
  if (!(gap_mm > 0.0)) throw DomainError("gap width must be positive");

  const double r_gap = gap_resistance_ohm(p, c, gap_mm);
  const double c_gap = gap_capacitance_f(p, gap_mm);

  const double omega = 2.0 * std::numbers::pi * f_hz;
  const std::complex<double> j(0.0, 1.0);
  const std::complex<double> admittance =
      1.0 / (j * omega * p.inductance_h) + j * omega * p.capacitance_f +
      j * omega * c_gap + 1.0 / r_gap;
  const std::complex<double> z = 1.0 / admittance;
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("unit impedance is not finite");
  }
  return z;
}

std::complex<double> sensor_impedance(double f_hz, const ConditionVector& c,
                                      const StructureVector& d,
                                      const SensorCircuitParams& p) {
  const std::size_t n_units = p.units.size();
  if (d.size() != n_units) {
    throw DomainError("structure vector length does not match unit count");
  }
  if (n_units == 1) return unit_impedance(f_hz, c, d[0], p.units[0]);
  std::complex<double> admittance(0.0, 0.0);
  for (std::size_t n = 0; n < n_units; ++n) {
    admittance += 1.0 / unit_impedance(f_hz, c, d[n], p.units[n]);
  }
  if (n_units > 1) {
    const double omega = 2.0 * std::numbers::pi * f_hz;
    const std::complex<double> j(0.0, 1.0);
    admittance += static_cast<double>(n_units - 1) /
                  (j * omega * p.coupling_capacitance_f);
  }
  return 1.0 / admittance;
}

double reflection_coefficient(std::complex<double> z, double z0_ohm) {
  const std::complex<double> denom = z + z0_ohm;
  if (std::norm(denom) == 0.0) {
    throw DomainError("reflection coefficient singular at z == -z0");
  }
  return std::norm(z - z0_ohm) / std::norm(denom);
}

double fitted_gamma(double f_hz, const ConditionVector& c, const StructureVector& d,
                    const SensorCircuitParams& p, const CorrectionTable* table) {
  double gamma = reflection_coefficient(sensor_impedance(f_hz, c, d, p), p.z0_ohm);
  if (table != nullptr) {
    gamma *= table->factor(f_hz, d);
  }
  return std::clamp(gamma, 0.0, 1.0);
}

CorrectionTable::CorrectionTable(std::vector<double> freqs_hz,
                                 std::vector<std::vector<double>> gap_axes_mm,
                                 std::vector<double> factors)
    : freqs_(std::move(freqs_hz)),
      gap_axes_(std::move(gap_axes_mm)),
      factors_(std::move(factors)) {
  if (freqs_.empty() || gap_axes_.empty()) {
    throw ConfigError("correction table needs at least one frequency and one gap axis");
  }
  if (!std::is_sorted(freqs_.begin(), freqs_.end())) {
    throw ConfigError("correction table frequencies must be ascending");
  }
  std::size_t expected = freqs_.size();
  for (const auto& axis : gap_axes_) {
    if (axis.empty() || !std::is_sorted(axis.begin(), axis.end())) {
      throw ConfigError("correction table gap axes must be non-empty and ascending");
    }
    expected *= axis.size();
  }
  if (factors_.size() != expected) {
    throw ConfigError("correction table is not a complete tensor grid");
  }
  for (double f : factors_) {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw ConfigError("correction factors must be positive finite");
    }
  }
}

CorrectionTable CorrectionTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open correction table: " + path);

  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t columns = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // `freq_hz,d_1_mm,...,factor`
      columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      if (columns < 3) throw ConfigError("correction table needs >= 3 columns");
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != columns) {
      throw ConfigError("correction table row has wrong column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("correction table has no data rows");

  const std::size_t n_dims = columns - 2;
  auto unique_sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };

  std::vector<double> freqs;
  freqs.reserve(rows.size());
  for (const auto& r : rows) freqs.push_back(r[0]);
  freqs = unique_sorted(freqs);

  std::vector<std::vector<double>> axes(n_dims);
  for (std::size_t k = 0; k < n_dims; ++k) {
    std::vector<double> axis;
    axis.reserve(rows.size());
    for (const auto& r : rows) axis.push_back(r[k + 1]);
    axes[k] = unique_sorted(axis);
  }

  std::size_t total = freqs.size();
  for (const auto& axis : axes) total *= axis.size();
  if (rows.size() != total) {
    throw ConfigError("correction table rows do not form a complete grid");
  }

  auto index_of = [](const std::vector<double>& axis, double v) {
    auto it = std::lower_bound(axis.begin(), axis.end(), v);
    return static_cast<std::size_t>(it - axis.begin());
  };

  std::vector<double> factors(total, -1.0);
  for (const auto& r : rows) {
    std::size_t index = index_of(freqs, r[0]);
    for (std::size_t k = 0; k < n_dims; ++k) {
      index = index * axes[k].size() + index_of(axes[k], r[k + 1]);
    }
    if (factors[index] >= 0.0) throw ConfigError("duplicate correction table row");
    factors[index] = r[columns - 1];
  }
  return CorrectionTable(std::move(freqs), std::move(axes), std::move(factors));
}

double CorrectionTable::interpolate_plane(std::size_t freq_index,
                                          const StructureVector& d) const {
  const std::size_t n_dims = gap_axes_.size();

  // Cell index and fractional position per dimension.
  std::vector<std::size_t> lo(n_dims);
  std::vector<double> frac(n_dims);
  for (std::size_t k = 0; k < n_dims; ++k) {
    const auto& axis = gap_axes_[k];
    const double v = d[k];
    if (v < axis.front() || v > axis.back()) {
      throw DomainError("structure outside the correction table sample grid");
    }
    if (axis.size() == 1) {
      lo[k] = 0;
      frac[k] = 0.0;
      continue;
    }
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t hi = std::min<std::size_t>(
        static_cast<std::size_t>(it - axis.begin()), axis.size() - 1);
    if (hi == 0) hi = 1;
    lo[k] = hi - 1;
    frac[k] = (v - axis[lo[k]]) / (axis[hi] - axis[lo[k]]);
  }

  // Multilinear blend over the 2^n cell corners.
  double result = 0.0;
  const std::size_t corners = std::size_t{1} << n_dims;
  for (std::size_t corner = 0; corner < corners; ++corner) {
    double weight = 1.0;
    std::size_t index = freq_index;
    for (std::size_t k = 0; k < n_dims; ++k) {
      const bool high = (corner >> k) & 1u;
      weight *= high ? frac[k] : (1.0 - frac[k]);
      std::size_t axis_index = lo[k] + (high ? 1 : 0);
      if (gap_axes_[k].size() == 1) axis_index = 0;
      index = index * gap_axes_[k].size() + axis_index;
    }
    if (weight != 0.0) result += weight * factors_[index];
  }
  return result;
}

double CorrectionTable::factor(double f_hz, const StructureVector& d) const {
  if (d.size() != gap_axes_.size()) {
    throw DomainError("structure length does not match correction table dimensions");
  }
  // Frequency is clamped to the sampled band; gaps must lie inside the hull.
  if (freqs_.size() == 1 || f_hz <= freqs_.front()) {
    return interpolate_plane(0, d);
  }
  if (f_hz >= freqs_.back()) {
    return interpolate_plane(freqs_.size() - 1, d);
  }
  auto it = std::upper_bound(freqs_.begin(), freqs_.end(), f_hz);
  std::size_t hi = static_cast<std::size_t>(it - freqs_.begin());
  std::size_t lo = hi - 1;
  double t = (f_hz - freqs_[lo]) / (freqs_[hi] - freqs_[lo]);
  return (1.0 - t) * interpolate_plane(lo, d) + t * interpolate_plane(hi, d);
}

}  // namespace metaiot
