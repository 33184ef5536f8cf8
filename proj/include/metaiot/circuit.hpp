#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "metaiot/types.hpp"

namespace metaiot {

enum class MaterialKind {
  NtcTemperature,        // Beta-equation conductivity, condition in degC
  ExponentialHumidity,   // exponential conductivity, condition in %RH
  TableLookup,           // piecewise-linear (condition, conductivity) table
};

MaterialKind parse_material_kind(const std::string& name);
std::string material_kind_name(MaterialKind kind);

/// Conductivity model of the sensitive material filling one unit's gap.
///
/// NtcTemperature:       sigma(T) = sigma_ref * exp(B * (1/T_ref - 1/T)), T in kelvin
/// ExponentialHumidity:  sigma(h) = sigma_ref * exp(k * (h - h_ref))
/// TableLookup:          linear interpolation of (condition, conductivity) samples
///
/// Cross-sensitivity to the other condition dimensions enters as an optional
/// multiplicative factor exp(sum_n k_n * (c_n - r_n)) over n != condition_dim,
/// which keeps the output strictly positive.
struct MaterialModel {
  MaterialKind kind = MaterialKind::NtcTemperature;
  int condition_dim = 0;      // which condition drives this material
  double sigma_ref_spm = 1.0; // conductivity at the reference point, S/m
  double ref_value = 25.0;    // reference value of the primary condition
  double sensitivity = 3450.0; // B in kelvin (NTC) or k per condition unit (exponential)
  std::vector<double> table_condition;     // TableLookup only, ascending
  std::vector<double> table_sigma_spm;     // TableLookup only, positive
  double range_min = -1e300;  // accepted primary-condition range
  double range_max = 1e300;
  std::vector<double> cross_coeffs;  // optional, one per condition dimension
  std::vector<double> cross_refs;    // reference values for the cross terms

  void validate() const;  // throws ConfigError
};

/// Per-unit equivalent circuit constants.
struct UnitCircuitParams {
  double inductance_h = 1e-8;          // parasitic inductance of the ring
  double capacitance_f = 5e-14;        // parasitic capacitance of the ring
  double gap_capacitance_fmm = 2e-13;  // gap capacitance at unit (1 mm) width, F*mm
  double ring_width_mm = 0.8;          // conductor cross-section width
  double ring_height_mm = 0.6;         // conductor cross-section height
  MaterialModel material;

  void validate() const;
};

/// Whole-sensor circuit: one RLC unit per sensing target plus inter-unit coupling.
struct SensorCircuitParams {
  std::vector<UnitCircuitParams> units;
  double coupling_capacitance_f = 1e-6;
  double z0_ohm = kFreeSpaceImpedanceOhm;

  int unit_count() const { return static_cast<int>(units.size()); }
  void validate() const;
};

/// Multiplicative correction factors fitted over a sampled structure grid,
/// standing in for full-wave simulation of the reflection response.
/// Interpolation is multilinear across gap widths and piecewise-linear in
/// frequency (clamped at the table's end frequencies).
class CorrectionTable {
 public:
  CorrectionTable(std::vector<double> freqs_hz,
                  std::vector<std::vector<double>> gap_axes_mm,
                  std::vector<double> factors);

  /// Reads rows `freq_hz,d_1_mm,...,d_NT_mm,factor`; the rows must fill a
  /// complete tensor grid.
  static CorrectionTable load_csv(const std::string& path);

  double factor(double f_hz, const StructureVector& d) const;

  int dims() const { return static_cast<int>(gap_axes_.size()); }
  const std::vector<double>& frequencies_hz() const { return freqs_; }
  const std::vector<std::vector<double>>& gap_axes_mm() const { return gap_axes_; }

 private:
  std::vector<double> freqs_;                 // ascending
  std::vector<std::vector<double>> gap_axes_; // ascending per dimension
  std::vector<double> factors_;               // row-major over (freq, axes...)

  double interpolate_plane(std::size_t freq_index, const StructureVector& d) const;
};

/// Conductivity of the sensitive material at conditions c, S/m.
double conductivity(const MaterialModel& material, const ConditionVector& c);

/// Gap resistance d / (rho * W * H), ohms; linear in the gap width.
double gap_resistance_ohm(const UnitCircuitParams& p, const ConditionVector& c,
                          double gap_mm);

/// Gap capacitance C_hat / d, farads; inverse in the gap width.
double gap_capacitance_f(const UnitCircuitParams& p, double gap_mm);

/// Impedance of one sensing unit at frequency f with gap width gap_mm.
std::complex<double> unit_impedance(double f_hz, const ConditionVector& c,
                                    double gap_mm, const UnitCircuitParams& p);

/// Aggregate impedance of the whole sensor.
std::complex<double> sensor_impedance(double f_hz, const ConditionVector& c,
                                      const StructureVector& d,
                                      const SensorCircuitParams& p);

/// Power reflection coefficient of impedance z against reference z0.
double reflection_coefficient(std::complex<double> z, double z0_ohm);

/// Model reflection coefficient with the optional fitted correction applied,
/// clamped to [0, 1].
double fitted_gamma(double f_hz, const ConditionVector& c, const StructureVector& d,
                    const SensorCircuitParams& p,
                    const CorrectionTable* table = nullptr);

}  // namespace metaiot
