#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metaiot/channel.hpp"
#include "metaiot/rng.hpp"
#include "metaiot/types.hpp"

namespace metaiot {

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  std::string unit;

  std::vector<double> values() const;
  void validate() const;
};

/// Ordered set of candidate condition vectors (the discrete label space).
/// Regular grids are built as the cartesian product of axis values with the
/// first axis varying slowest.
class ConditionGrid {
 public:
  static ConditionGrid regular(std::vector<GridAxis> axes);
  static ConditionGrid from_points(std::vector<ConditionVector> points);

  std::size_t size() const { return points_.size(); }
  int dims() const { return points_.empty() ? 0 : static_cast<int>(points_[0].size()); }
  const std::vector<ConditionVector>& points() const { return points_; }
  const ConditionVector& point(std::size_t j) const { return points_[j]; }
  const std::vector<GridAxis>& axes() const { return axes_; }

  /// Per-dimension [min, max] over the grid, used for output normalization.
  std::pair<std::vector<double>, std::vector<double>> value_ranges() const;

 private:
  std::vector<ConditionVector> points_;
  std::vector<GridAxis> axes_;  // empty for explicit point lists
};

/// Indices of the grid members adjacent to point j: for every condition
/// dimension, the closest strictly-above and strictly-below coordinate values,
/// breaking ties by smallest deviation in the other dimensions and then by
/// lowest index. At most 2 * dims entries, sorted ascending, never contains j.
std::vector<int> nearest_neighbor_set(const ConditionGrid& grid, int j);

std::vector<std::vector<int>> neighbor_sets(const ConditionGrid& grid);

enum class ErrorProbMode {
  Paper,  // erf argument sum((dtau)^2) / (2*sqrt(2)), as published
  Ml,     // erf argument sqrt(sum((dtau)^2)) / (2*sqrt(2)*sigma), standard ML detection
};

ErrorProbMode parse_error_prob_mode(const std::string& name);
std::string error_prob_mode_name(ErrorProbMode mode);

/// Probability of deciding for the `other` condition when `truth` holds, from
/// the two noise-free spectra. Lies in (0, 0.5]; equals 0.5 iff the spectra
/// coincide.
double pair_error_probability(std::span<const double> tau_truth,
                              std::span<const double> tau_other,
                              double noise_std_db, ErrorProbMode mode);

/// As above, computing the spectra from the system model.
double pairwise_error_prob(const SystemModel& system, const ConditionVector& truth,
                           const ConditionVector& other, const StructureVector& d,
                           ErrorProbMode mode);

/// Monte Carlo estimate of the same decision error: draws measurement noise at
/// `truth` and counts how often the likelihood ratio favors `other`.
double mc_error_oracle(const SystemModel& system, const ConditionVector& truth,
                       const ConditionVector& other, const StructureVector& d,
                       int trials, Rng& rng);

struct IndiscernibilityStats {
  double value = 0.0;
  std::size_t pair_terms = 0;      // pairwise error-probability evaluations
  std::size_t spectra_evaluated = 0;
};

/// Sum of nearest-neighbor decision error probabilities over the grid.
/// Spectra are computed once per condition; the pair-term count stays below
/// 2 * dims * grid size.
IndiscernibilityStats indiscernibility_en(const SystemModel& system,
                                          const ConditionGrid& grid,
                                          const StructureVector& d,
                                          ErrorProbMode mode, int threads = 1);

/// Negative mean squared spectral distance over all ordered condition pairs.
double indiscernibility_ed(const SystemModel& system, const ConditionGrid& grid,
                           const StructureVector& d, int threads = 1);

}  // namespace metaiot
