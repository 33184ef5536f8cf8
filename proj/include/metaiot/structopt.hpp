#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "metaiot/rng.hpp"
#include "metaiot/types.hpp"

namespace metaiot {

using Objective = std::function<double(const StructureVector&)>;

/// Box bounds plus a pairwise-distinctness margin between gap widths.
struct DesignSpace {
  std::vector<double> lower_mm;
  std::vector<double> upper_mm;
  double min_separation_mm = 0.05;  // |d_m - d_n| >= this for every pair
  double integer_step_mm = 1.0;     // spacing of the baseline integer grid

  int dims() const { return static_cast<int>(lower_mm.size()); }
  void validate() const;
  bool feasible(const StructureVector& d) const;

  /// All step-spaced structures inside the bounds that satisfy the
  /// distinctness margin (the discrete baseline search space).
  std::vector<StructureVector> integer_grid() const;

  /// Uniform feasible draw; throws ConfigError when the constraints leave no
  /// room after many rejections.
  StructureVector sample_feasible(Rng& rng) const;
};

struct SurrogateConfig {
  int initial_design = 0;          // 0 selects 2 * (dims + 1)
  int budget = 80;                 // total objective evaluations, exact
  int candidates_per_iteration = 100;
  double initial_radius = 0.2;     // perturbation std as a fraction of the range
  double min_radius = 1e-3;
  int shrink_patience = 5;         // consecutive non-improving steps before halving
  std::vector<StructureVector> seed_points;  // evaluated before the Latin hypercube

  void validate(const DesignSpace& space) const;
};

struct TracePoint {
  int eval_index = 0;
  StructureVector d;
  double value = 0.0;
};

struct OptimizationResult {
  StructureVector best;
  double best_value = 0.0;
  std::vector<TracePoint> trace;
};

/// Derivative-free global minimization: Latin hypercube start, cubic RBF
/// surrogate with a linear tail, candidate points scored by a cycling blend
/// of predicted value and distance to evaluated points. Deterministic for a
/// fixed seed; spends exactly cfg.budget objective evaluations.
OptimizationResult surrogate_optimize(const Objective& objective,
                                      const DesignSpace& space,
                                      const SurrogateConfig& cfg, std::uint64_t seed);

struct GridSearchResult {
  StructureVector best;
  double best_value = 0.0;
};

/// Exact argmin over an explicit structure list; ties resolve to the
/// lexicographically smallest structure.
GridSearchResult grid_search(const Objective& objective,
                             const std::vector<StructureVector>& grid);

/// Arithmetic mean of the objective over an explicit structure list.
double grid_average(const Objective& objective,
                    const std::vector<StructureVector>& grid);

}  // namespace metaiot
