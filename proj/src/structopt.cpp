#include "metaiot/structopt.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace metaiot {

namespace {

constexpr double kDuplicateEps = 1e-9;
constexpr int kMaxRejections = 10000;

double distance(const StructureVector& a, const StructureVector& b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

/// Cubic RBF interpolant with a linear polynomial tail.
class RbfSurrogate {
 public:
  RbfSurrogate(const std::vector<StructureVector>& points,
               const std::vector<double>& values) {
    // Merge near-duplicate points so the interpolation system stays regular.
    for (std::size_t i = 0; i < points.size(); ++i) {
      bool duplicate = false;
      for (const auto& kept : points_) {
        if (distance(points[i], kept) < kDuplicateEps) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) {
        points_.push_back(points[i]);
        values_.push_back(values[i]);
      }
    }

    const int n = static_cast<int>(points_.size());
    const int dim = static_cast<int>(points_[0].size());
    const int m = n + dim + 1;
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double r = distance(points_[static_cast<std::size_t>(i)],
                                  points_[static_cast<std::size_t>(j)]);
        system(i, j) = r * r * r;
      }
      system(i, i) += 1e-8;  // ridge against ill-conditioning
      system(i, n) = 1.0;
      system(n, i) = 1.0;
      for (int k = 0; k < dim; ++k) {
        system(i, n + 1 + k) = points_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        system(n + 1 + k, i) = points_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      }
      rhs(i) = values_[static_cast<std::size_t>(i)];
    }
    coeffs_ = system.fullPivLu().solve(rhs);
  }

  double predict(const StructureVector& x) const {
    const int n = static_cast<int>(points_.size());
    const int dim = static_cast<int>(x.size());
    double value = coeffs_(n);
    for (int k = 0; k < dim; ++k) {
      value += coeffs_(n + 1 + k) * x[static_cast<std::size_t>(k)];
    }
    for (int i = 0; i < n; ++i) {
      const double r = distance(x, points_[static_cast<std::size_t>(i)]);
      value += coeffs_(i) * r * r * r;
    }
    return value;
  }

 private:
  std::vector<StructureVector> points_;
  std::vector<double> values_;
  Eigen::VectorXd coeffs_;
};

}  // namespace

void DesignSpace::validate() const {
  if (lower_mm.empty() || lower_mm.size() != upper_mm.size()) {
    throw ConfigError("design space bounds must be non-empty and equally sized");
  }
  for (std::size_t k = 0; k < lower_mm.size(); ++k) {
    if (!(lower_mm[k] < upper_mm[k])) {
      throw ConfigError("design space requires lower < upper in every dimension");
    }
    if (!(lower_mm[k] > 0.0)) throw ConfigError("gap widths must be positive");
  }
  if (!(min_separation_mm > 0.0)) throw ConfigError("min_separation_mm must be positive");
  if (!(integer_step_mm > 0.0)) throw ConfigError("integer_step_mm must be positive");
}

bool DesignSpace::feasible(const StructureVector& d) const {
  if (d.size() != lower_mm.size()) return false;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(d[k] >= lower_mm[k] && d[k] <= upper_mm[k])) return false;
  }
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = a + 1; b < d.size(); ++b) {
      // Tiny slack so widths placed exactly at the margin stay feasible.
      if (std::abs(d[a] - d[b]) < min_separation_mm - 1e-12) return false;
    }
  }
  return true;
}

std::vector<StructureVector> DesignSpace::integer_grid() const {
  validate();
  std::vector<std::vector<double>> axis_values(lower_mm.size());
  for (std::size_t k = 0; k < lower_mm.size(); ++k) {
    // First step-multiple at or above the lower bound.
    const double start =
        std::ceil(lower_mm[k] / integer_step_mm - 1e-9) * integer_step_mm;
    for (double v = start; v <= upper_mm[k] + 1e-9; v += integer_step_mm) {
      axis_values[k].push_back(v);
    }
    if (axis_values[k].empty()) {
      throw ConfigError("integer grid is empty in one dimension");
    }
  }

  std::vector<StructureVector> grid;
  StructureVector point(lower_mm.size());
  std::vector<std::size_t> idx(lower_mm.size(), 0);
  std::size_t total = 1;
  for (const auto& axis : axis_values) total *= axis.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = lower_mm.size(); k-- > 0;) {
      idx[k] = rem % axis_values[k].size();
      rem /= axis_values[k].size();
    }
    for (std::size_t k = 0; k < lower_mm.size(); ++k) point[k] = axis_values[k][idx[k]];
    if (feasible(point)) grid.push_back(point);
  }
  return grid;
}

StructureVector DesignSpace::sample_feasible(Rng& rng) const {
  StructureVector d(lower_mm.size());
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = rng.uniform(lower_mm[k], upper_mm[k]);
    }
    if (feasible(d)) return d;
  }
  throw ConfigError("design space admits no feasible point (bounds too tight for the separation margin)");
}

void SurrogateConfig::validate(const DesignSpace& space) const {
  space.validate();
  const int dim = space.dims();
  const int init = initial_design > 0 ? initial_design : 2 * (dim + 1);
  if (init < dim + 1) {
    throw ConfigError("surrogate initial design must have at least dims + 1 points");
  }
  const int total_start = init + static_cast<int>(seed_points.size());
  if (budget < total_start) {
    throw ConfigError("surrogate budget smaller than the initial design");
  }
  if (candidates_per_iteration < 2) {
    throw ConfigError("surrogate needs at least two candidates per iteration");
  }
  if (!(initial_radius > 0.0) || !(min_radius > 0.0) || shrink_patience < 1) {
    throw ConfigError("surrogate radius schedule parameters must be positive");
  }
  for (const auto& seed : seed_points) {
    if (!space.feasible(seed)) throw ConfigError("surrogate seed point is infeasible");
  }
}

OptimizationResult surrogate_optimize(const Objective& objective,
                                      const DesignSpace& space,
                                      const SurrogateConfig& cfg, std::uint64_t seed) {
  cfg.validate(space);
  const int dim = space.dims();
  const int init_n = cfg.initial_design > 0 ? cfg.initial_design : 2 * (dim + 1);
  Rng rng(seed);

  OptimizationResult result;
  result.best_value = std::numeric_limits<double>::infinity();
  std::vector<StructureVector> evaluated;
  std::vector<double> values;

  auto evaluate = [&](const StructureVector& d) {
    const double value = objective(d);
    evaluated.push_back(d);
    values.push_back(value);
    result.trace.push_back({static_cast<int>(evaluated.size()), d, value});
    if (value < result.best_value) {
      result.best_value = value;
      result.best = d;
    }
    return value;
  };

  for (const auto& seed_point : cfg.seed_points) evaluate(seed_point);

  // Latin hypercube start: one stratum per point and dimension, independently
  // permuted; rows that land inside the separation margin are redrawn.
  {
    std::vector<std::vector<int>> strata(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      auto& perm = strata[static_cast<std::size_t>(k)];
      perm.resize(static_cast<std::size_t>(init_n));
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
      }
    }
    for (int i = 0; i < init_n; ++i) {
      StructureVector d(static_cast<std::size_t>(dim));
      for (int k = 0; k < dim; ++k) {
        const double lo = space.lower_mm[static_cast<std::size_t>(k)];
        const double hi = space.upper_mm[static_cast<std::size_t>(k)];
        const double cell = (static_cast<double>(strata[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) + rng.uniform()) /
                            static_cast<double>(init_n);
        d[static_cast<std::size_t>(k)] = lo + cell * (hi - lo);
      }
      if (!space.feasible(d)) d = space.sample_feasible(rng);
      evaluate(d);
    }
  }

  const std::vector<double> weight_cycle{0.3, 0.5, 0.8, 0.95};
  double radius = cfg.initial_radius;
  int stalled = 0;
  std::size_t iteration = 0;

  while (static_cast<int>(evaluated.size()) < cfg.budget) {
    RbfSurrogate surrogate(evaluated, values);

    // Candidate pool: perturbations of the incumbent plus uniform samples.
    std::vector<StructureVector> candidates;
    candidates.reserve(static_cast<std::size_t>(cfg.candidates_per_iteration));
    const int n_local = cfg.candidates_per_iteration / 2;
    while (static_cast<int>(candidates.size()) < cfg.candidates_per_iteration) {
      StructureVector d(static_cast<std::size_t>(dim));
      const bool local = static_cast<int>(candidates.size()) < n_local;
      bool ok = false;
      for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
        if (local) {
          for (int k = 0; k < dim; ++k) {
            const double lo = space.lower_mm[static_cast<std::size_t>(k)];
            const double hi = space.upper_mm[static_cast<std::size_t>(k)];
            const double step = radius * (hi - lo) * rng.gaussian();
            d[static_cast<std::size_t>(k)] =
                std::clamp(result.best[static_cast<std::size_t>(k)] + step, lo, hi);
          }
        } else {
          for (int k = 0; k < dim; ++k) {
            d[static_cast<std::size_t>(k)] =
                rng.uniform(space.lower_mm[static_cast<std::size_t>(k)],
                            space.upper_mm[static_cast<std::size_t>(k)]);
          }
        }
        ok = space.feasible(d);
        if (ok) {
          for (const auto& seen : evaluated) {
            if (distance(d, seen) < kDuplicateEps) {
              ok = false;
              break;
            }
          }
        }
      }
      if (!ok) d = space.sample_feasible(rng);
      candidates.push_back(std::move(d));
    }

    std::vector<double> predicted(candidates.size());
    std::vector<double> min_dist(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      predicted[i] = surrogate.predict(candidates[i]);
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& seen : evaluated) {
        nearest = std::min(nearest, distance(candidates[i], seen));
      }
      min_dist[i] = nearest;
    }

    auto normalized = [](const std::vector<double>& v) {
      const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
      const double lo = *lo_it;
      const double span = *hi_it - lo;
      std::vector<double> out(v.size(), 0.5);
      if (span > 0.0) {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / span;
      }
      return out;
    };
    const auto value_score = normalized(predicted);
    const auto dist_score = normalized(min_dist);

    const double w = weight_cycle[iteration % weight_cycle.size()];
    std::size_t pick = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      // Low predicted value and high distance from evaluated points are good.
      const double score = w * value_score[i] + (1.0 - w) * (1.0 - dist_score[i]);
      if (score < best_score) {
        best_score = score;
        pick = i;
      }
    }

    const double before = result.best_value;
    evaluate(candidates[pick]);
    if (result.best_value < before) {
      stalled = 0;
    } else if (++stalled >= cfg.shrink_patience) {
      radius = std::max(radius * 0.5, cfg.min_radius);
      stalled = 0;
    }
    ++iteration;
  }

  return result;
}

GridSearchResult grid_search(const Objective& objective,
                             const std::vector<StructureVector>& grid) {
  if (grid.empty()) throw ConfigError("grid search over an empty grid");
  GridSearchResult result;
  result.best_value = std::numeric_limits<double>::infinity();
  for (const auto& d : grid) {
    const double value = objective(d);
    if (value < result.best_value ||
        (value == result.best_value && d < result.best)) {
      result.best_value = value;
      result.best = d;
    }
  }
  return result;
}

double grid_average(const Objective& objective,
                    const std::vector<StructureVector>& grid) {
  if (grid.empty()) throw ConfigError("grid average over an empty grid");
  double sum = 0.0;
  for (const auto& d : grid) sum += objective(d);
  return sum / static_cast<double>(grid.size());
}

}  // namespace metaiot
