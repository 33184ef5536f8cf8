#include "metaiot/discernibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metaiot/parallel.hpp"

namespace metaiot {

void GridAxis::validate() const {
  if (!(step > 0.0)) throw ConfigError("condition axis step must be positive");
  if (!(min <= max)) throw ConfigError("condition axis min must not exceed max");
}

std::vector<double> GridAxis::values() const {
  validate();
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(min + step * static_cast<double>(i));
  return out;
}

ConditionGrid ConditionGrid::regular(std::vector<GridAxis> axes) {
  if (axes.empty()) throw ConfigError("condition grid needs at least one axis");
  std::vector<std::vector<double>> axis_values;
  axis_values.reserve(axes.size());
  std::size_t total = 1;
  for (const auto& axis : axes) {
    axis_values.push_back(axis.values());
    total *= axis_values.back().size();
  }

  ConditionGrid grid;
  grid.axes_ = std::move(axes);
  grid.points_.reserve(total);
  ConditionVector point(axis_values.size());
  // Cartesian product, first axis slowest.
  std::vector<std::size_t> idx(axis_values.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = axis_values.size(); k-- > 0;) {
      idx[k] = rem % axis_values[k].size();
      rem /= axis_values[k].size();
    }
    for (std::size_t k = 0; k < axis_values.size(); ++k) point[k] = axis_values[k][idx[k]];
    grid.points_.push_back(point);
  }
  return grid;
}

ConditionGrid ConditionGrid::from_points(std::vector<ConditionVector> points) {
  if (points.empty()) throw ConfigError("condition grid needs at least one point");
  const std::size_t dims = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dims) throw ConfigError("condition points must share one dimension");
  }
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      if (points[a] == points[b]) throw ConfigError("condition points must be distinct");
    }
  }
  ConditionGrid grid;
  grid.points_ = std::move(points);
  return grid;
}

std::pair<std::vector<double>, std::vector<double>> ConditionGrid::value_ranges() const {
  const int n = dims();
  std::vector<double> lo(static_cast<std::size_t>(n), std::numeric_limits<double>::max());
  std::vector<double> hi(static_cast<std::size_t>(n), std::numeric_limits<double>::lowest());
  for (const auto& p : points_) {
    for (int k = 0; k < n; ++k) {
      lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k)]);
      hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k)]);
    }
  }
  return {lo, hi};
}

std::vector<int> nearest_neighbor_set(const ConditionGrid& grid, int j) {
  const auto& points = grid.points();
  if (j < 0 || static_cast<std::size_t>(j) >= points.size()) {
    throw DomainError("condition index out of range");
  }
  const ConditionVector& cj = points[static_cast<std::size_t>(j)];
  const int dims = grid.dims();

  std::vector<int> result;
  for (int n = 0; n < dims; ++n) {
    // One candidate on each side of c_j along dimension n.
    for (int side = 0; side < 2; ++side) {
      const bool above = side == 1;
      double best_axis_gap = std::numeric_limits<double>::max();
      double best_other_dev = std::numeric_limits<double>::max();
      int best = -1;
      for (std::size_t rho = 0; rho < points.size(); ++rho) {
        const double delta = points[rho][static_cast<std::size_t>(n)] -
                             cj[static_cast<std::size_t>(n)];
        if (above ? !(delta > 0.0) : !(delta < 0.0)) continue;
        const double axis_gap = std::abs(delta);
        double other_dev = 0.0;
        for (int k = 0; k < dims; ++k) {
          if (k == n) continue;
          other_dev += std::abs(points[rho][static_cast<std::size_t>(k)] -
                                cj[static_cast<std::size_t>(k)]);
        }
        // Lexicographic (axis gap, other-dimension deviation, index).
        if (axis_gap < best_axis_gap ||
            (axis_gap == best_axis_gap && other_dev < best_other_dev)) {
          best_axis_gap = axis_gap;
          best_other_dev = other_dev;
          best = static_cast<int>(rho);
        }
      }
      if (best >= 0) result.push_back(best);
    }
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<std::vector<int>> neighbor_sets(const ConditionGrid& grid) {
  std::vector<std::vector<int>> sets(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sets[j] = nearest_neighbor_set(grid, static_cast<int>(j));
  }
  return sets;
}

ErrorProbMode parse_error_prob_mode(const std::string& name) {
  if (name == "paper") return ErrorProbMode::Paper;
  if (name == "ml") return ErrorProbMode::Ml;
  throw ConfigError("unknown error-probability mode: " + name + " (use paper|ml)");
}

std::string error_prob_mode_name(ErrorProbMode mode) {
  return mode == ErrorProbMode::Paper ? "paper" : "ml";
}

double pair_error_probability(std::span<const double> tau_truth,
                              std::span<const double> tau_other,
                              double noise_std_db, ErrorProbMode mode) {
  if (tau_truth.size() != tau_other.size()) {
    throw DomainError("spectra must have equal length");
  }
  double separation = 0.0;
  for (std::size_t i = 0; i < tau_truth.size(); ++i) {
    const double diff = tau_other[i] - tau_truth[i];
    separation += diff * diff;
  }
  const double two_sqrt2 = 2.0 * std::sqrt(2.0);
  double arg = 0.0;
  if (mode == ErrorProbMode::Paper) {
    arg = separation / two_sqrt2;
  } else {
    if (!(noise_std_db > 0.0)) {
      throw DomainError("ml error probability requires positive noise std");
    }
    arg = std::sqrt(separation) / (two_sqrt2 * noise_std_db);
  }
  return 0.5 * (1.0 - std::erf(arg));
}

double pairwise_error_prob(const SystemModel& system, const ConditionVector& truth,
                           const ConditionVector& other, const StructureVector& d,
                           ErrorProbMode mode) {
  const auto tau_truth = expected_spectrum_db(system, truth, d);
  const auto tau_other = expected_spectrum_db(system, other, d);
  return pair_error_probability(tau_truth, tau_other, system.channel.noise_std_db, mode);
}

double mc_error_oracle(const SystemModel& system, const ConditionVector& truth,
                       const ConditionVector& other, const StructureVector& d,
                       int trials, Rng& rng) {
  if (trials < 1) throw DomainError("mc_error_oracle needs at least one trial");
  const double sigma = system.channel.noise_std_db;
  if (!(sigma > 0.0)) throw DomainError("mc_error_oracle requires positive noise std");

  const auto tau_truth = expected_spectrum_db(system, truth, d);
  const auto tau_other = expected_spectrum_db(system, other, d);
  std::vector<double> diff(tau_truth.size());
  double separation = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = tau_other[i] - tau_truth[i];
    separation += diff[i] * diff[i];
  }

  // Decide `other` when the likelihood ratio favors it:
  //   sum_i 2 e_i (tau_other_i - tau_truth_i) > sum_i (tau_other_i - tau_truth_i)^2
  std::size_t errors = 0;
  for (int t = 0; t < trials; ++t) {
    double statistic = 0.0;
    for (double di : diff) statistic += 2.0 * rng.gaussian(0.0, sigma) * di;
    if (statistic > separation) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(trials);
}

namespace {

std::vector<std::vector<double>> all_spectra(const SystemModel& system,
                                             const ConditionGrid& grid,
                                             const StructureVector& d, int threads) {
  std::vector<std::vector<double>> tau(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t j) {
    tau[j] = expected_spectrum_db(system, grid.point(j), d);
  });
  return tau;
}

}  // namespace

IndiscernibilityStats indiscernibility_en(const SystemModel& system,
                                          const ConditionGrid& grid,
                                          const StructureVector& d,
                                          ErrorProbMode mode, int threads) {
  const auto tau = all_spectra(system, grid, d, threads);
  const double sigma = system.channel.noise_std_db;

  IndiscernibilityStats stats;
  stats.spectra_evaluated = grid.size();
  // Pair terms accumulate in index order so the sum is bit-stable for any
  // thread count.
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (int jp : nearest_neighbor_set(grid, static_cast<int>(j))) {
      stats.value += pair_error_probability(tau[j], tau[static_cast<std::size_t>(jp)],
                                            sigma, mode);
      ++stats.pair_terms;
    }
  }
  return stats;
}

double indiscernibility_ed(const SystemModel& system, const ConditionGrid& grid,
                           const StructureVector& d, int threads) {
  const auto tau = all_spectra(system, grid, d, threads);
  double total = 0.0;
  for (std::size_t j = 0; j < tau.size(); ++j) {
    for (std::size_t jp = 0; jp < tau.size(); ++jp) {
      double dist = 0.0;
      for (std::size_t i = 0; i < tau[j].size(); ++i) {
        const double diff = tau[j][i] - tau[jp][i];
        dist += diff * diff;
      }
      total += dist;
    }
  }
  return -total / static_cast<double>(grid.size());
}

}  // namespace metaiot
