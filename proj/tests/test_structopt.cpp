#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "metaiot/structopt.hpp"

using namespace metaiot;

namespace {

DesignSpace unit_box() {
  DesignSpace space;
  space.lower_mm = {1.0, 1.0};
  space.upper_mm = {5.0, 5.0};
  space.min_separation_mm = 0.05;
  space.integer_step_mm = 1.0;
  return space;
}

double sphere(const StructureVector& d) {
  const double dx = d[0] - 2.0;
  const double dy = d[1] - 3.0;
  return dx * dx + dy * dy;
}

/// Multimodal but cheap; global minimum near (2, 3).
double wavy(const StructureVector& d) {
  return sphere(d) + 0.3 * std::sin(5.0 * d[0]) * std::cos(4.0 * d[1]);
}

}  // namespace

TEST_CASE("integer grid excludes coincident gap widths") {
  const auto grid = unit_box().integer_grid();
  CHECK(grid.size() == 20);  // 5*5 minus the diagonal
  for (const auto& d : grid) {
    CHECK(d[0] != d[1]);
    CHECK(d[0] >= 1.0);
    CHECK(d[0] <= 5.0);
  }
  DesignSpace half = unit_box();
  half.integer_step_mm = 2.0;
  const auto coarse = half.integer_grid();
  CHECK(coarse.size() == 2);  // step multiples {2,4}^2 minus the diagonal
}

TEST_CASE("feasibility respects bounds and the separation margin") {
  const DesignSpace space = unit_box();
  CHECK(space.feasible({2.0, 3.0}));
  CHECK(!space.feasible({2.0, 2.0}));
  CHECK(!space.feasible({2.0, 2.04}));
  CHECK(space.feasible({2.0, 2.05}));
  CHECK(!space.feasible({0.5, 3.0}));
  CHECK(!space.feasible({2.0, 5.5}));
  CHECK(!space.feasible({2.0}));
}

TEST_CASE("surrogate finds the sphere minimum") {
  SurrogateConfig cfg;
  cfg.budget = 60;
  const auto result = surrogate_optimize(sphere, unit_box(), cfg, 11);
  CHECK(std::abs(result.best[0] - 2.0) < 0.1);
  CHECK(std::abs(result.best[1] - 3.0) < 0.1);
  CHECK(result.best_value < 0.02);
}

TEST_CASE("degenerate budget returns the best initial point") {
  SurrogateConfig cfg;
  cfg.initial_design = 8;
  cfg.budget = 8;
  const auto result = surrogate_optimize(sphere, unit_box(), cfg, 3);
  CHECK(result.trace.size() == 8);
  double best = result.trace[0].value;
  for (const auto& point : result.trace) best = std::min(best, point.value);
  CHECK(result.best_value == best);
}

TEST_CASE("the optimizer is deterministic for a fixed seed") {
  SurrogateConfig cfg;
  cfg.budget = 40;
  const auto a = surrogate_optimize(wavy, unit_box(), cfg, 77);
  const auto b = surrogate_optimize(wavy, unit_box(), cfg, 77);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].d == b.trace[i].d);
    CHECK(a.trace[i].value == b.trace[i].value);
  }
  const auto c = surrogate_optimize(wavy, unit_box(), cfg, 78);
  bool any_different = false;
  for (std::size_t i = 0; i < c.trace.size() && !any_different; ++i) {
    any_different = c.trace[i].d != a.trace[i].d;
  }
  CHECK(any_different);
}

TEST_CASE("every evaluated point is feasible and the budget is spent exactly") {
  const DesignSpace space = unit_box();
  SurrogateConfig cfg;
  cfg.budget = 50;
  int calls = 0;
  std::vector<StructureVector> seen;
  const auto result = surrogate_optimize(
      [&](const StructureVector& d) {
        ++calls;
        seen.push_back(d);
        return wavy(d);
      },
      space, cfg, 5);
  CHECK(calls == cfg.budget);
  CHECK(result.trace.size() == static_cast<std::size_t>(cfg.budget));
  for (const auto& d : seen) CHECK(space.feasible(d));
}

TEST_CASE("the incumbent is non-increasing along the trace") {
  SurrogateConfig cfg;
  cfg.budget = 50;
  const auto result = surrogate_optimize(wavy, unit_box(), cfg, 21);
  double incumbent = result.trace[0].value;
  for (const auto& point : result.trace) {
    incumbent = std::min(incumbent, point.value);
    CHECK(incumbent <= point.value);
  }
  CHECK(incumbent == result.best_value);
}

TEST_CASE("seeded integer grid makes the surrogate dominate the grid search") {
  const DesignSpace space = unit_box();
  const auto grid = space.integer_grid();
  SurrogateConfig cfg;
  cfg.budget = 40;
  cfg.seed_points = grid;
  const auto surrogate = surrogate_optimize(wavy, space, cfg, 1);
  const auto exhaustive = grid_search(wavy, grid);
  CHECK(surrogate.best_value <= exhaustive.best_value);
  CHECK(exhaustive.best_value <= grid_average(wavy, grid));
}

TEST_CASE("seed points are all evaluated before refinement") {
  const DesignSpace space = unit_box();
  SurrogateConfig cfg;
  cfg.budget = 30;
  cfg.seed_points = {{1.0, 2.0}, {4.0, 2.0}};
  const auto result = surrogate_optimize(sphere, space, cfg, 2);
  CHECK(result.trace[0].d == StructureVector{1.0, 2.0});
  CHECK(result.trace[1].d == StructureVector{4.0, 2.0});
}

TEST_CASE("configuration errors are rejected") {
  const DesignSpace space = unit_box();
  SurrogateConfig cfg;
  cfg.budget = 4;  // below the default initial design of 6
  CHECK_THROWS_AS(surrogate_optimize(sphere, space, cfg, 1), ConfigError);

  SurrogateConfig bad_seed;
  bad_seed.budget = 40;
  bad_seed.seed_points = {{2.0, 2.0}};  // violates the separation margin
  CHECK_THROWS_AS(surrogate_optimize(sphere, space, bad_seed, 1), ConfigError);

  DesignSpace tight;
  tight.lower_mm = {1.0, 1.0};
  tight.upper_mm = {1.01, 1.01};
  tight.min_separation_mm = 0.05;
  SurrogateConfig cfg2;
  cfg2.budget = 20;
  CHECK_THROWS_AS(surrogate_optimize(sphere, tight, cfg2, 1), ConfigError);

  DesignSpace inverted;
  inverted.lower_mm = {5.0};
  inverted.upper_mm = {1.0};
  CHECK_THROWS_AS(inverted.validate(), ConfigError);
}

TEST_CASE("grid search returns the exact argmin with lexicographic ties") {
  const std::vector<StructureVector> grid{{3.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}};
  int calls = 0;
  const auto result = grid_search(
      [&](const StructureVector&) {
        ++calls;
        return 7.0;  // constant: every point ties
      },
      grid);
  CHECK(calls == 3);
  CHECK(result.best == StructureVector{1.0, 2.0});
  CHECK(result.best_value == 7.0);

  const auto single = grid_search(sphere, {{4.0, 4.0}});
  CHECK(single.best == StructureVector{4.0, 4.0});

  CHECK_THROWS_AS(grid_search(sphere, {}), ConfigError);
}

TEST_CASE("grid search on the integer grid evaluates every point once") {
  const auto grid = unit_box().integer_grid();
  int calls = 0;
  const auto result = grid_search(
      [&](const StructureVector& d) {
        ++calls;
        return sphere(d);
      },
      grid);
  CHECK(calls == 20);
  CHECK(result.best == StructureVector{2.0, 3.0});
}

TEST_CASE("grid average is the arithmetic mean") {
  CHECK(grid_average([](const StructureVector&) { return 3.5; }, {{1.0}, {2.0}, {3.0}}) ==
        3.5);
  CHECK(grid_average(sphere, {{1.0, 1.0}, {3.0, 5.0}}) ==
        doctest::Approx(0.5 * (sphere({1.0, 1.0}) + sphere({3.0, 5.0}))));
  CHECK_THROWS_AS(grid_average(sphere, {}), ConfigError);
}
