#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "rdrp/allocation.hpp"
#include "rdrp/error.hpp"
#include "rdrp/rng.hpp"

using namespace rdrp;

TEST_SUITE_BEGIN("allocation");

TEST_CASE("greedy solves the three-item example") {
  const AllocationInstance inst{{0.3, 0.2, 0.1}, {0.3, 0.4, 0.5}, 0.7};
  const Allocation greedy = greedy_allocate(inst);
  CHECK(greedy.z == std::vector<std::uint8_t>{1, 1, 0});
  CHECK(greedy.total_revenue == doctest::Approx(0.5));
  CHECK(greedy.total_cost == doctest::Approx(0.7));

  const Allocation opt = brute_force_allocate(inst);
  CHECK(opt.total_revenue == doctest::Approx(0.5));
}

TEST_CASE("budget extremes") {
  const AllocationInstance inst{{0.2, 0.1}, {0.3, 0.2}, 0.0};
  const Allocation empty = greedy_allocate(inst);
  CHECK(empty.z == std::vector<std::uint8_t>{0, 0});
  CHECK(empty.total_cost == 0.0);

  const AllocationInstance slack{{0.2, 0.1}, {0.3, 0.2}, 10.0};
  const Allocation all = greedy_allocate(slack);
  CHECK(all.z == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("non-positive uplifts violate the positivity assumption") {
  CHECK_THROWS_AS(greedy_allocate({{0.2, -0.1}, {0.3, 0.2}, 1.0}), AssumptionViolationError);
  CHECK_THROWS_AS(greedy_allocate({{0.2, 0.1}, {0.3, 0.0}, 1.0}), AssumptionViolationError);
  CHECK_THROWS_AS(brute_force_allocate({{0.0}, {0.1}, 1.0}), AssumptionViolationError);
}

TEST_CASE("brute force basics") {
  const Allocation single = brute_force_allocate({{0.4}, {0.3}, 0.5});
  CHECK(single.z == std::vector<std::uint8_t>{1});
  CHECK(single.total_revenue == doctest::Approx(0.4));

  const Allocation none = brute_force_allocate({{0.4}, {0.6}, 0.5});
  CHECK(none.z == std::vector<std::uint8_t>{0});

  AllocationInstance big;
  big.tau_r.assign(23, 0.1);
  big.tau_c.assign(23, 0.1);
  big.budget = 1.0;
  CHECK_THROWS_AS(brute_force_allocate(big), SizeLimitError);
}

TEST_CASE("greedy can be suboptimal but stays within the additive bound") {
  // The high-roi small item blocks the valuable large one.
  const AllocationInstance inst{{0.11, 0.5}, {0.1, 0.5}, 0.5};
  const Allocation greedy = greedy_allocate(inst);
  const Allocation opt = brute_force_allocate(inst);
  CHECK(greedy.total_revenue == doctest::Approx(0.11));
  CHECK(opt.total_revenue == doctest::Approx(0.5));
  const double max_tau = 0.5;
  CHECK(greedy.total_revenue >= opt.total_revenue - max_tau);
}

TEST_CASE("greedy selects an roi-sorted prefix and respects the bound") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(11);  // up to 12 items
    AllocationInstance inst;
    for (std::size_t i = 0; i < n; ++i) {
      inst.tau_r.push_back(rng.uniform(0.05, 0.5));
      inst.tau_c.push_back(rng.uniform(0.1, 0.5));
    }
    const double total = std::accumulate(inst.tau_c.begin(), inst.tau_c.end(), 0.0);
    inst.budget = rng.uniform(0.0, total);

    const Allocation greedy = greedy_allocate(inst);
    CHECK(greedy.total_cost <= inst.budget + 1e-12);

    // Prefix property along the roi order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ra = inst.tau_r[a] / inst.tau_c[a];
      const double rb = inst.tau_r[b] / inst.tau_c[b];
      if (ra != rb) return ra > rb;
      return a < b;
    });
    bool stopped = false;
    for (const std::size_t i : order) {
      if (greedy.z[i] == 0) {
        stopped = true;
      } else {
        CHECK(!stopped);
      }
    }

    const Allocation opt = brute_force_allocate(inst);
    const double max_tau = *std::max_element(inst.tau_r.begin(), inst.tau_r.end());
    CHECK(greedy.total_revenue >= opt.total_revenue - max_tau - 1e-12);
  }
}

TEST_CASE("revenue scaling leaves the selection unchanged") {
  Rng rng(33);
  AllocationInstance inst;
  for (int i = 0; i < 10; ++i) {
    inst.tau_r.push_back(rng.uniform(0.05, 0.5));
    inst.tau_c.push_back(rng.uniform(0.1, 0.5));
  }
  inst.budget = 1.2;
  const Allocation base = greedy_allocate(inst);

  AllocationInstance scaled = inst;
  for (double& v : scaled.tau_r) v *= 3.0;
  const Allocation after = greedy_allocate(scaled);
  CHECK(base.z == after.z);
}

TEST_CASE("score-ranked greedy follows the external ordering") {
  const AllocationInstance inst{{0.1, 0.2, 0.3}, {0.2, 0.2, 0.2}, 0.4};
  // Scores invert the natural roi order.
  const Allocation alloc = greedy_allocate(inst, {0.9, 0.5, 0.1});
  CHECK(alloc.z == std::vector<std::uint8_t>{1, 1, 0});
  CHECK(alloc.total_revenue == doctest::Approx(0.3));

  CHECK_THROWS_AS(greedy_allocate(inst, {0.1, 0.2}), ShapeError);
}

TEST_SUITE_END();
