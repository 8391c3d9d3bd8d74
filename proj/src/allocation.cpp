#include "rdrp/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rdrp/error.hpp"

namespace rdrp {

namespace {

void validate_instance(const AllocationInstance& instance) {
  if (instance.tau_r.size() != instance.tau_c.size()) {
    throw ShapeError("tau_r and tau_c lengths differ");
  }
  if (!(instance.budget >= 0.0)) throw InvalidArgumentError("budget must be non-negative");
  for (std::size_t i = 0; i < instance.tau_r.size(); ++i) {
    if (!(instance.tau_r[i] > 0.0) || !(instance.tau_c[i] > 0.0)) {
      throw AssumptionViolationError("uplift of individual " + std::to_string(i) +
                                     " is not strictly positive");
    }
  }
}

/// Feasibility tolerance absorbing accumulation rounding, e.g. 0.3 + 0.4
/// exceeding a 0.7 budget by one ulp.
double budget_slack(double budget) { return 1e-9 * std::max(1.0, std::abs(budget)); }

Allocation greedy_over_order(const AllocationInstance& instance,
                             const std::vector<std::size_t>& order) {
  Allocation out;
  out.z.assign(instance.tau_r.size(), 0);
  const double limit = instance.budget + budget_slack(instance.budget);
  for (const std::size_t i : order) {
    if (out.total_cost + instance.tau_c[i] > limit) break;  // prefix rule
    out.z[i] = 1;
    out.total_cost += instance.tau_c[i];
    out.total_revenue += instance.tau_r[i];
  }
  return out;
}

}  // namespace

Allocation greedy_allocate(const AllocationInstance& instance) {
  validate_instance(instance);
  std::vector<std::size_t> order(instance.tau_r.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = instance.tau_r[a] / instance.tau_c[a];
    const double rb = instance.tau_r[b] / instance.tau_c[b];
    if (ra != rb) return ra > rb;
    return a < b;
  });
  return greedy_over_order(instance, order);
}

Allocation greedy_allocate(const AllocationInstance& instance, const std::vector<double>& scores) {
  validate_instance(instance);
  if (scores.size() != instance.tau_r.size()) {
    throw ShapeError("scores length does not match the instance");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return greedy_over_order(instance, order);
}

Allocation brute_force_allocate(const AllocationInstance& instance) {
  validate_instance(instance);
  const std::size_t n = instance.tau_r.size();
  if (n > 22) {
    throw SizeLimitError("brute force limited to 22 individuals, got " + std::to_string(n));
  }

  Allocation best;
  best.z.assign(n, 0);
  // Masks enumerated so that z vectors appear in lexicographic order; the
  // first strict maximum is therefore the lexicographically smallest tie.
  const double feasible_limit = instance.budget + budget_slack(instance.budget);
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    double revenue = 0.0;
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> (n - 1 - i)) & 1u) {
        revenue += instance.tau_r[i];
        cost += instance.tau_c[i];
      }
    }
    if (cost > feasible_limit || revenue <= best.total_revenue) continue;
    best.total_revenue = revenue;
    best.total_cost = cost;
    for (std::size_t i = 0; i < n; ++i) best.z[i] = (mask >> (n - 1 - i)) & 1u;
  }
  return best;
}

}  // namespace rdrp
