#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rdrp {

/// Budgeted treatment assignment instance: per-individual revenue and cost
/// uplifts, both strictly positive, and a budget.
struct AllocationInstance {
  std::vector<double> tau_r;
  std::vector<double> tau_c;
  double budget = 0.0;
};

struct Allocation {
  std::vector<std::uint8_t> z;
  double total_revenue = 0.0;
  double total_cost = 0.0;
};

/// Greedy budgeted assignment: individuals sorted by tau_r/tau_c descending
/// (ties by index), treated in order, scan stops at the first individual
/// whose cost would exceed the remaining budget.
Allocation greedy_allocate(const AllocationInstance& instance);

/// Same greedy scan but ranked by external scores instead of the uplift
/// ratio; used when the ranking key is a model prediction.
Allocation greedy_allocate(const AllocationInstance& instance, const std::vector<double>& scores);

/// Exhaustive optimum over all subsets; at most 22 individuals. Revenue ties
/// resolve to the lexicographically smallest assignment vector.
Allocation brute_force_allocate(const AllocationInstance& instance);

}  // namespace rdrp
