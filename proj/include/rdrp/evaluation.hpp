#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rdrp/dataset.hpp"

namespace rdrp {

/// Normalized cumulative incremental (cost, value) polyline, prepended with
/// (0,0). The last point is (1,1) whenever the totals are nonzero.
struct CostCurve {
  std::vector<std::pair<double, double>> points;
  std::size_t buckets = 0;
};

/// Sorts by score (descending, ties by index) and accumulates the
/// diff-in-means incremental value and cost of each top segment. Segments
/// lacking either arm carry the previous point forward.
CostCurve cost_curve(const std::vector<double>& scores, const RctDataset& ds,
                     std::size_t buckets = 100);

/// Trapezoid area of the polyline over the normalized-cost axis.
double aucc(const CostCurve& curve);

/// Fraction of [lo, hi] intervals containing `value`.
double empirical_coverage(const std::vector<std::pair<double, double>>& intervals, double value);

}  // namespace rdrp
