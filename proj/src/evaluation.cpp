#include "rdrp/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "rdrp/error.hpp"

namespace rdrp {

CostCurve cost_curve(const std::vector<double>& scores, const RctDataset& ds,
                     std::size_t buckets) {
  if (scores.size() != ds.n()) {
    throw ShapeError("scores length " + std::to_string(scores.size()) +
                     " does not match dataset size " + std::to_string(ds.n()));
  }
  if (ds.n_treated() == 0 || ds.n_control() == 0) {
    throw DegenerateDataError("cost curve needs both treatment arms");
  }
  if (buckets < 2) throw InvalidArgumentError("bucket count must be at least 2");

  std::vector<std::size_t> order(ds.n());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  const std::size_t n = ds.n();
  // Prefix statistics along the sorted order.
  std::vector<double> sum_r1(n + 1, 0.0), sum_c1(n + 1, 0.0);
  std::vector<double> sum_r0(n + 1, 0.0), sum_c0(n + 1, 0.0);
  std::vector<std::size_t> cnt1(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const RctSample& s = ds[order[i]];
    sum_r1[i + 1] = sum_r1[i] + (s.treated ? s.y_r : 0.0);
    sum_c1[i + 1] = sum_c1[i] + (s.treated ? s.y_c : 0.0);
    sum_r0[i + 1] = sum_r0[i] + (s.treated ? 0.0 : s.y_r);
    sum_c0[i + 1] = sum_c0[i] + (s.treated ? 0.0 : s.y_c);
    cnt1[i + 1] = cnt1[i] + (s.treated ? 1 : 0);
  }

  std::vector<std::pair<double, double>> raw;
  raw.reserve(buckets);
  double prev_cost = 0.0;
  double prev_value = 0.0;
  for (std::size_t k = 1; k <= buckets; ++k) {
    const std::size_t m = n * k / buckets;
    const std::size_t m1 = cnt1[m];
    const std::size_t m0 = m - m1;
    if (m1 == 0 || m0 == 0) {
      raw.emplace_back(prev_cost, prev_value);
      continue;
    }
    const double seg = static_cast<double>(m);
    const double value = (sum_r1[m] / static_cast<double>(m1) - sum_r0[m] / static_cast<double>(m0)) * seg;
    const double cost = (sum_c1[m] / static_cast<double>(m1) - sum_c0[m] / static_cast<double>(m0)) * seg;
    raw.emplace_back(cost, value);
    prev_cost = cost;
    prev_value = value;
  }

  const double total_cost = raw.back().first;
  const double total_value = raw.back().second;
  if (total_cost == 0.0) {
    throw DegenerateNormalizationError("total incremental cost is zero");
  }
  const double value_scale = total_value != 0.0 ? total_value : 1.0;

  CostCurve curve;
  curve.buckets = buckets;
  curve.points.reserve(buckets + 1);
  curve.points.emplace_back(0.0, 0.0);
  for (const auto& [cost, value] : raw) {
    curve.points.emplace_back(cost / total_cost, value / value_scale);
  }
  return curve;
}

double aucc(const CostCurve& curve) {
  if (curve.points.size() < 2) throw InvalidArgumentError("curve needs at least 2 points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& [x0, y0] = curve.points[i - 1];
    const auto& [x1, y1] = curve.points[i];
    area += (x1 - x0) * (y1 + y0) * 0.5;
  }
  return area;
}

double empirical_coverage(const std::vector<std::pair<double, double>>& intervals, double value) {
  if (intervals.empty()) throw InvalidArgumentError("coverage of an empty interval list");
  std::size_t hits = 0;
  for (const auto& [lo, hi] : intervals) {
    if (lo <= value && value <= hi) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

}  // namespace rdrp
