#include <cmath>
#include <vector>

#include <doctest.h>

#include "rdrp/conformal.hpp"
#include "rdrp/dataset.hpp"
#include "rdrp/error.hpp"
#include "rdrp/evaluation.hpp"
#include "rdrp/rng.hpp"

using namespace rdrp;

namespace {

CostCurve curve_of(std::vector<std::pair<double, double>> points) {
  CostCurve c;
  c.points = std::move(points);
  c.buckets = c.points.size() - 1;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("aucc of elementary polylines") {
  CHECK(aucc(curve_of({{0, 0}, {1, 1}})) == doctest::Approx(0.5));
  CHECK(aucc(curve_of({{0, 0}, {0, 1}, {1, 1}})) == doctest::Approx(1.0));
  CHECK(aucc(curve_of({{0, 0}, {1, 0}, {1, 1}})) == doctest::Approx(0.0));
  CHECK_THROWS_AS(aucc(curve_of({{0, 0}})), InvalidArgumentError);
}

TEST_CASE("random, oracle and inverted rankings order as expected") {
  double random_sum = 0.0, oracle_sum = 0.0, inverted_sum = 0.0;
  const int trials = 3;
  for (int t = 0; t < trials; ++t) {
    SyntheticConfig cfg;
    cfg.n = 20000;
    cfg.d = 8;
    cfg.seed = 500 + t;
    const auto [ds, gt] = generate_synthetic(cfg, {});

    Rng rng(900 + t);
    std::vector<double> random_scores(ds.n());
    for (double& v : random_scores) v = rng.uniform();
    std::vector<double> inverted(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) inverted[i] = -gt.roi[i];

    random_sum += aucc(cost_curve(random_scores, ds, 100));
    oracle_sum += aucc(cost_curve(gt.roi, ds, 100));
    inverted_sum += aucc(cost_curve(inverted, ds, 100));
  }
  const double random_mean = random_sum / trials;
  const double oracle_mean = oracle_sum / trials;
  const double inverted_mean = inverted_sum / trials;
  CHECK(random_mean > 0.45);
  CHECK(random_mean < 0.55);
  CHECK(oracle_mean >= random_mean + 0.05);
  CHECK(inverted_mean < 0.5);
}

TEST_CASE("aucc only depends on the ranking") {
  SyntheticConfig cfg;
  cfg.n = 5000;
  cfg.d = 4;
  cfg.seed = 77;
  const auto [ds, gt] = generate_synthetic(cfg, {});

  std::vector<double> transformed(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) transformed[i] = std::exp(3.0 * gt.roi[i]) + 5.0;

  const CostCurve a = cost_curve(gt.roi, ds, 100);
  const CostCurve b = cost_curve(transformed, ds, 100);
  CHECK(a.points == b.points);
}

TEST_CASE("curve endpoints are normalized") {
  SyntheticConfig cfg;
  cfg.n = 3000;
  cfg.d = 3;
  cfg.seed = 88;
  const auto [ds, gt] = generate_synthetic(cfg, {});
  const CostCurve curve = cost_curve(gt.roi, ds, 50);
  REQUIRE(curve.points.size() == 51);
  CHECK(curve.points.front().first == 0.0);
  CHECK(curve.points.front().second == 0.0);
  CHECK(curve.points.back().first == doctest::Approx(1.0));
  CHECK(curve.points.back().second == doctest::Approx(1.0));
}

TEST_CASE("cost curve error paths") {
  std::vector<RctSample> one_arm(5, RctSample{{0.0}, true, 1.0, 1.0});
  const RctDataset single(std::move(one_arm), 1);
  CHECK_THROWS_AS(cost_curve({1, 2, 3, 4, 5}, single, 2), DegenerateDataError);

  // Both arms but identical cost outcomes: zero total incremental cost.
  std::vector<RctSample> flat;
  for (int i = 0; i < 6; ++i) flat.push_back({{double(i)}, i % 2 == 0, double(i % 2), 1.0});
  const RctDataset no_cost(std::move(flat), 1);
  CHECK_THROWS_AS(cost_curve({6, 5, 4, 3, 2, 1}, no_cost, 2), DegenerateNormalizationError);

  SyntheticConfig cfg;
  cfg.n = 100;
  cfg.d = 2;
  cfg.seed = 99;
  const auto [ds, gt] = generate_synthetic(cfg, {});
  CHECK_THROWS_AS(cost_curve(gt.roi, ds, 1), InvalidArgumentError);
  CHECK_THROWS_AS(cost_curve({1.0, 2.0}, ds, 10), ShapeError);
}

TEST_CASE("segments lacking an arm carry the previous point forward") {
  // Scores put two treated samples on top: the first of four buckets has no
  // control sample, so its point repeats (0,0) instead of going undefined.
  std::vector<RctSample> samples;
  samples.push_back({{0.0}, true, 1.0, 1.0});
  samples.push_back({{0.0}, true, 1.0, 1.0});
  samples.push_back({{0.0}, false, 0.0, 0.0});
  samples.push_back({{0.0}, true, 1.0, 1.0});
  const RctDataset ds(std::move(samples), 1);
  const CostCurve curve = cost_curve({9.0, 8.0, 7.0, 6.0}, ds, 4);
  REQUIRE(curve.points.size() == 5);
  CHECK(curve.points[1] == std::pair<double, double>{0.0, 0.0});
  CHECK(curve.points[2] == std::pair<double, double>{0.0, 0.0});
  CHECK(std::isfinite(aucc(curve)));
}

TEST_CASE("bucketings agree on large samples") {
  SyntheticConfig cfg;
  cfg.n = 20000;
  cfg.d = 6;
  cfg.seed = 111;
  const auto [ds, gt] = generate_synthetic(cfg, {});
  const double fine = aucc(cost_curve(gt.roi, ds, ds.n()));
  const double coarse = aucc(cost_curve(gt.roi, ds, 100));
  CHECK(std::abs(fine - coarse) < 0.01);
}

TEST_CASE("empirical_coverage counts containing intervals") {
  CHECK(empirical_coverage({{0.0, 1.0}, {0.0, 1.0}}, 0.4) == doctest::Approx(1.0));
  CHECK(empirical_coverage({{0.2, 0.2}, {0.7, 0.7}}, 0.4) == doctest::Approx(0.0));
  CHECK(empirical_coverage({{0.0, 0.5}, {0.6, 1.0}}, 0.4) == doctest::Approx(0.5));
  CHECK_THROWS_AS(empirical_coverage({}, 0.4), InvalidArgumentError);
}

TEST_CASE("coverage is monotone in alpha") {
  Rng rng(123);
  const std::size_t n = 500;
  std::vector<double> roi_hat(n), r_hat(n);
  for (std::size_t i = 0; i < n; ++i) {
    roi_hat[i] = rng.uniform(0.1, 0.9);
    r_hat[i] = rng.uniform(0.01, 0.2);
  }
  const double roi_star = 0.5;
  const std::vector<double> scores = conformal_scores(roi_star, roi_hat, r_hat);

  double prev_q = std::numeric_limits<double>::infinity();
  double prev_coverage = 1.0;
  for (const double alpha : {0.05, 0.1, 0.2, 0.4}) {
    const double q = conformal_quantile(scores, alpha);
    CHECK(q <= prev_q);
    std::vector<std::pair<double, double>> intervals;
    for (std::size_t i = 0; i < n; ++i) intervals.push_back(prediction_interval(roi_hat[i], r_hat[i], q));
    const double coverage = empirical_coverage(intervals, roi_star);
    CHECK(coverage <= prev_coverage);
    CHECK(coverage >= 1.0 - alpha);  // guaranteed on the calibration data itself
    prev_q = q;
    prev_coverage = coverage;
  }
}

TEST_SUITE_END();
