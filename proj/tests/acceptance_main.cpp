// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdrp/allocation.hpp"
#include "rdrp/conformal.hpp"
#include "rdrp/dataset.hpp"
#include "rdrp/evaluation.hpp"
#include "rdrp/experiment.hpp"
#include "rdrp/math.hpp"
#include "rdrp/model.hpp"
#include "rdrp/rng.hpp"

using namespace rdrp;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report_line(int index, bool pass, const std::string& name, const std::string& detail,
                 double seconds) {
  std::printf("[%2d/10] %s %-28s %s [%.1fs]\n", index, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

RctDataset random_two_arm_dataset(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<RctSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].x.resize(d);
    for (double& v : samples[i].x) v = rng.normal();
    samples[i].treated = i % 2 == 0;
    samples[i].y_r = rng.uniform(0.0, 0.5);
    samples[i].y_c = rng.uniform(0.2, 1.0);
  }
  return RctDataset(std::move(samples), d);
}

Batch full_batch(const RctDataset& ds) {
  std::vector<std::size_t> idx(ds.n());
  std::iota(idx.begin(), idx.end(), 0);
  return make_batch(ds, idx);
}

double min_preactivation(const MlpParams& params, const RctDataset& ds) {
  double best = std::numeric_limits<double>::infinity();
  for (const RctSample& s : ds.samples()) {
    for (std::size_t j = 0; j < params.hidden; ++j) {
      double pre = params.b1[j];
      for (std::size_t k = 0; k < params.d; ++k) pre += params.w1[j * params.d + k] * s.x[k];
      best = std::min(best, std::abs(pre));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// 1. Analytic gradient vs central finite differences.
void criterion_gradient_oracle() {
  const auto start = Clock::now();
  Rng rng(0xACCE01);
  const double step = 1e-5;
  double worst = 0.0;
  int done = 0;
  while (done < 50) {
    const RctDataset ds = random_two_arm_dataset(rng, 8, 4);
    MlpParams params = init_params(4, 12, rng.next_u64());
    // Finite differences are undefined across a rectifier kink; re-draw when
    // a pre-activation sits within reach of the probe step.
    if (min_preactivation(params, ds) < 1e-3) continue;
    ++done;

    const Batch batch = full_batch(ds);
    const MlpParams grad = drp_loss_grad(params, batch);
    auto probe = [&](double* slot, double analytic) {
      const double saved = *slot;
      *slot = saved + step;
      const double up = drp_loss(params, batch);
      *slot = saved - step;
      const double down = drp_loss(params, batch);
      *slot = saved;
      const double fd = (up - down) / (2.0 * step);
      const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(fd - analytic) / denom);
    };
    for (std::size_t i = 0; i < params.w1.size(); ++i) probe(&params.w1[i], grad.w1[i]);
    for (std::size_t i = 0; i < params.b1.size(); ++i) probe(&params.b1[i], grad.b1[i]);
    for (std::size_t i = 0; i < params.w2.size(); ++i) probe(&params.w2[i], grad.w2[i]);
    probe(&params.b2, grad.b2);
  }
  const double secs = elapsed(start);
  report_line(1, worst < 1e-5 && secs < 10.0, "gradient oracle",
              fmt("max_rel_err=%.2e (<1e-5), 50 pairs", worst), secs);
}

// ---------------------------------------------------------------------------
// 2. Shared-score loss is convex for batches with positive cost uplift.
void criterion_convexity() {
  const auto start = Clock::now();
  Rng rng(0xACCE02);
  double worst = std::numeric_limits<double>::infinity();
  int done = 0;
  while (done < 20) {
    const RctDataset ds = random_two_arm_dataset(rng, 12, 3);
    if (diff_in_means(ds).delta_c <= 0.0) continue;
    ++done;

    MlpParams net;
    net.d = 3;
    net.hidden = 10;
    net.w1.assign(30, 0.0);
    net.b1.assign(10, 0.0);
    net.w2.assign(10, 0.0);

    const Batch batch = full_batch(ds);
    std::vector<double> losses;
    for (double s = -6.0; s <= 6.0 + 1e-12; s += 0.1) {
      net.b2 = s;
      losses.push_back(drp_loss(net, batch));
    }
    for (std::size_t i = 1; i + 1 < losses.size(); ++i) {
      worst = std::min(worst, losses[i + 1] - 2.0 * losses[i] + losses[i - 1]);
    }
  }
  report_line(2, worst >= -1e-9, "convexity probe",
              fmt("min 2nd difference=%.2e (>=-1e-9), 20 batches", worst), elapsed(start));
}

// ---------------------------------------------------------------------------
// 3. Binary search agrees with the diff-in-means ratio.
void criterion_roi_star_oracle() {
  const auto start = Clock::now();
  const BinarySearchConfig cfg;
  const auto max_iters = static_cast<std::size_t>(std::floor(std::log2(1.0 / cfg.epsilon))) + 1;

  Rng rng(0xACCE03);
  double worst_err = 0.0;
  std::size_t worst_iters = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double ratio = rng.uniform(0.05, 0.95);
    // Cost diff-in-means at least 0.5: the derivative stop |L'| < eps then
    // bounds the roi error by eps/dYc <= 2 eps.
    const double delta_c = rng.uniform(0.5, 1.0);
    std::vector<RctSample> samples(2);
    samples[0] = {{0.0}, true, ratio * delta_c, delta_c};
    samples[1] = {{0.0}, false, 0.0, 0.0};
    const RctDataset ds(std::move(samples), 1);

    const RoiStarResult res = find_roi_star_detail(ds, cfg);
    worst_err = std::max(worst_err, std::abs(res.roi_star - ratio));
    worst_iters = std::max(worst_iters, res.iterations);
  }
  const double secs = elapsed(start);
  const bool pass = worst_err <= 2.0 * cfg.epsilon && worst_iters <= max_iters && secs < 5.0;
  report_line(3, pass, "roi* binary search oracle",
              fmt("max_err=%.5f (<=%.3f), max_iters=%zu (<=%zu)", worst_err, 2.0 * cfg.epsilon,
                  worst_iters, max_iters),
              secs);
}

// ---------------------------------------------------------------------------
// 4. Split conformal coverage of roi* on exchangeable calibration/test.
void criterion_coverage() {
  const auto start = Clock::now();
  const double alpha = 0.1;
  double coverage_sum = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    SyntheticConfig gen;
    gen.n = 4000;
    gen.d = 12;
    gen.outcome_model = OutcomeModel::kGaussian;
    gen.noise = 0.1;
    gen.seed = 31000 + t;
    const auto [train_ds, train_gt] = generate_synthetic(gen, {});
    gen.stream = 1;
    gen.n = 2000;
    const auto [cali, cali_gt] = generate_synthetic(gen, {});
    gen.stream = 2;
    const auto [test_ds, test_gt] = generate_synthetic(gen, {});

    TrainConfig tc;
    tc.epochs = 10;
    tc.hidden = 64;
    tc.seed = 77 + t;
    const MlpParams params = train(train_ds, tc);

    std::vector<std::vector<double>> features;
    features.reserve(test_ds.n());
    for (const RctSample& s : test_ds.samples()) features.push_back(s.x);
    McConfig mc;
    mc.passes = 50;
    mc.retention = 0.9;
    mc.seed = 55 + t;
    RdrpOptions opts;
    opts.clamp_roi_star = true;
    const RdrpResult result = rdrp_predict(params, cali, features, alpha, mc, {}, opts);

    std::vector<std::pair<double, double>> intervals;
    intervals.reserve(result.predictions.size());
    for (const RoiPrediction& p : result.predictions) intervals.emplace_back(p.lo, p.hi);
    coverage_sum += empirical_coverage(intervals, find_roi_star(test_ds, {}, true));
  }
  const double mean_coverage = coverage_sum / trials;
  const double secs = elapsed(start);
  const bool pass = mean_coverage >= 0.87 && mean_coverage <= 0.97 && secs < 120.0;
  report_line(4, pass, "conformal coverage",
              fmt("mean coverage=%.4f (in [0.87, 0.97]), 20 seeds, n=2000", mean_coverage), secs);
}

// ---------------------------------------------------------------------------
// 5. Quantile matches the direct order statistic for all n and alpha.
void criterion_quantile_formula() {
  const auto start = Clock::now();
  Rng rng(0xACCE05);
  bool ok = true;
  std::string first_mismatch;
  for (std::size_t n = 1; n <= 200 && ok; ++n) {
    std::vector<double> scores(n);
    for (double& v : scores) v = rng.uniform(0.0, 10.0);
    for (const double alpha : {0.05, 0.1, 0.2}) {
      const double got = conformal_quantile(scores, alpha);

      // Independent oracle: smallest integer k with k >= (1-alpha)(n+1),
      // then the k-th smallest of a fully sorted copy.
      const long double level = (1.0L - static_cast<long double>(alpha)) * (n + 1.0L);
      std::size_t k = static_cast<std::size_t>(level);
      if (static_cast<long double>(k) < level) ++k;
      double expected;
      if (k > n) {
        expected = std::numeric_limits<double>::infinity();
      } else {
        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        expected = sorted[k - 1];
      }
      const bool same = (std::isinf(got) && std::isinf(expected)) || got == expected;
      if (!same) {
        ok = false;
        first_mismatch = fmt("n=%zu alpha=%.2f got=%g want=%g", n, alpha, got, expected);
        break;
      }
    }
  }
  report_line(5, ok, "quantile order statistic",
              ok ? "exact match for n in [1,200], alpha in {0.05,0.1,0.2}" : first_mismatch,
              elapsed(start));
}

// ---------------------------------------------------------------------------
// 6. Greedy allocation: feasible, prefix-structured, within the additive
//    bound of the exhaustive optimum.
void criterion_knapsack_oracle() {
  const auto start = Clock::now();
  Rng rng(0xACCE06);
  bool ok = true;
  std::string detail = "500 instances: feasible, prefix, bound";
  for (int trial = 0; trial < 500 && ok; ++trial) {
    const std::size_t n = 2 + rng.below(11);
    AllocationInstance inst;
    for (std::size_t i = 0; i < n; ++i) {
      inst.tau_r.push_back(rng.uniform(0.05, 0.5));
      inst.tau_c.push_back(rng.uniform(0.1, 0.5));
    }
    inst.budget = rng.uniform(0.0, std::accumulate(inst.tau_c.begin(), inst.tau_c.end(), 0.0));

    const Allocation greedy = greedy_allocate(inst);
    if (greedy.total_cost > inst.budget + 1e-9) {
      ok = false;
      detail = fmt("trial %d: infeasible cost %.6f > %.6f", trial, greedy.total_cost, inst.budget);
      break;
    }

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
      } else if (stopped) {
        ok = false;
        detail = fmt("trial %d: selection is not a prefix of the roi order", trial);
        break;
      }
    }
    if (!ok) break;

    const Allocation opt = brute_force_allocate(inst);
    const double max_tau = *std::max_element(inst.tau_r.begin(), inst.tau_r.end());
    if (greedy.total_revenue < opt.total_revenue - max_tau - 1e-12) {
      ok = false;
      detail = fmt("trial %d: greedy %.6f < OPT %.6f - max_tau %.6f", trial, greedy.total_revenue,
                   opt.total_revenue, max_tau);
    }
  }
  const double secs = elapsed(start);
  report_line(6, ok && secs < 30.0, "greedy vs exhaustive bound", detail, secs);
}

// ---------------------------------------------------------------------------
// 7. Cost curve sanity: random ~ 0.5, oracle ranking clearly above, inverted
//    ranking below 0.5.
void criterion_aucc_sanity() {
  const auto start = Clock::now();
  double random_sum = 0.0, oracle_sum = 0.0, inverted_sum = 0.0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    SyntheticConfig cfg;
    cfg.n = 20000;
    cfg.d = 12;
    cfg.seed = 52000 + t;
    const auto [ds, gt] = generate_synthetic(cfg, {});

    Rng rng(7100 + t);
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
  const bool pass = std::abs(random_mean - 0.5) <= 0.05 &&
                    oracle_mean >= random_mean + 0.05 && inverted_mean < 0.5;
  report_line(7, pass, "aucc sanity",
              fmt("random=%.4f oracle=%.4f inverted=%.4f", random_mean, oracle_mean,
                  inverted_mean),
              elapsed(start));
}

// ---------------------------------------------------------------------------
// 8 & 10. Directional reproduction of the four-setting benchmark.
ExperimentConfig benchmark_config() {
  ExperimentConfig cfg;
  cfg.generator.n = 100000;
  cfg.generator.d = 12;
  cfg.generator.outcome_model = OutcomeModel::kBernoulli;
  cfg.generator.seed = 2026;
  cfg.shift = {ShiftKind::kMixtureReweight, 0.0};
  cfg.settings = {Setting::kSuNo, Setting::kSuCo, Setting::kInNo, Setting::kInCo};
  cfg.methods = {Method::kRandom, Method::kDrp, Method::kRdrp};
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.train.epochs = 15;
  cfg.train.hidden = 100;
  cfg.train.seed = 11;
  cfg.mc.seed = 7;
  return cfg;
}

double aggregate_aucc(const Report& report, Setting setting, Method method) {
  for (const Aggregate& agg : report.aggregates) {
    if (agg.setting == setting && agg.method == method) return agg.aucc_mean;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct GapSummary {
  double gap_suno = 0.0;
  double gap_inco = 0.0;
  double secs = 0.0;
};

GapSummary criterion_directional() {
  const auto start = Clock::now();
  const Report report = run_experiment(benchmark_config());
  const double secs = elapsed(start);

  const double suno_random = aggregate_aucc(report, Setting::kSuNo, Method::kRandom);
  const double suno_drp = aggregate_aucc(report, Setting::kSuNo, Method::kDrp);
  const double suno_rdrp = aggregate_aucc(report, Setting::kSuNo, Method::kRdrp);
  const double suco_drp = aggregate_aucc(report, Setting::kSuCo, Method::kDrp);
  const double suco_rdrp = aggregate_aucc(report, Setting::kSuCo, Method::kRdrp);
  const double inno_drp = aggregate_aucc(report, Setting::kInNo, Method::kDrp);
  const double inno_rdrp = aggregate_aucc(report, Setting::kInNo, Method::kRdrp);
  const double inco_drp = aggregate_aucc(report, Setting::kInCo, Method::kDrp);
  const double inco_rdrp = aggregate_aucc(report, Setting::kInCo, Method::kRdrp);

  const bool pass8 = !report.any_failed() && suco_rdrp >= suco_drp && inno_rdrp >= inno_drp &&
                     inco_rdrp >= inco_drp && suno_drp >= suno_random + 0.03 && secs < 900.0;
  report_line(8, pass8, "directional reproduction",
              fmt("gaps SuCo=%+.4f InNo=%+.4f InCo=%+.4f, SuNo drp-random=%+.4f",
                  suco_rdrp - suco_drp, inno_rdrp - inno_drp, inco_rdrp - inco_drp,
                  suno_drp - suno_random),
              secs);
  return {suno_rdrp - suno_drp, inco_rdrp - inco_drp, secs};
}

void criterion_gap_ordering(const GapSummary& gaps) {
  report_line(10, gaps.gap_inco >= gaps.gap_suno - 0.005, "robustness gap ordering",
              fmt("gap(InCo)=%+.4f vs gap(SuNo)=%+.4f (tol -0.005)", gaps.gap_inco,
                  gaps.gap_suno),
              gaps.secs);
}

// ---------------------------------------------------------------------------
// 9. Byte-identical reruns outside the timing section.
void criterion_determinism() {
  const auto start = Clock::now();
  ExperimentConfig cfg = benchmark_config();
  cfg.generator.n = 20000;
  cfg.methods = {Method::kRandom, Method::kTpmSl, Method::kDrp, Method::kRdrp};
  cfg.seeds = {1, 2};
  cfg.train.epochs = 5;

  auto stripped = [](const Report& r) {
    nlohmann::json doc = nlohmann::json::parse(report_to_json(r));
    doc.erase("timings");
    return doc.dump();
  };
  const std::string a = stripped(run_experiment(cfg));
  const std::string b = stripped(run_experiment(cfg));
  report_line(9, a == b, "experiment determinism",
              a == b ? "two runs byte-identical outside timings" : "reruns differ",
              elapsed(start));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_gradient_oracle();
  criterion_convexity();
  criterion_roi_star_oracle();
  criterion_coverage();
  criterion_quantile_formula();
  criterion_knapsack_oracle();
  criterion_aucc_sanity();
  const GapSummary gaps = criterion_directional();
  criterion_determinism();
  criterion_gap_ordering(gaps);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
