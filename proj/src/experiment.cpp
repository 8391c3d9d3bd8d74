#include "rdrp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "rdrp/allocation.hpp"
#include "rdrp/error.hpp"
#include "rdrp/evaluation.hpp"
#include "rdrp/rng.hpp"

namespace rdrp {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSubsampleTag = 0x494e53u;
constexpr std::uint64_t kRandomScoreTag = 0x524e44u;
constexpr std::uint64_t kTrainTag = 0x545247u;
constexpr std::uint64_t kMcTag = 0x4d43u;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_shifted(Setting s) { return s == Setting::kSuCo || s == Setting::kInCo; }
bool is_insufficient(Setting s) { return s == Setting::kInNo || s == Setting::kInCo; }

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.settings.empty()) throw InvalidConfigError("experiment needs at least one setting");
  if (cfg.methods.empty()) throw InvalidConfigError("experiment needs at least one method");
  if (cfg.seeds.empty()) throw InvalidConfigError("experiment needs at least one seed");
  if (!(cfg.subsample_rate > 0.0) || cfg.subsample_rate > 1.0) {
    throw InvalidConfigError("subsample_rate must lie in (0, 1]");
  }
  double sum = 0.0;
  for (double f : cfg.split_fractions) {
    if (!(f > 0.0)) throw InvalidConfigError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidConfigError("split fractions must sum to 1");
}

bool wants(const ExperimentConfig& cfg, Method m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

/// Realized revenue of the greedy scan ranked by model scores, with
/// ground-truth uplifts and a budget given as a fraction of the total cost
/// uplift.
double realized_revenue(const std::vector<double>& scores, const GroundTruth& truth,
                        double budget_fraction) {
  AllocationInstance instance;
  instance.tau_r = truth.tau_r;
  instance.tau_c = truth.tau_c;
  instance.budget =
      budget_fraction * std::accumulate(truth.tau_c.begin(), truth.tau_c.end(), 0.0);
  return greedy_allocate(instance, scores).total_revenue;
}

struct CellKey {
  Setting setting;
  std::uint64_t seed;
};

/// Runs every requested method for one (setting, seed) pair; datasets and the
/// trained DRP model are shared across methods of the cell.
std::vector<CellResult> run_cell(const ExperimentConfig& cfg, const CellKey& key) {
  std::vector<CellResult> results;
  const std::uint64_t cell_seed = mix_seed(cfg.generator.seed, key.seed);

  const auto t_generate = Clock::now();
  const CellDatasets data = prepare_cell_datasets(cfg, key.setting, key.seed);
  const double generate_s = seconds_since(t_generate);

  std::vector<std::vector<double>> test_features;
  test_features.reserve(data.test.n());
  for (const RctSample& s : data.test.samples()) test_features.push_back(s.x);

  // The DRP model is trained once and reused by both drp and rdrp.
  MlpParams drp_params;
  double drp_train_s = 0.0;
  if (wants(cfg, Method::kDrp) || wants(cfg, Method::kRdrp)) {
    TrainConfig tc = cfg.train;
    tc.objective = Objective::kDrp;
    tc.seed = mix_seed(cfg.train.seed, cell_seed, kTrainTag);
    const auto t0 = Clock::now();
    drp_params = train(data.train, tc);
    drp_train_s = seconds_since(t0);
  }

  for (const Method method : cfg.methods) {
    CellResult cell;
    cell.setting = key.setting;
    cell.method = method;
    cell.seed = key.seed;
    cell.timings.generate_s = generate_s;
    try {
      std::vector<double> scores(data.test.n(), 0.0);
      switch (method) {
        case Method::kRandom: {
          Rng rng(mix_seed(cell_seed, kRandomScoreTag));
          for (double& v : scores) v = rng.uniform();
          break;
        }
        case Method::kTpmSl: {
          TrainConfig tc = cfg.train;
          tc.objective = Objective::kMseRegression;
          tc.mse_target = MseTarget::kRevenue;
          tc.seed = mix_seed(cfg.train.seed, cell_seed, kTrainTag + 1);
          const auto t0 = Clock::now();
          const MlpParams model_r = train(data.train, tc);
          tc.mse_target = MseTarget::kCost;
          tc.seed = mix_seed(cfg.train.seed, cell_seed, kTrainTag + 2);
          const MlpParams model_c = train(data.train, tc);
          cell.timings.train_s = seconds_since(t0);
          const auto t1 = Clock::now();
          for (std::size_t i = 0; i < test_features.size(); ++i) {
            scores[i] = tpm_sl_predict(model_r, model_c, test_features[i]);
          }
          cell.timings.inference_s = seconds_since(t1);
          break;
        }
        case Method::kDrp: {
          cell.timings.train_s = drp_train_s;
          const auto t1 = Clock::now();
          for (std::size_t i = 0; i < test_features.size(); ++i) {
            scores[i] = predict_roi(drp_params, test_features[i]);
          }
          cell.timings.inference_s = seconds_since(t1);
          break;
        }
        case Method::kRdrp: {
          cell.timings.train_s = drp_train_s;
          McConfig mc = cfg.mc;
          mc.seed = mix_seed(cfg.mc.seed, cell_seed, kMcTag);
          RdrpOptions opts;
          opts.include_identity_form = cfg.include_identity_form;
          opts.clamp_roi_star = true;
          opts.buckets = cfg.buckets;
          const auto t1 = Clock::now();
          const ConformalCalibration calibration =
              calibrate_rdrp(drp_params, data.cali, cfg.alpha, mc, cfg.bsearch, opts);
          cell.timings.calibrate_s = seconds_since(t1);
          const auto t2 = Clock::now();
          std::vector<std::pair<double, double>> intervals;
          intervals.reserve(test_features.size());
          for (std::size_t i = 0; i < test_features.size(); ++i) {
            const RoiPrediction pred = predict_rdrp(drp_params, test_features[i], calibration);
            scores[i] = pred.roi_tilde;
            intervals.emplace_back(pred.lo, pred.hi);
          }
          cell.timings.inference_s = seconds_since(t2);
          std::vector<std::string> clamp_warnings;
          const double roi_star_test =
              find_roi_star(data.test, cfg.bsearch, /*clamp_to_scope=*/true, &clamp_warnings);
          cell.coverage = empirical_coverage(intervals, roi_star_test);
          cell.calibration = calibration;
          break;
        }
      }

      const auto t3 = Clock::now();
      cell.curve = cost_curve(scores, data.test, cfg.buckets);
      cell.aucc = aucc(cell.curve);
      for (const double fraction : cfg.budget_fractions) {
        cell.greedy_revenue[fraction] = realized_revenue(scores, data.test_truth, fraction);
      }
      cell.timings.evaluate_s = seconds_since(t3);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
    results.push_back(std::move(cell));
  }
  return results;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

const char* setting_name(Setting setting) {
  switch (setting) {
    case Setting::kSuNo:
      return "SuNo";
    case Setting::kSuCo:
      return "SuCo";
    case Setting::kInNo:
      return "InNo";
    case Setting::kInCo:
      return "InCo";
  }
  return "unknown";
}

Setting setting_from_name(const std::string& name) {
  if (name == "SuNo") return Setting::kSuNo;
  if (name == "SuCo") return Setting::kSuCo;
  if (name == "InNo") return Setting::kInNo;
  if (name == "InCo") return Setting::kInCo;
  throw InvalidArgumentError("unknown setting '" + name + "'");
}

const char* method_name(Method method) {
  switch (method) {
    case Method::kRandom:
      return "random";
    case Method::kTpmSl:
      return "tpm_sl";
    case Method::kDrp:
      return "drp";
    case Method::kRdrp:
      return "rdrp";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "random") return Method::kRandom;
  if (name == "tpm_sl") return Method::kTpmSl;
  if (name == "drp") return Method::kDrp;
  if (name == "rdrp") return Method::kRdrp;
  throw InvalidArgumentError("unknown method '" + name + "'");
}

bool Report::any_failed() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.failed; });
}

CellDatasets prepare_cell_datasets(const ExperimentConfig& cfg, Setting setting,
                                   std::uint64_t seed) {
  const std::uint64_t cell_seed = mix_seed(cfg.generator.seed, seed);
  const double n = static_cast<double>(cfg.generator.n);
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.split_fractions[0] * n));
  const auto n_cali = static_cast<std::size_t>(std::llround(cfg.split_fractions[1] * n));
  const auto n_test = static_cast<std::size_t>(std::llround(cfg.split_fractions[2] * n));

  const ShiftSpec none{ShiftKind::kNone, 0.0};
  const ShiftSpec& cali_test_shift = is_shifted(setting) ? cfg.shift : none;

  SyntheticConfig gen = cfg.generator;
  gen.seed = cell_seed;

  CellDatasets out;
  gen.n = n_train;
  gen.stream = 0;
  out.train = generate_synthetic(gen, none).first;
  if (is_insufficient(setting)) {
    out.train = subsample(out.train, cfg.subsample_rate, mix_seed(cell_seed, kSubsampleTag));
  }
  gen.n = n_cali;
  gen.stream = 1;
  auto cali = generate_synthetic(gen, cali_test_shift);
  out.cali = std::move(cali.first);
  out.cali_truth = std::move(cali.second);
  gen.n = n_test;
  gen.stream = 2;
  auto test = generate_synthetic(gen, cali_test_shift);
  out.test = std::move(test.first);
  out.test_truth = std::move(test.second);
  return out;
}

Report run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto t_start = Clock::now();

  Report report;
  report.config = cfg;

  std::vector<CellKey> keys;
  for (const Setting setting : cfg.settings) {
    for (const std::uint64_t seed : cfg.seeds) keys.push_back({setting, seed});
  }

  std::vector<std::vector<CellResult>> slots(keys.size());
  std::size_t workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, keys.size()));

  if (workers == 1) {
    for (std::size_t i = 0; i < keys.size(); ++i) slots[i] = run_cell(cfg, keys[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < keys.size(); i = next.fetch_add(1)) {
          slots[i] = run_cell(cfg, keys[i]);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  for (std::vector<CellResult>& group : slots) {
    for (CellResult& cell : group) report.cells.push_back(std::move(cell));
  }

  // Aggregate across seeds, in the configured setting/method order.
  for (const Setting setting : cfg.settings) {
    for (const Method method : cfg.methods) {
      std::vector<double> auccs;
      std::vector<double> coverages;
      for (const CellResult& cell : report.cells) {
        if (cell.setting != setting || cell.method != method || cell.failed) continue;
        auccs.push_back(cell.aucc);
        if (cell.coverage) coverages.push_back(*cell.coverage);
      }
      if (auccs.empty()) continue;
      Aggregate agg;
      agg.setting = setting;
      agg.method = method;
      agg.n_seeds = auccs.size();
      agg.aucc_mean = mean_of(auccs);
      agg.aucc_std = std_of(auccs, agg.aucc_mean);
      if (!coverages.empty()) agg.coverage_mean = mean_of(coverages);
      report.aggregates.push_back(agg);
    }
  }

  report.total_s = seconds_since(t_start);
  return report;
}

namespace {

nlohmann::json config_to_json_obj(const ExperimentConfig& cfg) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["generator"] = {
      {"n", cfg.generator.n},
      {"d", cfg.generator.d},
      {"outcome_model", cfg.generator.outcome_model == OutcomeModel::kBernoulli ? "bernoulli" : "gaussian"},
      {"noise", cfg.generator.noise},
      {"seed", cfg.generator.seed}};
  const char* kind = cfg.shift.kind == ShiftKind::kNone             ? "none"
                     : cfg.shift.kind == ShiftKind::kMeanShift      ? "mean_shift"
                                                                    : "mixture_reweight";
  doc["shift"] = {{"kind", kind}, {"magnitude", cfg.shift.magnitude}};
  doc["subsample_rate"] = cfg.subsample_rate;
  doc["split_fractions"] = cfg.split_fractions;
  nlohmann::json settings = nlohmann::json::array();
  for (const Setting s : cfg.settings) settings.push_back(setting_name(s));
  doc["settings"] = settings;
  nlohmann::json methods = nlohmann::json::array();
  for (const Method m : cfg.methods) methods.push_back(method_name(m));
  doc["methods"] = methods;
  doc["seeds"] = cfg.seeds;
  doc["alpha"] = cfg.alpha;
  doc["mc"] = {{"passes", cfg.mc.passes}, {"retention", cfg.mc.retention}, {"seed", cfg.mc.seed}};
  doc["binary_search"] = {{"epsilon", cfg.bsearch.epsilon}};
  doc["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"momentum", cfg.train.momentum},
                  {"hidden", cfg.train.hidden},
                  {"seed", cfg.train.seed}};
  doc["budget_fractions"] = cfg.budget_fractions;
  doc["buckets"] = cfg.buckets;
  doc["include_identity_form"] = cfg.include_identity_form;
  doc["threads"] = cfg.threads;
  doc["output_dir"] = cfg.output_dir;
  return doc;
}

std::string format_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  return config_to_json_obj(cfg).dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    if (doc.contains("version") && doc.at("version").get<int>() != 1) {
      throw InvalidConfigError("unsupported experiment config version");
    }
    if (doc.contains("generator")) {
      const auto& g = doc.at("generator");
      if (g.contains("n")) cfg.generator.n = g.at("n").get<std::size_t>();
      if (g.contains("d")) cfg.generator.d = g.at("d").get<std::size_t>();
      if (g.contains("outcome_model")) {
        const auto name = g.at("outcome_model").get<std::string>();
        if (name == "bernoulli") {
          cfg.generator.outcome_model = OutcomeModel::kBernoulli;
        } else if (name == "gaussian") {
          cfg.generator.outcome_model = OutcomeModel::kGaussian;
        } else {
          throw InvalidConfigError("unknown outcome_model '" + name + "'");
        }
      }
      if (g.contains("noise")) cfg.generator.noise = g.at("noise").get<double>();
      if (g.contains("seed")) cfg.generator.seed = g.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("shift")) {
      const auto& s = doc.at("shift");
      if (s.contains("kind")) {
        const auto name = s.at("kind").get<std::string>();
        if (name == "none") {
          cfg.shift.kind = ShiftKind::kNone;
        } else if (name == "mean_shift") {
          cfg.shift.kind = ShiftKind::kMeanShift;
        } else if (name == "mixture_reweight") {
          cfg.shift.kind = ShiftKind::kMixtureReweight;
        } else {
          throw InvalidConfigError("unknown shift kind '" + name + "'");
        }
      }
      if (s.contains("magnitude")) cfg.shift.magnitude = s.at("magnitude").get<double>();
    }
    if (doc.contains("subsample_rate")) cfg.subsample_rate = doc.at("subsample_rate").get<double>();
    if (doc.contains("split_fractions")) {
      const auto f = doc.at("split_fractions").get<std::vector<double>>();
      if (f.size() != 3) throw InvalidConfigError("split_fractions must have 3 entries");
      for (std::size_t i = 0; i < 3; ++i) cfg.split_fractions[i] = f[i];
    }
    if (doc.contains("settings")) {
      cfg.settings.clear();
      for (const auto& s : doc.at("settings")) cfg.settings.push_back(setting_from_name(s.get<std::string>()));
    }
    if (doc.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : doc.at("methods")) cfg.methods.push_back(method_from_name(m.get<std::string>()));
    }
    if (doc.contains("seeds")) cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    if (doc.contains("alpha")) cfg.alpha = doc.at("alpha").get<double>();
    if (doc.contains("mc")) {
      const auto& m = doc.at("mc");
      if (m.contains("passes")) cfg.mc.passes = m.at("passes").get<std::size_t>();
      if (m.contains("retention")) cfg.mc.retention = m.at("retention").get<double>();
      if (m.contains("seed")) cfg.mc.seed = m.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("binary_search") && doc.at("binary_search").contains("epsilon")) {
      cfg.bsearch.epsilon = doc.at("binary_search").at("epsilon").get<double>();
    }
    if (doc.contains("train")) {
      const auto& t = doc.at("train");
      if (t.contains("epochs")) cfg.train.epochs = t.at("epochs").get<std::size_t>();
      if (t.contains("batch_size")) cfg.train.batch_size = t.at("batch_size").get<std::size_t>();
      if (t.contains("learning_rate")) cfg.train.learning_rate = t.at("learning_rate").get<double>();
      if (t.contains("momentum")) cfg.train.momentum = t.at("momentum").get<double>();
      if (t.contains("hidden")) cfg.train.hidden = t.at("hidden").get<std::size_t>();
      if (t.contains("seed")) cfg.train.seed = t.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("budget_fractions")) {
      cfg.budget_fractions = doc.at("budget_fractions").get<std::vector<double>>();
    }
    if (doc.contains("buckets")) cfg.buckets = doc.at("buckets").get<std::size_t>();
    if (doc.contains("include_identity_form")) {
      cfg.include_identity_form = doc.at("include_identity_form").get<bool>();
    }
    if (doc.contains("threads")) cfg.threads = doc.at("threads").get<std::size_t>();
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

std::string report_to_json(const Report& report) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["config"] = config_to_json_obj(report.config);

  nlohmann::json cells = nlohmann::json::array();
  nlohmann::json timing_cells = nlohmann::json::array();
  for (const CellResult& cell : report.cells) {
    nlohmann::json c;
    c["setting"] = setting_name(cell.setting);
    c["method"] = method_name(cell.method);
    c["seed"] = cell.seed;
    c["failed"] = cell.failed;
    if (cell.failed) {
      c["error"] = cell.error;
    } else {
      c["aucc"] = cell.aucc;
      if (cell.coverage) c["coverage"] = *cell.coverage;
      nlohmann::json revenue;
      for (const auto& [fraction, value] : cell.greedy_revenue) {
        revenue[format_fraction(fraction)] = value;
      }
      c["greedy_revenue"] = revenue;
      if (cell.calibration) {
        c["calibration"] = nlohmann::json::parse(calibration_to_json(*cell.calibration));
      }
    }
    cells.push_back(std::move(c));

    nlohmann::json t;
    t["setting"] = setting_name(cell.setting);
    t["method"] = method_name(cell.method);
    t["seed"] = cell.seed;
    t["generate_s"] = cell.timings.generate_s;
    t["train_s"] = cell.timings.train_s;
    t["calibrate_s"] = cell.timings.calibrate_s;
    t["inference_s"] = cell.timings.inference_s;
    t["evaluate_s"] = cell.timings.evaluate_s;
    timing_cells.push_back(std::move(t));
  }
  doc["cells"] = std::move(cells);

  nlohmann::json aggregates = nlohmann::json::array();
  for (const Aggregate& agg : report.aggregates) {
    nlohmann::json a;
    a["setting"] = setting_name(agg.setting);
    a["method"] = method_name(agg.method);
    a["aucc_mean"] = agg.aucc_mean;
    a["aucc_std"] = agg.aucc_std;
    if (agg.coverage_mean) a["coverage_mean"] = *agg.coverage_mean;
    a["n_seeds"] = agg.n_seeds;
    aggregates.push_back(std::move(a));
  }
  doc["aggregates"] = std::move(aggregates);

  // Wall-clock section; excluded from the determinism contract.
  doc["timings"] = {{"cells", std::move(timing_cells)}, {"total_s", report.total_s}};
  return doc.dump(2);
}

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out) throw IoError("failed while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

}  // namespace

void emit_report(const Report& report, const std::string& dir) {
  const fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec || !fs::is_directory(base)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }

  write_atomic(base / "metrics.json", report_to_json(report));

  std::string summary = "setting,method,aucc_mean,aucc_std,coverage_mean,n_seeds\n";
  char buf[64];
  for (const Aggregate& agg : report.aggregates) {
    summary += setting_name(agg.setting);
    summary += ',';
    summary += method_name(agg.method);
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,", agg.aucc_mean, agg.aucc_std);
    summary += buf;
    if (agg.coverage_mean) {
      std::snprintf(buf, sizeof(buf), "%.6f", *agg.coverage_mean);
      summary += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%zu\n", agg.n_seeds);
    summary += buf;
  }
  write_atomic(base / "summary.csv", summary);

  // Cost curve and calibration artifacts come from the first seed of each
  // (setting, method) pair.
  for (const Setting setting : report.config.settings) {
    bool calibration_written = false;
    for (const Method method : report.config.methods) {
      const CellResult* first = nullptr;
      for (const CellResult& cell : report.cells) {
        if (cell.setting == setting && cell.method == method && !cell.failed) {
          first = &cell;
          break;
        }
      }
      if (first == nullptr) continue;

      std::string curve = "bucket,norm_cost,norm_value\n";
      for (std::size_t i = 0; i < first->curve.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9f\n", i, first->curve.points[i].first,
                      first->curve.points[i].second);
        curve += buf;
      }
      write_atomic(base / (std::string("cost_curve_") + setting_name(setting) + "_" +
                           method_name(method) + ".csv"),
                   curve);

      if (!calibration_written && first->calibration) {
        write_atomic(base / (std::string("calibration_") + setting_name(setting) + ".json"),
                     calibration_to_json(*first->calibration));
        calibration_written = true;
      }
    }
  }
}

}  // namespace rdrp
