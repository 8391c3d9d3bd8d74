#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdrp/conformal.hpp"
#include "rdrp/dataset.hpp"
#include "rdrp/evaluation.hpp"
#include "rdrp/model.hpp"

namespace rdrp {

/// Data regimes: sufficient/insufficient training pool crossed with
/// unshifted/shifted calibration and test distributions.
enum class Setting { kSuNo, kSuCo, kInNo, kInCo };

enum class Method { kRandom, kTpmSl, kDrp, kRdrp };

const char* setting_name(Setting setting);
Setting setting_from_name(const std::string& name);
const char* method_name(Method method);
Method method_from_name(const std::string& name);

struct ExperimentConfig {
  ExperimentConfig() {
    generator.n = 100000;
    generator.d = 12;
    train.epochs = 15;
    train.hidden = 100;
  }

  SyntheticConfig generator;  // n is the sufficient-pool size
  ShiftSpec shift{ShiftKind::kMixtureReweight, 0.0};
  double subsample_rate = 0.15;
  std::array<double, 3> split_fractions{0.7, 0.15, 0.15};
  std::vector<Setting> settings{Setting::kSuNo, Setting::kSuCo, Setting::kInNo, Setting::kInCo};
  std::vector<Method> methods{Method::kRandom, Method::kDrp, Method::kRdrp};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double alpha = 0.1;
  McConfig mc;
  BinarySearchConfig bsearch;
  TrainConfig train;
  std::vector<double> budget_fractions{0.1, 0.3, 0.5};
  std::size_t buckets = 100;
  bool include_identity_form = false;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct PhaseTimings {
  double generate_s = 0.0;
  double train_s = 0.0;
  double calibrate_s = 0.0;
  double inference_s = 0.0;
  double evaluate_s = 0.0;
};

/// One (setting, method, seed) grid cell.
struct CellResult {
  Setting setting = Setting::kSuNo;
  Method method = Method::kRandom;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double aucc = 0.0;
  std::optional<double> coverage;                  // rdrp only
  std::map<double, double> greedy_revenue;         // budget fraction -> revenue
  std::optional<ConformalCalibration> calibration; // rdrp only
  CostCurve curve;
  PhaseTimings timings;
};

struct Aggregate {
  Setting setting = Setting::kSuNo;
  Method method = Method::kRandom;
  double aucc_mean = 0.0;
  double aucc_std = 0.0;
  std::optional<double> coverage_mean;
  std::size_t n_seeds = 0;
};

struct Report {
  ExperimentConfig config;
  std::vector<CellResult> cells;
  std::vector<Aggregate> aggregates;
  double total_s = 0.0;

  bool any_failed() const;
};

/// The train/calibration/test triple a cell runs on. Exposed for tests.
struct CellDatasets {
  RctDataset train;
  RctDataset cali;
  GroundTruth cali_truth;
  RctDataset test;
  GroundTruth test_truth;
};

CellDatasets prepare_cell_datasets(const ExperimentConfig& config, Setting setting,
                                   std::uint64_t seed);

/// Runs every requested (setting, method, seed) cell. Cells execute in
/// parallel; failures are recorded per cell and do not stop the run.
Report run_experiment(const ExperimentConfig& config);

/// metrics.json, summary.csv, per-(setting, method) cost-curve CSVs and
/// per-setting calibration JSONs, all written atomically.
void emit_report(const Report& report, const std::string& dir);

/// Serialized report; timings live in a separate top-level section so the
/// remainder is byte-identical across reruns of the same config.
std::string report_to_json(const Report& report);

}  // namespace rdrp
