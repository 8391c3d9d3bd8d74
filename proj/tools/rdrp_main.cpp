#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdrp/allocation.hpp"
#include "rdrp/conformal.hpp"
#include "rdrp/dataset.hpp"
#include "rdrp/error.hpp"
#include "rdrp/evaluation.hpp"
#include "rdrp/experiment.hpp"
#include "rdrp/model.hpp"

namespace {

using namespace rdrp;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed while writing '" + path + "'");
}

ColumnMap default_columns(std::size_t d) {
  ColumnMap map;
  for (std::size_t k = 0; k < d; ++k) map.features.push_back("x" + std::to_string(k));
  return map;
}

struct CsvFlags {
  std::size_t d = 12;
  std::string features;  // comma-separated override
  std::string treatment = "treatment";
  std::string revenue = "revenue";
  std::string cost = "cost";

  ColumnMap to_map() const {
    ColumnMap map = default_columns(d);
    if (!features.empty()) {
      map.features.clear();
      std::stringstream ss(features);
      std::string name;
      while (std::getline(ss, name, ',')) map.features.push_back(name);
    }
    map.treatment = treatment;
    map.revenue = revenue;
    map.cost = cost;
    return map;
  }
};

void add_csv_flags(CLI::App* cmd, CsvFlags& flags) {
  cmd->add_option("--dim", flags.d, "Feature count for the default x0..x{d-1} columns");
  cmd->add_option("--features", flags.features, "Comma-separated feature column names");
  cmd->add_option("--treatment-column", flags.treatment, "Treatment column name");
  cmd->add_option("--revenue-column", flags.revenue, "Revenue column name");
  cmd->add_option("--cost-column", flags.cost, "Cost column name");
}

int cmd_gen(const SyntheticConfig& cfg, const ShiftSpec& shift, const std::string& out,
            const std::string& truth_out) {
  const auto [ds, truth] = generate_synthetic(cfg, shift);
  save_csv(ds, out);
  if (!truth_out.empty()) {
    std::string text = "index,tau_r,tau_c,roi\n";
    char buf[96];
    for (std::size_t i = 0; i < truth.tau_r.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i, truth.tau_r[i],
                    truth.tau_c[i], truth.roi[i]);
      text += buf;
    }
    write_file(truth_out, text);
  }
  std::printf("wrote %zu samples (d=%zu, treated=%zu) to %s\n", ds.n(), ds.dim(), ds.n_treated(),
              out.c_str());
  return 0;
}

int cmd_train(const std::string& data_path, const CsvFlags& csv, TrainConfig train_cfg,
              const std::string& objective, const std::string& out) {
  if (objective == "drp") {
    train_cfg.objective = Objective::kDrp;
  } else if (objective == "mse_revenue") {
    train_cfg.objective = Objective::kMseRegression;
    train_cfg.mse_target = MseTarget::kRevenue;
  } else if (objective == "mse_cost") {
    train_cfg.objective = Objective::kMseRegression;
    train_cfg.mse_target = MseTarget::kCost;
  } else {
    throw InvalidArgumentError("unknown objective '" + objective + "'");
  }

  const RctDataset ds = load_csv(data_path, csv.to_map());
  std::vector<double> losses;
  const MlpParams params = train(ds, train_cfg, &losses);
  save_params(params, out);
  if (!losses.empty()) {
    std::printf("trained %zu epochs, first loss %.6f, final loss %.6f\n", losses.size(),
                losses.front(), losses.back());
  }
  std::printf("saved weights to %s\n", out.c_str());
  return 0;
}

int cmd_calibrate(const std::string& model_path, const std::string& cali_path,
                  const CsvFlags& csv, double alpha, const McConfig& mc,
                  const BinarySearchConfig& bsearch, bool include_identity, bool clamp,
                  const std::string& out) {
  const MlpParams params = load_params(model_path);
  const RctDataset cali = load_csv(cali_path, csv.to_map());
  RdrpOptions opts;
  opts.include_identity_form = include_identity;
  opts.clamp_roi_star = clamp;
  const ConformalCalibration calibration = calibrate_rdrp(params, cali, alpha, mc, bsearch, opts);
  write_file(out, calibration_to_json(calibration));
  std::printf("roi_star=%.6f q_hat=%.6f form=%s n=%zu -> %s\n", calibration.roi_star,
              calibration.q_hat, form_name(calibration.form), calibration.n, out.c_str());
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& calib_path,
                const std::string& data_path, const CsvFlags& csv, const std::string& out) {
  const MlpParams params = load_params(model_path);
  const ConformalCalibration calibration = calibration_from_json(read_file(calib_path));
  const RctDataset ds = load_csv(data_path, csv.to_map());

  std::string text = "index,roi_hat,r_hat,lo,hi,roi_tilde\n";
  char buf[160];
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const RoiPrediction pred = predict_rdrp(params, ds[i].x, calibration);
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, pred.roi_hat,
                  pred.r_hat, pred.lo, pred.hi, pred.roi_tilde);
    text += buf;
  }
  write_file(out, text);
  std::printf("wrote %zu predictions to %s\n", ds.n(), out.c_str());
  return 0;
}

int cmd_allocate(const std::string& input_path, double budget, const std::string& out) {
  std::ifstream in(input_path);
  if (!in) throw IoError("cannot open '" + input_path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + input_path + "' is empty");

  std::vector<std::size_t> index;
  AllocationInstance instance;
  instance.budget = budget;
  std::vector<double> scores;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t idx;
    double roi_tilde, tau_r, tau_c;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf", &idx, &roi_tilde, &tau_r, &tau_c) != 4) {
      throw ParseError("line " + std::to_string(line_no) + " of '" + input_path +
                       "' is not index,roi_tilde,tau_r,tau_c");
    }
    index.push_back(idx);
    scores.push_back(roi_tilde);
    instance.tau_r.push_back(tau_r);
    instance.tau_c.push_back(tau_c);
  }

  const Allocation allocation = greedy_allocate(instance, scores);
  std::string text = "index,z\n";
  for (std::size_t i = 0; i < index.size(); ++i) {
    text += std::to_string(index[i]) + "," + std::to_string(int(allocation.z[i])) + "\n";
  }
  write_file(out, text);
  std::printf("revenue=%.6f cost=%.6f budget=%.6f -> %s\n", allocation.total_revenue,
              allocation.total_cost, budget, out.c_str());
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& data_path, const CsvFlags& csv,
                 std::size_t buckets, const std::string& score_column,
                 const std::string& curve_out) {
  const RctDataset ds = load_csv(data_path, csv.to_map());

  // Pull the score (and interval, when present) columns from the predictions.
  std::ifstream in(pred_path);
  if (!in) throw IoError("cannot open '" + pred_path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + pred_path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == '\n')) cell.pop_back();
      header.push_back(cell);
    }
  }
  auto column_of = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int score_idx = column_of(score_column);
  if (score_idx < 0) throw SchemaError("missing column '" + score_column + "' in '" + pred_path + "'");
  const int lo_idx = column_of("lo");
  const int hi_idx = column_of("hi");

  std::vector<double> scores;
  std::vector<std::pair<double, double>> intervals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    scores.push_back(cells.at(score_idx));
    if (lo_idx >= 0 && hi_idx >= 0) {
      intervals.emplace_back(cells.at(lo_idx), cells.at(hi_idx));
    }
  }

  const CostCurve curve = cost_curve(scores, ds, buckets);
  nlohmann::json result;
  result["aucc"] = aucc(curve);
  result["n"] = ds.n();
  std::vector<std::string> warnings;
  const double roi_star_test = find_roi_star(ds, BinarySearchConfig{}, true, &warnings);
  result["roi_star_test"] = roi_star_test;
  if (!intervals.empty()) result["coverage"] = empirical_coverage(intervals, roi_star_test);
  if (!curve_out.empty()) {
    std::string text = "bucket,norm_cost,norm_value\n";
    char buf[96];
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9f\n", i, curve.points[i].first,
                    curve.points[i].second);
      text += buf;
    }
    write_file(curve_out, text);
  }
  std::printf("%s\n", result.dump(2).c_str());
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& output_override) {
  ExperimentConfig cfg = experiment_config_from_json(read_file(config_path));
  if (!output_override.empty()) cfg.output_dir = output_override;
  const Report report = run_experiment(cfg);
  emit_report(report, cfg.output_dir);
  for (const Aggregate& agg : report.aggregates) {
    std::printf("%-4s %-7s aucc=%.4f +/- %.4f", setting_name(agg.setting),
                method_name(agg.method), agg.aucc_mean, agg.aucc_std);
    if (agg.coverage_mean) std::printf(" coverage=%.4f", *agg.coverage_mean);
    std::printf(" (%zu seeds)\n", agg.n_seeds);
  }
  std::printf("report written to %s (%.1fs)\n", cfg.output_dir.c_str(), report.total_s);
  if (report.any_failed()) {
    for (const CellResult& cell : report.cells) {
      if (cell.failed) {
        std::fprintf(stderr, "FAILED %s/%s seed %llu: %s\n", setting_name(cell.setting),
                     method_name(cell.method), (unsigned long long)cell.seed, cell.error.c_str());
      }
    }
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ROI prediction pipeline: synthetic RCT data, direct ROI model, conformal "
               "calibration, budgeted allocation and ranking metrics"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic RCT dataset CSV");
  SyntheticConfig gen_cfg;
  ShiftSpec gen_shift;
  std::string gen_out = "data.csv";
  std::string gen_truth;
  std::string gen_shift_kind = "none";
  std::string gen_outcome = "bernoulli";
  gen->add_option("--n", gen_cfg.n, "Sample count");
  gen->add_option("--dim", gen_cfg.d, "Feature dimension");
  gen->add_option("--outcome-model", gen_outcome, "bernoulli or gaussian");
  gen->add_option("--noise", gen_cfg.noise, "Gaussian outcome noise scale");
  gen->add_option("--seed", gen_cfg.seed, "Generator seed");
  gen->add_option("--stream", gen_cfg.stream, "Substream index (same seed, disjoint samples)");
  gen->add_option("--shift", gen_shift_kind, "none, mean_shift or mixture_reweight");
  gen->add_option("--magnitude", gen_shift.magnitude, "Shift magnitude");
  gen->add_option("--out", gen_out, "Output CSV path");
  gen->add_option("--truth-out", gen_truth, "Optional ground-truth CSV path");

  // train
  auto* tr = app.add_subcommand("train", "Train a model on a dataset CSV");
  std::string tr_data, tr_out = "model.bin", tr_objective = "drp";
  CsvFlags tr_csv;
  TrainConfig tr_cfg;
  tr->add_option("--data", tr_data, "Training CSV")->required();
  add_csv_flags(tr, tr_csv);
  tr->add_option("--objective", tr_objective, "drp, mse_revenue or mse_cost");
  tr->add_option("--epochs", tr_cfg.epochs, "Training epochs");
  tr->add_option("--batch-size", tr_cfg.batch_size, "Mini-batch size");
  tr->add_option("--learning-rate", tr_cfg.learning_rate, "SGD learning rate");
  tr->add_option("--momentum", tr_cfg.momentum, "SGD momentum");
  tr->add_option("--hidden", tr_cfg.hidden, "Hidden width (10..100)");
  tr->add_option("--seed", tr_cfg.seed, "Training seed");
  tr->add_option("--out", tr_out, "Output weight file");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Conformal calibration on a calibration CSV");
  std::string cal_model, cal_data, cal_out = "calibration.json";
  CsvFlags cal_csv;
  double cal_alpha = 0.1;
  McConfig cal_mc;
  BinarySearchConfig cal_bs;
  bool cal_identity = false, cal_clamp = false;
  cal->add_option("--model", cal_model, "Trained weight file")->required();
  cal->add_option("--cali", cal_data, "Calibration CSV")->required();
  add_csv_flags(cal, cal_csv);
  cal->add_option("--alpha", cal_alpha, "Conformal error rate");
  cal->add_option("--passes", cal_mc.passes, "MC dropout passes");
  cal->add_option("--retention", cal_mc.retention, "Dropout retention probability");
  cal->add_option("--seed", cal_mc.seed, "MC dropout seed");
  cal->add_option("--epsilon", cal_bs.epsilon, "Binary search tolerance");
  cal->add_flag("--include-identity-form", cal_identity, "Add identity to the form candidates");
  cal->add_flag("--clamp-roi-star", cal_clamp, "Clamp out-of-scope roi_star with a warning");
  cal->add_option("--out", cal_out, "Output calibration JSON");

  // predict
  auto* pr = app.add_subcommand("predict", "Apply a frozen calibration to a dataset CSV");
  std::string pr_model, pr_calib, pr_data, pr_out = "predictions.csv";
  CsvFlags pr_csv;
  pr->add_option("--model", pr_model, "Trained weight file")->required();
  pr->add_option("--calibration", pr_calib, "Calibration JSON")->required();
  pr->add_option("--data", pr_data, "Input CSV")->required();
  add_csv_flags(pr, pr_csv);
  pr->add_option("--out", pr_out, "Output predictions CSV");

  // allocate
  auto* al = app.add_subcommand("allocate", "Greedy budgeted assignment from a predictions CSV");
  std::string al_in, al_out = "allocation.csv";
  double al_budget = 0.0;
  al->add_option("--input", al_in, "CSV with index,roi_tilde,tau_r,tau_c")->required();
  al->add_option("--budget", al_budget, "Cost budget")->required();
  al->add_option("--out", al_out, "Output allocation CSV");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Cost curve, AUCC and coverage of predictions");
  std::string ev_pred, ev_data, ev_curve, ev_score = "roi_tilde";
  CsvFlags ev_csv;
  std::size_t ev_buckets = 100;
  ev->add_option("--pred", ev_pred, "Predictions CSV")->required();
  ev->add_option("--data", ev_data, "Outcome CSV the predictions refer to")->required();
  add_csv_flags(ev, ev_csv);
  ev->add_option("--buckets", ev_buckets, "Cost curve buckets");
  ev->add_option("--score-column", ev_score, "Prediction column used for ranking");
  ev->add_option("--curve-out", ev_curve, "Optional cost curve CSV path");

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run the full multi-setting benchmark grid");
  std::string ex_config, ex_out;
  ex->add_option("--config", ex_config, "Experiment config JSON")->required();
  ex->add_option("--output-dir", ex_out, "Override the config output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (gen_outcome == "gaussian") {
        gen_cfg.outcome_model = OutcomeModel::kGaussian;
      } else if (gen_outcome != "bernoulli") {
        throw InvalidArgumentError("unknown outcome model '" + gen_outcome + "'");
      }
      if (gen_shift_kind == "none") {
        gen_shift.kind = ShiftKind::kNone;
      } else if (gen_shift_kind == "mean_shift") {
        gen_shift.kind = ShiftKind::kMeanShift;
      } else if (gen_shift_kind == "mixture_reweight") {
        gen_shift.kind = ShiftKind::kMixtureReweight;
      } else {
        throw InvalidArgumentError("unknown shift kind '" + gen_shift_kind + "'");
      }
      return cmd_gen(gen_cfg, gen_shift, gen_out, gen_truth);
    }
    if (tr->parsed()) return cmd_train(tr_data, tr_csv, tr_cfg, tr_objective, tr_out);
    if (cal->parsed()) {
      return cmd_calibrate(cal_model, cal_data, cal_csv, cal_alpha, cal_mc, cal_bs, cal_identity,
                           cal_clamp, cal_out);
    }
    if (pr->parsed()) return cmd_predict(pr_model, pr_calib, pr_data, pr_csv, pr_out);
    if (al->parsed()) return cmd_allocate(al_in, al_budget, al_out);
    if (ev->parsed()) return cmd_evaluate(ev_pred, ev_data, ev_csv, ev_buckets, ev_score, ev_curve);
    if (ex->parsed()) return cmd_experiment(ex_config, ex_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
