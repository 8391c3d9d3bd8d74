#include "rdrp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "rdrp/error.hpp"
#include "rdrp/evaluation.hpp"
#include "rdrp/math.hpp"
#include "rdrp/rng.hpp"

namespace rdrp {

namespace {

constexpr double kStdFloor = 1e-6;
constexpr std::uint64_t kMcPassTag = 0x4d435041u;

void validate_bsearch(const BinarySearchConfig& cfg) {
  if (!(cfg.epsilon > 0.0) || cfg.epsilon >= 0.1) {
    throw InvalidConfigError("binary search epsilon must lie in (0, 0.1)");
  }
}

void validate_mc(const McConfig& mc) {
  if (mc.passes < 2) throw InvalidConfigError("MC dropout needs at least 2 passes");
  if (!(mc.retention > 0.0) || !(mc.retention < 1.0)) {
    throw InvalidConfigError("MC retention must lie in (0, 1)");
  }
}

void validate_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidArgumentError("alpha must lie in (0, 1)");
}

}  // namespace

const char* form_name(CalibrationForm form) {
  switch (form) {
    case CalibrationForm::kProduct:
      return "product";
    case CalibrationForm::kRatio:
      return "ratio";
    case CalibrationForm::kSum:
      return "sum";
    case CalibrationForm::kIdentity:
      return "identity";
  }
  return "unknown";
}

CalibrationForm form_from_name(const std::string& name) {
  if (name == "product") return CalibrationForm::kProduct;
  if (name == "ratio") return CalibrationForm::kRatio;
  if (name == "sum") return CalibrationForm::kSum;
  if (name == "identity") return CalibrationForm::kIdentity;
  throw InvalidArgumentError("unknown calibration form '" + name + "'");
}

double loss_derivative(double s, const RctDataset& ds) {
  const DiffInMeans dm = diff_in_means(ds);
  return sigmoid(s) * dm.delta_c - dm.delta_r;
}

RoiStarResult find_roi_star_detail(const RctDataset& ds, const BinarySearchConfig& cfg,
                                   bool clamp_to_scope, std::vector<std::string>* warnings) {
  validate_bsearch(cfg);
  const DiffInMeans dm = diff_in_means(ds);
  if (!(dm.delta_c > 0.0)) {
    throw AssumptionViolationError("positive-treatment-effect violated: diff-in-means cost is " +
                                   std::to_string(dm.delta_c));
  }
  const double eps = cfg.epsilon;
  const double ratio = dm.delta_r / dm.delta_c;
  if (ratio <= eps || ratio >= 1.0 - eps) {
    if (!clamp_to_scope) {
      throw RoiScopeError("diff-in-means ratio " + std::to_string(ratio) +
                          " outside the admissible ROI range");
    }
    const double boundary = ratio <= eps ? eps : 1.0 - eps;
    if (warnings != nullptr) {
      warnings->push_back("roi_star clamped to " + std::to_string(boundary) +
                          " (diff-in-means ratio " + std::to_string(ratio) + ")");
    }
    return {boundary, 0};
  }

  double lo = 0.0;
  double hi = 1.0;
  double roi = 0.5 * (lo + hi);
  double deriv = sigmoid(logit(roi)) * dm.delta_c - dm.delta_r;
  std::size_t iterations = 0;
  while (hi - lo > eps) {
    if (std::abs(deriv) < eps) break;
    if (deriv > 0.0) {
      hi = roi;
    } else {
      lo = roi;
    }
    roi = 0.5 * (lo + hi);
    deriv = sigmoid(logit(roi)) * dm.delta_c - dm.delta_r;
    ++iterations;
  }
  return {roi, iterations};
}

double find_roi_star(const RctDataset& ds, const BinarySearchConfig& cfg, bool clamp_to_scope,
                     std::vector<std::string>* warnings) {
  return find_roi_star_detail(ds, cfg, clamp_to_scope, warnings).roi_star;
}

McStats mc_dropout_stats(const MlpParams& params, std::span<const double> x, const McConfig& mc) {
  validate_mc(mc);
  if (x.size() != params.d) {
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(params.d));
  }
  // Hidden contributions do not depend on the mask; computing them once makes
  // each pass O(hidden). The mask draws match forward_dropout exactly: one
  // uniform per unit, in unit order, from the per-pass stream.
  std::vector<double> contribution(params.hidden, 0.0);
  for (std::size_t j = 0; j < params.hidden; ++j) {
    double pre = params.b1[j];
    const double* row = params.w1.data() + j * params.d;
    for (std::size_t k = 0; k < params.d; ++k) pre += row[k] * x[k];
    if (pre > 0.0) contribution[j] = params.w2[j] * pre;
  }
  const double inv_p = 1.0 / mc.retention;

  std::vector<double> draws(mc.passes);
  for (std::size_t k = 0; k < mc.passes; ++k) {
    Rng pass_rng(mix_seed(mc.seed, kMcPassTag + k));
    double s = params.b2;
    for (std::size_t j = 0; j < params.hidden; ++j) {
      if (pass_rng.uniform() < mc.retention) s += contribution[j] * inv_p;
    }
    draws[k] = sigmoid(s);
  }
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(mc.passes);
  double ss = 0.0;
  for (double v : draws) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(mc.passes - 1))};
}

std::vector<double> conformal_scores(double roi_star, const std::vector<double>& roi_hat,
                                     const std::vector<double>& r_hat) {
  if (roi_hat.size() != r_hat.size()) {
    throw ShapeError("roi_hat and r_hat lengths differ");
  }
  if (!(roi_star > 0.0) || !(roi_star < 1.0)) {
    throw InvalidArgumentError("roi_star must lie in (0, 1)");
  }
  std::vector<double> scores(roi_hat.size());
  for (std::size_t i = 0; i < roi_hat.size(); ++i) {
    scores[i] = std::abs(roi_star - roi_hat[i]) / std::max(r_hat[i], kStdFloor);
  }
  return scores;
}

double conformal_quantile(const std::vector<double>& scores, double alpha) {
  if (scores.empty()) throw InvalidArgumentError("quantile of an empty score list");
  validate_alpha(alpha);
  const double n = static_cast<double>(scores.size());
  const auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * (n + 1.0) - 1e-9));
  if (k > scores.size()) return std::numeric_limits<double>::infinity();
  std::vector<double> copy = scores;
  std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
  return copy[k - 1];
}

std::pair<double, double> prediction_interval(double roi_hat, double r_hat, double q_hat) {
  if (!(r_hat >= 0.0)) throw InvalidArgumentError("r_hat must be non-negative");
  if (!(q_hat >= 0.0)) throw InvalidArgumentError("q_hat must be non-negative");
  if (std::isinf(q_hat)) return {0.0, 1.0};
  const double half = r_hat * q_hat;
  return {std::clamp(roi_hat - half, 0.0, 1.0), std::clamp(roi_hat + half, 0.0, 1.0)};
}

double apply_form(CalibrationForm form, double roi_hat, double r_hat, double q_hat) {
  if (!std::isfinite(q_hat)) {
    throw CalibrationDegenerateError("calibrated estimate undefined for an infinite quantile");
  }
  const double width = r_hat * q_hat;
  switch (form) {
    case CalibrationForm::kProduct:
      return roi_hat * (roi_hat + width);
    case CalibrationForm::kRatio:
      return roi_hat / std::max(width, kStdFloor);
    case CalibrationForm::kSum:
      return roi_hat + width;
    case CalibrationForm::kIdentity:
      return roi_hat;
  }
  throw InvalidArgumentError("unknown calibration form");
}

CalibrationForm select_form(const std::vector<double>& roi_hat, const std::vector<double>& r_hat,
                            const RctDataset& cali, double q_hat, bool include_identity,
                            std::size_t buckets) {
  if (roi_hat.size() != r_hat.size() || roi_hat.size() != cali.n()) {
    throw ShapeError("predictions are not aligned with the calibration set");
  }
  std::vector<CalibrationForm> candidates = {CalibrationForm::kProduct, CalibrationForm::kRatio,
                                             CalibrationForm::kSum};
  if (include_identity) candidates.push_back(CalibrationForm::kIdentity);

  CalibrationForm best = candidates.front();
  double best_aucc = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(roi_hat.size());
  for (const CalibrationForm form : candidates) {
    for (std::size_t i = 0; i < roi_hat.size(); ++i) {
      scores[i] = apply_form(form, roi_hat[i], r_hat[i], q_hat);
    }
    const double value = aucc(cost_curve(scores, cali, buckets));
    if (value > best_aucc) {
      best_aucc = value;
      best = form;
    }
  }
  return best;
}

ConformalCalibration calibrate_rdrp(const MlpParams& params, const RctDataset& cali, double alpha,
                                    const McConfig& mc, const BinarySearchConfig& bsearch,
                                    const RdrpOptions& opts) {
  validate_alpha(alpha);
  validate_mc(mc);

  ConformalCalibration calibration;
  calibration.alpha = alpha;
  calibration.mc = mc;
  calibration.n = cali.n();

  std::vector<double> roi_hat(cali.n());
  std::vector<double> r_hat(cali.n());
  for (std::size_t i = 0; i < cali.n(); ++i) {
    roi_hat[i] = predict_roi(params, cali[i].x);
    r_hat[i] = mc_dropout_stats(params, cali[i].x, mc).std;
  }

  calibration.roi_star =
      find_roi_star(cali, bsearch, opts.clamp_roi_star, &calibration.warnings);
  const std::vector<double> scores = conformal_scores(calibration.roi_star, roi_hat, r_hat);
  calibration.q_hat = conformal_quantile(scores, alpha);
  if (std::isinf(calibration.q_hat)) {
    throw CalibrationDegenerateError(
        "conformal quantile is infinite: calibration set of size " + std::to_string(cali.n()) +
        " cannot support alpha " + std::to_string(alpha));
  }
  calibration.form =
      select_form(roi_hat, r_hat, cali, calibration.q_hat, opts.include_identity_form, opts.buckets);
  return calibration;
}

RoiPrediction predict_rdrp(const MlpParams& params, std::span<const double> x,
                           const ConformalCalibration& calibration) {
  RoiPrediction pred;
  pred.roi_hat = predict_roi(params, x);
  pred.r_hat = mc_dropout_stats(params, x, calibration.mc).std;
  const auto [lo, hi] = prediction_interval(pred.roi_hat, pred.r_hat, calibration.q_hat);
  pred.lo = lo;
  pred.hi = hi;
  pred.roi_tilde = apply_form(calibration.form, pred.roi_hat, pred.r_hat, calibration.q_hat);
  return pred;
}

RdrpResult rdrp_predict(const MlpParams& params, const RctDataset& cali,
                        const std::vector<std::vector<double>>& test_features, double alpha,
                        const McConfig& mc, const BinarySearchConfig& bsearch,
                        const RdrpOptions& opts) {
  RdrpResult result;
  result.calibration = calibrate_rdrp(params, cali, alpha, mc, bsearch, opts);
  result.predictions.reserve(test_features.size());
  for (const std::vector<double>& x : test_features) {
    result.predictions.push_back(predict_rdrp(params, x, result.calibration));
  }
  return result;
}

std::string calibration_to_json(const ConformalCalibration& calibration) {
  nlohmann::json doc;
  doc["roi_star"] = calibration.roi_star;
  if (std::isinf(calibration.q_hat)) {
    doc["q_hat"] = "inf";
  } else {
    doc["q_hat"] = calibration.q_hat;
  }
  doc["alpha"] = calibration.alpha;
  doc["mc"] = {{"passes", calibration.mc.passes},
               {"retention", calibration.mc.retention},
               {"seed", calibration.mc.seed}};
  doc["form"] = form_name(calibration.form);
  doc["n"] = calibration.n;
  doc["warnings"] = calibration.warnings;
  return doc.dump(2);
}

ConformalCalibration calibration_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("calibration JSON: ") + e.what());
  }
  ConformalCalibration calibration;
  try {
    calibration.roi_star = doc.at("roi_star").get<double>();
    if (doc.at("q_hat").is_string()) {
      if (doc.at("q_hat").get<std::string>() != "inf") {
        throw ParseError("calibration JSON: q_hat string must be \"inf\"");
      }
      calibration.q_hat = std::numeric_limits<double>::infinity();
    } else {
      calibration.q_hat = doc.at("q_hat").get<double>();
    }
    calibration.alpha = doc.at("alpha").get<double>();
    calibration.mc.passes = doc.at("mc").at("passes").get<std::size_t>();
    calibration.mc.retention = doc.at("mc").at("retention").get<double>();
    calibration.mc.seed = doc.at("mc").at("seed").get<std::uint64_t>();
    calibration.form = form_from_name(doc.at("form").get<std::string>());
    calibration.n = doc.at("n").get<std::size_t>();
    if (doc.contains("warnings")) {
      calibration.warnings = doc.at("warnings").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("calibration JSON: ") + e.what());
  }
  return calibration;
}

}  // namespace rdrp
