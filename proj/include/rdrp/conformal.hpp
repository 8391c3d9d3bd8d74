#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdrp/dataset.hpp"
#include "rdrp/model.hpp"

namespace rdrp {

struct BinarySearchConfig {
  /// Interval and derivative tolerance; must lie in (0, 0.1).
  double epsilon = 0.001;
};

struct McConfig {
  std::size_t passes = 50;
  double retention = 0.9;
  std::uint64_t seed = 0;
};

enum class CalibrationForm { kProduct, kRatio, kSum, kIdentity };

const char* form_name(CalibrationForm form);
CalibrationForm form_from_name(const std::string& name);

/// Frozen calibration artifact produced on the calibration set and applied
/// unchanged to every test sample.
struct ConformalCalibration {
  double roi_star = 0.0;
  double q_hat = 0.0;  // may be +infinity
  double alpha = 0.1;
  McConfig mc;
  CalibrationForm form = CalibrationForm::kProduct;
  std::size_t n = 0;
  std::vector<std::string> warnings;
};

struct RoiPrediction {
  double roi_hat = 0.0;
  double r_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double roi_tilde = 0.0;
};

/// Derivative of the shared-score batch loss: sigmoid(s)*dYc - dYr.
double loss_derivative(double s, const RctDataset& ds);

struct RoiStarResult {
  double roi_star = 0.0;
  std::size_t iterations = 0;
};

/// Binary search for the loss convergence point on [0, 1]. Halves the
/// interval by the sign of the derivative; stops when the interval or the
/// derivative magnitude drops below epsilon.
///
/// The diff-in-means ratio must lie in (epsilon, 1-epsilon); outside that
/// range the search throws RoiScopeError unless `clamp_to_scope` is set, in
/// which case the boundary is returned and a warning recorded.
RoiStarResult find_roi_star_detail(const RctDataset& ds, const BinarySearchConfig& cfg,
                                   bool clamp_to_scope = false,
                                   std::vector<std::string>* warnings = nullptr);

double find_roi_star(const RctDataset& ds, const BinarySearchConfig& cfg = {},
                     bool clamp_to_scope = false, std::vector<std::string>* warnings = nullptr);

struct McStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Sample mean and standard deviation (divisor K-1) of sigmoid(score) over K
/// dropout passes. Pass k draws its mask from (mc.seed, k) only, so the mask
/// sequence is shared across samples and the resulting std is a fixed
/// function of x.
McStats mc_dropout_stats(const MlpParams& params, std::span<const double> x, const McConfig& mc);

/// score = |roi_star - roi_hat| / max(r_hat, 1e-6), element-wise.
std::vector<double> conformal_scores(double roi_star, const std::vector<double>& roi_hat,
                                     const std::vector<double>& r_hat);

/// k-th smallest score with k = ceil((1-alpha)(n+1)); +infinity when k > n.
double conformal_quantile(const std::vector<double>& scores, double alpha);

/// [roi_hat -+ r_hat*q_hat] clamped to [0, 1]; infinite q_hat gives [0, 1].
std::pair<double, double> prediction_interval(double roi_hat, double r_hat, double q_hat);

/// Point-estimate calibration: product roi(roi + rq), ratio roi/(rq), sum
/// roi + rq, or identity. The ratio denominator is floored at 1e-6.
double apply_form(CalibrationForm form, double roi_hat, double r_hat, double q_hat);

/// Scores every candidate form by the AUCC its ranking achieves on the
/// calibration set and returns the best; ties keep the earlier form in the
/// order product, ratio, sum, identity.
CalibrationForm select_form(const std::vector<double>& roi_hat, const std::vector<double>& r_hat,
                            const RctDataset& cali, double q_hat, bool include_identity = false,
                            std::size_t buckets = 100);

struct RdrpOptions {
  bool include_identity_form = false;
  bool clamp_roi_star = false;
  std::size_t buckets = 100;
};

/// Calibration phase: point estimates, roi_star, dropout stds, quantile and
/// form selection, all on the calibration set.
ConformalCalibration calibrate_rdrp(const MlpParams& params, const RctDataset& cali, double alpha,
                                    const McConfig& mc, const BinarySearchConfig& bsearch,
                                    const RdrpOptions& opts = {});

/// Test-time inference for one sample under a frozen calibration.
RoiPrediction predict_rdrp(const MlpParams& params, std::span<const double> x,
                           const ConformalCalibration& calibration);

struct RdrpResult {
  std::vector<RoiPrediction> predictions;
  ConformalCalibration calibration;
};

/// Full post-processing pipeline: calibrate on `cali`, then infer point
/// estimate, dropout std, interval and calibrated estimate for every test
/// feature vector.
RdrpResult rdrp_predict(const MlpParams& params, const RctDataset& cali,
                        const std::vector<std::vector<double>>& test_features, double alpha,
                        const McConfig& mc, const BinarySearchConfig& bsearch,
                        const RdrpOptions& opts = {});

/// JSON round-trip for the calibration artifact; q_hat serializes as the
/// string "inf" when infinite.
std::string calibration_to_json(const ConformalCalibration& calibration);
ConformalCalibration calibration_from_json(const std::string& text);

}  // namespace rdrp
