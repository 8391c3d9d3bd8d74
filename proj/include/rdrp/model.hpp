#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdrp/dataset.hpp"
#include "rdrp/rng.hpp"

namespace rdrp {

/// One-hidden-layer rectifier MLP. The scalar output s is the pre-sigmoid
/// score; predict_roi applies the sigmoid.
struct MlpParams {
  std::size_t d = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x d, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
};

enum class Objective { kDrp, kMseRegression };
enum class MseTarget { kRevenue, kCost };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  Objective objective = Objective::kDrp;
  /// Regression target when objective is kMseRegression. The treatment flag
  /// is appended to the features as input d+1.
  MseTarget mse_target = MseTarget::kCost;
  std::size_t hidden = 64;
};

/// Index subset of a dataset with cached per-arm counts.
struct Batch {
  const RctDataset* data = nullptr;
  std::vector<std::size_t> indices;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
};

Batch make_batch(const RctDataset& ds, std::vector<std::size_t> indices);

/// Glorot-uniform weights, zero biases. The hidden width must lie in
/// [10, 100].
MlpParams init_params(std::size_t d, std::size_t hidden, std::uint64_t seed);

/// Deterministic forward pass returning the score s.
double forward(const MlpParams& params, std::span<const double> x);

/// Forward pass with inverted dropout on the hidden layer: each activation is
/// kept with probability `retention` and scaled by 1/retention. One uniform
/// draw per hidden unit, in unit order.
double forward_dropout(const MlpParams& params, std::span<const double> x, double retention,
                       Rng& rng);

/// sigmoid(s) clamped to [1e-12, 1 - 1e-12].
double predict_roi(const MlpParams& params, std::span<const double> x);

/// Group-difference likelihood loss over a batch containing both arms.
double drp_loss(const MlpParams& params, const Batch& batch);

/// Analytic gradient of drp_loss with respect to every parameter.
MlpParams drp_loss_grad(const MlpParams& params, const Batch& batch);

/// Mini-batch SGD with momentum. DRP batches are stratified so each contains
/// both arms. Deterministic in (ds, config). Per-epoch mean batch losses are
/// appended to *epoch_loss when given.
MlpParams train(const RctDataset& ds, const TrainConfig& config,
                std::vector<double>* epoch_loss = nullptr);

/// S-learner ratio prediction from two regressors trained with the treatment
/// appended as the last input. Cost uplifts below 1e-6 are floored.
double tpm_sl_predict(const MlpParams& model_r, const MlpParams& model_c,
                      std::span<const double> x);

void save_params(const MlpParams& params, const std::string& path);
MlpParams load_params(const std::string& path);

}  // namespace rdrp
