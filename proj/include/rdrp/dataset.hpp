#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rdrp {

/// One randomized-trial record: features, binary treatment flag, and the two
/// observed outcomes (revenue and cost).
struct RctSample {
  std::vector<double> x;
  bool treated = false;
  double y_r = 0.0;
  double y_c = 0.0;
};

/// Immutable collection of RctSamples sharing one feature dimension.
class RctDataset {
 public:
  RctDataset() = default;

  /// Validates dimensions and finiteness; counts the treatment arms.
  RctDataset(std::vector<RctSample> samples, std::size_t dim);

  std::size_t n() const { return samples_.size(); }
  std::size_t n_treated() const { return n_treated_; }
  std::size_t n_control() const { return samples_.size() - n_treated_; }
  std::size_t dim() const { return dim_; }

  const std::vector<RctSample>& samples() const { return samples_; }
  const RctSample& operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::vector<RctSample> samples_;
  std::size_t dim_ = 0;
  std::size_t n_treated_ = 0;
};

/// Per-sample generator truth: revenue uplift, cost uplift and their ratio.
/// Only available for synthetic data.
struct GroundTruth {
  std::vector<double> tau_r;
  std::vector<double> tau_c;
  std::vector<double> roi;
};

enum class OutcomeModel { kBernoulli, kGaussian };

struct SyntheticConfig {
  std::size_t n = 1000;
  std::size_t d = 12;
  OutcomeModel outcome_model = OutcomeModel::kBernoulli;
  double noise = 0.1;
  std::uint64_t seed = 0;
  /// Substream index. Datasets generated from the same seed but different
  /// streams share the outcome-generating functions while drawing disjoint
  /// samples; the experiment harness uses streams 0/1/2 for train/cali/test.
  std::uint64_t stream = 0;
};

enum class ShiftKind { kNone, kMeanShift, kMixtureReweight };

/// Covariate shift applied to the feature distribution. Outcome-generating
/// functions stay fixed, so only P(X) moves, never Y|X.
struct ShiftSpec {
  ShiftKind kind = ShiftKind::kNone;
  double magnitude = 0.0;
};

/// Draws an RCT dataset plus its ground truth. Features come from a
/// two-component Gaussian mixture with weights (0.9, 0.1); mean_shift adds
/// `magnitude` to every feature, mixture_reweight swaps the weights to
/// (0.5, 0.5). Treatment is a fair coin independent of x. Deterministic in
/// (config, shift).
std::pair<RctDataset, GroundTruth> generate_synthetic(const SyntheticConfig& config,
                                                      const ShiftSpec& shift);

/// Names of the CSV columns holding features, treatment and the two outcomes.
struct ColumnMap {
  std::vector<std::string> features;
  std::string treatment = "treatment";
  std::string revenue = "revenue";
  std::string cost = "cost";
};

/// Reads a comma-separated file with a header row. Row order is preserved.
RctDataset load_csv(const std::string& path, const ColumnMap& columns);

/// Writes a dataset as CSV with columns x0..x{d-1},treatment,revenue,cost.
void save_csv(const RctDataset& ds, const std::string& path);

/// Multiplies revenue outcomes by factor_r and cost outcomes by factor_c.
RctDataset rescale_outcomes(const RctDataset& ds, double factor_r, double factor_c);

/// Keeps each sample independently with probability `rate`.
RctDataset subsample(const RctDataset& ds, double rate, std::uint64_t seed);

/// Seeded shuffle followed by a disjoint, exhaustive three-way partition.
std::array<RctDataset, 3> split(const RctDataset& ds, const std::array<double, 3>& fractions,
                                std::uint64_t seed);

struct DiffInMeans {
  double delta_r = 0.0;
  double delta_c = 0.0;
};

/// Treated-minus-control outcome means. Requires both arms present.
DiffInMeans diff_in_means(const RctDataset& ds);

}  // namespace rdrp
