#include "rdrp/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "rdrp/error.hpp"
#include "rdrp/math.hpp"

namespace rdrp {

namespace {

constexpr double kRoiClamp = 1e-12;
// logit(1 - 1e-12); scores beyond this are in the clamp region of predict_roi.
const double kScoreClamp = std::log((1.0 - kRoiClamp) / kRoiClamp);

void check_dim(const MlpParams& params, std::span<const double> x) {
  if (x.size() != params.d) {
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(params.d));
  }
}

/// Per-sample loss term y_r*ln(roi/(1-roi)) + y_c*ln(1-roi) evaluated with the
/// clamped roi. Written in terms of the clamped score for numerical accuracy:
/// ln(roi/(1-roi)) = s and ln(1-roi) = -softplus(s).
double sample_term(double s, double y_r, double y_c) {
  const double sc = std::clamp(s, -kScoreClamp, kScoreClamp);
  return y_r * sc - y_c * softplus(sc);
}

struct HiddenState {
  std::vector<double> activations;  // post-rectifier
  double score = 0.0;
};

void run_hidden(const MlpParams& p, std::span<const double> x, HiddenState& state) {
  state.activations.resize(p.hidden);
  double s = p.b2;
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double pre = p.b1[j];
    const double* row = p.w1.data() + j * p.d;
    for (std::size_t k = 0; k < p.d; ++k) pre += row[k] * x[k];
    const double h = pre > 0.0 ? pre : 0.0;
    state.activations[j] = h;
    s += p.w2[j] * h;
  }
  state.score = s;
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams g;
  g.d = p.d;
  g.hidden = p.hidden;
  g.w1.assign(p.w1.size(), 0.0);
  g.b1.assign(p.b1.size(), 0.0);
  g.w2.assign(p.w2.size(), 0.0);
  g.b2 = 0.0;
  return g;
}

void validate_batch(const Batch& batch) {
  if (batch.data == nullptr || batch.indices.empty()) {
    throw InvalidArgumentError("batch is empty");
  }
  if (batch.n_treated == 0 || batch.n_control == 0) {
    throw DegenerateDataError("batch must contain both treatment arms");
  }
}

/// Loss and gradient in one backward sweep.
double loss_and_grad(const MlpParams& p, const Batch& batch, MlpParams* grad) {
  validate_batch(batch);
  const RctDataset& ds = *batch.data;
  const double inv_n1 = 1.0 / static_cast<double>(batch.n_treated);
  const double inv_n0 = 1.0 / static_cast<double>(batch.n_control);

  double treated_sum = 0.0;
  double control_sum = 0.0;
  HiddenState state;
  for (const std::size_t idx : batch.indices) {
    const RctSample& sample = ds[idx];
    run_hidden(p, sample.x, state);
    const double term = sample_term(state.score, sample.y_r, sample.y_c);
    if (sample.treated) {
      treated_sum += term;
    } else {
      control_sum += term;
    }
    if (grad != nullptr && std::abs(state.score) < kScoreClamp) {
      // dL/ds = -+ (y_r - y_c*roi)/N_arm, minus for the treated arm.
      const double roi = sigmoid(state.score);
      const double arm_scale = sample.treated ? -inv_n1 : inv_n0;
      const double dl_ds = arm_scale * (sample.y_r - sample.y_c * roi);
      if (dl_ds == 0.0) continue;
      grad->b2 += dl_ds;
      for (std::size_t j = 0; j < p.hidden; ++j) {
        const double h = state.activations[j];
        if (h <= 0.0) continue;
        grad->w2[j] += dl_ds * h;
        const double dl_dpre = dl_ds * p.w2[j];
        grad->b1[j] += dl_dpre;
        double* g_row = grad->w1.data() + j * p.d;
        for (std::size_t k = 0; k < p.d; ++k) g_row[k] += dl_dpre * sample.x[k];
      }
    }
  }
  return -(treated_sum * inv_n1 - control_sum * inv_n0);
}

double mse_loss_and_grad(const MlpParams& p, const std::vector<std::vector<double>>& inputs,
                         const std::vector<double>& targets,
                         const std::vector<std::size_t>& indices, MlpParams* grad) {
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  double loss = 0.0;
  HiddenState state;
  for (const std::size_t idx : indices) {
    run_hidden(p, inputs[idx], state);
    const double err = state.score - targets[idx];
    loss += err * err;
    if (grad == nullptr) continue;
    const double dl_ds = 2.0 * err * inv_n;
    grad->b2 += dl_ds;
    for (std::size_t j = 0; j < p.hidden; ++j) {
      const double h = state.activations[j];
      if (h <= 0.0) continue;
      grad->w2[j] += dl_ds * h;
      const double dl_dpre = dl_ds * p.w2[j];
      grad->b1[j] += dl_dpre;
      double* g_row = grad->w1.data() + j * p.d;
      for (std::size_t k = 0; k < p.d; ++k) g_row[k] += dl_dpre * inputs[idx][k];
    }
  }
  return loss * inv_n;
}

void sgd_step(MlpParams& p, MlpParams& velocity, const MlpParams& grad, double lr,
              double momentum) {
  auto update = [&](double& w, double& v, double g) {
    v = momentum * v - lr * g;
    w += v;
  };
  for (std::size_t i = 0; i < p.w1.size(); ++i) update(p.w1[i], velocity.w1[i], grad.w1[i]);
  for (std::size_t i = 0; i < p.b1.size(); ++i) update(p.b1[i], velocity.b1[i], grad.b1[i]);
  for (std::size_t i = 0; i < p.w2.size(); ++i) update(p.w2[i], velocity.w2[i], grad.w2[i]);
  update(p.b2, velocity.b2, grad.b2);
}

/// Splits shuffled treated/control pools across batches so every batch keeps
/// at least one sample of each arm.
std::vector<std::vector<std::size_t>> stratified_batches(const RctDataset& ds,
                                                         std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> treated;
  std::vector<std::size_t> control;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    (ds[i].treated ? treated : control).push_back(i);
  }
  rng.shuffle(treated);
  rng.shuffle(control);

  const std::size_t wanted = (ds.n() + batch_size - 1) / batch_size;
  const std::size_t nb = std::max<std::size_t>(1, std::min({wanted, treated.size(), control.size()}));
  std::vector<std::vector<std::size_t>> batches(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t t_lo = b * treated.size() / nb;
    const std::size_t t_hi = (b + 1) * treated.size() / nb;
    const std::size_t c_lo = b * control.size() / nb;
    const std::size_t c_hi = (b + 1) * control.size() / nb;
    batches[b].insert(batches[b].end(), treated.begin() + t_lo, treated.begin() + t_hi);
    batches[b].insert(batches[b].end(), control.begin() + c_lo, control.begin() + c_hi);
  }
  return batches;
}

std::vector<std::vector<std::size_t>> plain_batches(std::size_t n, std::size_t batch_size,
                                                    Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t lo = 0; lo < n; lo += batch_size) {
    const std::size_t hi = std::min(n, lo + batch_size);
    batches.emplace_back(order.begin() + lo, order.begin() + hi);
  }
  return batches;
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw InvalidConfigError("epochs must be at least 1");
  if (cfg.batch_size < 2) throw InvalidConfigError("batch_size must be at least 2");
  if (!(cfg.learning_rate > 0.0)) throw InvalidConfigError("learning_rate must be positive");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
    throw InvalidConfigError("momentum must lie in [0,1)");
  }
}

}  // namespace

Batch make_batch(const RctDataset& ds, std::vector<std::size_t> indices) {
  Batch b;
  b.data = &ds;
  b.indices = std::move(indices);
  for (const std::size_t idx : b.indices) {
    if (idx >= ds.n()) throw InvalidArgumentError("batch index out of range");
    if (ds[idx].treated) {
      ++b.n_treated;
    } else {
      ++b.n_control;
    }
  }
  return b;
}

MlpParams init_params(std::size_t d, std::size_t hidden, std::uint64_t seed) {
  if (d < 1) throw InvalidConfigError("feature dimension must be at least 1");
  if (hidden < 10 || hidden > 100) {
    throw InvalidConfigError("hidden width " + std::to_string(hidden) +
                             " outside the supported range [10, 100]");
  }
  MlpParams p;
  p.d = d;
  p.hidden = hidden;
  p.w1.resize(hidden * d);
  p.b1.assign(hidden, 0.0);
  p.w2.resize(hidden);
  p.b2 = 0.0;

  Rng rng(mix_seed(seed, 0x494e4954u));
  const double bound1 = std::sqrt(6.0 / static_cast<double>(d + hidden));
  for (double& w : p.w1) w = rng.uniform(-bound1, bound1);
  const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (double& w : p.w2) w = rng.uniform(-bound2, bound2);
  return p;
}

double forward(const MlpParams& params, std::span<const double> x) {
  check_dim(params, x);
  HiddenState state;
  run_hidden(params, x, state);
  return state.score;
}

double forward_dropout(const MlpParams& params, std::span<const double> x, double retention,
                       Rng& rng) {
  check_dim(params, x);
  if (!(retention > 0.0) || retention > 1.0) {
    throw InvalidConfigError("dropout retention must lie in (0, 1]");
  }
  const double inv_p = 1.0 / retention;
  double s = params.b2;
  for (std::size_t j = 0; j < params.hidden; ++j) {
    const bool keep = rng.uniform() < retention;
    if (!keep) continue;
    double pre = params.b1[j];
    const double* row = params.w1.data() + j * params.d;
    for (std::size_t k = 0; k < params.d; ++k) pre += row[k] * x[k];
    if (pre > 0.0) s += params.w2[j] * pre * inv_p;
  }
  return s;
}

double predict_roi(const MlpParams& params, std::span<const double> x) {
  return std::clamp(sigmoid(forward(params, x)), kRoiClamp, 1.0 - kRoiClamp);
}

double drp_loss(const MlpParams& params, const Batch& batch) {
  return loss_and_grad(params, batch, nullptr);
}

MlpParams drp_loss_grad(const MlpParams& params, const Batch& batch) {
  MlpParams grad = zeros_like(params);
  loss_and_grad(params, batch, &grad);
  return grad;
}

MlpParams train(const RctDataset& ds, const TrainConfig& cfg, std::vector<double>* epoch_loss) {
  validate_train_config(cfg);
  if (ds.n() == 0) throw InvalidArgumentError("training dataset is empty");

  const bool drp = cfg.objective == Objective::kDrp;
  if (drp && (ds.n_treated() == 0 || ds.n_control() == 0)) {
    throw DegenerateDataError("DRP training needs both treatment arms");
  }

  // Regression mode trains on [x, t] against the chosen outcome.
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;
  const std::size_t d_in = drp ? ds.dim() : ds.dim() + 1;
  if (!drp) {
    inputs.reserve(ds.n());
    targets.reserve(ds.n());
    for (const RctSample& s : ds.samples()) {
      std::vector<double> row = s.x;
      row.push_back(s.treated ? 1.0 : 0.0);
      inputs.push_back(std::move(row));
      targets.push_back(cfg.mse_target == MseTarget::kRevenue ? s.y_r : s.y_c);
    }
  }

  MlpParams params = init_params(d_in, cfg.hidden, mix_seed(cfg.seed, 0x57303u));
  MlpParams velocity = zeros_like(params);
  Rng batch_rng(mix_seed(cfg.seed, 0x42415443u));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = drp ? stratified_batches(ds, cfg.batch_size, batch_rng)
                             : plain_batches(ds.n(), cfg.batch_size, batch_rng);
    double loss_sum = 0.0;
    for (const auto& idx : batches) {
      MlpParams grad = zeros_like(params);
      double loss;
      if (drp) {
        loss = loss_and_grad(params, make_batch(ds, idx), &grad);
      } else {
        loss = mse_loss_and_grad(params, inputs, targets, idx, &grad);
      }
      loss_sum += loss;
      sgd_step(params, velocity, grad, cfg.learning_rate, cfg.momentum);
    }
    if (epoch_loss != nullptr) {
      epoch_loss->push_back(loss_sum / static_cast<double>(batches.size()));
    }
  }
  return params;
}

double tpm_sl_predict(const MlpParams& model_r, const MlpParams& model_c,
                      std::span<const double> x) {
  std::vector<double> row(x.begin(), x.end());
  row.push_back(1.0);
  const double r1 = forward(model_r, row);
  const double c1 = forward(model_c, row);
  row.back() = 0.0;
  const double r0 = forward(model_r, row);
  const double c0 = forward(model_c, row);
  const double uplift_r = r1 - r0;
  const double uplift_c = std::max(c1 - c0, 1e-6);
  return uplift_r / uplift_c;
}

namespace {

constexpr char kMagic[4] = {'R', 'D', 'R', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
  return v;
}

double get_f64(const std::string& in, std::size_t& pos) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_params(const MlpParams& params, const std::string& path) {
  std::string blob;
  blob.reserve(16 + 8 * (params.w1.size() + params.b1.size() + params.w2.size() + 1));
  blob.append(kMagic, 4);
  put_u32(blob, kFormatVersion);
  put_u32(blob, static_cast<std::uint32_t>(params.d));
  put_u32(blob, static_cast<std::uint32_t>(params.hidden));
  for (double v : params.w1) put_f64(blob, v);
  for (double v : params.b1) put_f64(blob, v);
  for (double v : params.w2) put_f64(blob, v);
  put_f64(blob, params.b2);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("failed while writing '" + path + "'");
}

MlpParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (blob.size() < 16) throw CorruptionError("weight file '" + path + "' is truncated");
  if (std::memcmp(blob.data(), kMagic, 4) != 0) {
    throw FormatError("'" + path + "' is not a weight file (bad magic)");
  }
  std::size_t pos = 4;
  const std::uint32_t version = get_u32(blob, pos);
  if (version != kFormatVersion) {
    throw FormatError("unsupported weight file version " + std::to_string(version));
  }
  const std::uint32_t d = get_u32(blob, pos);
  const std::uint32_t hidden = get_u32(blob, pos);
  const std::size_t doubles = static_cast<std::size_t>(hidden) * d + 2 * hidden + 1;
  if (blob.size() != 16 + 8 * doubles) {
    throw CorruptionError("weight file '" + path + "' payload does not match its header");
  }

  MlpParams p;
  p.d = d;
  p.hidden = hidden;
  p.w1.resize(static_cast<std::size_t>(hidden) * d);
  p.b1.resize(hidden);
  p.w2.resize(hidden);
  for (double& v : p.w1) v = get_f64(blob, pos);
  for (double& v : p.b1) v = get_f64(blob, pos);
  for (double& v : p.w2) v = get_f64(blob, pos);
  p.b2 = get_f64(blob, pos);
  return p;
}

}  // namespace rdrp
