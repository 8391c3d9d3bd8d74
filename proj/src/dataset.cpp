#include "rdrp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rdrp/error.hpp"
#include "rdrp/math.hpp"
#include "rdrp/rng.hpp"

namespace rdrp {

namespace {

constexpr std::uint64_t kWorldTag = 0x524f49u;    // generator function draws
constexpr std::uint64_t kSampleTag = 0x53414d50u; // per-sample draws

/// Fixed per-world coefficients shared by every stream of one seed.
struct World {
  std::vector<double> w_roi;
  std::vector<double> w_base_r;
  std::vector<double> w_base_c;
  double roi_offset = 0.0;
};

/// The two mixture components share their mean; the minority component is
/// wider by this factor. Its mass lives on the sparse fringe of the feature
/// space, which is exactly where a model trained on majority data has the
/// least support.
constexpr double kMinoritySpreadFactor = 2.0;

/// Curvature of the roi score in the squared feature radius. Negative: the
/// sparse fringe responds worse than a linear read of the dense center
/// suggests, so a partially trained model overrates exactly the samples it
/// knows least about.
constexpr double kRadialCurvature = -1.0;

World make_world(const SyntheticConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, kWorldTag));
  World w;
  w.w_roi.resize(cfg.d);
  w.w_base_r.resize(cfg.d);
  w.w_base_c.resize(cfg.d);
  double norm_sq = 0.0;
  for (std::size_t k = 0; k < cfg.d; ++k) {
    w.w_roi[k] = rng.uniform(-1.0, 1.0);
    norm_sq += w.w_roi[k] * w.w_roi[k];
  }
  // A modest score spread keeps the per-sample ranking signal weak relative
  // to outcome noise, so converging takes real sample volume.
  const double scale = 0.65 / std::max(1e-9, std::sqrt(norm_sq));
  for (std::size_t k = 0; k < cfg.d; ++k) w.w_roi[k] *= scale;
  for (std::size_t k = 0; k < cfg.d; ++k) w.w_base_r[k] = rng.uniform(-0.5, 0.5);
  for (std::size_t k = 0; k < cfg.d; ++k) w.w_base_c[k] = rng.uniform(-0.5, 0.5);
  w.roi_offset = rng.uniform(-0.75, -0.25);
  return w;
}

double dot(const std::vector<double>& w, const std::vector<double>& x) {
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * x[k];
  return acc;
}

}  // namespace

RctDataset::RctDataset(std::vector<RctSample> samples, std::size_t dim)
    : samples_(std::move(samples)), dim_(dim) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const RctSample& s = samples_[i];
    if (s.x.size() != dim_) {
      throw ValidationError("sample " + std::to_string(i) + " has dimension " +
                            std::to_string(s.x.size()) + ", expected " + std::to_string(dim_));
    }
    for (double v : s.x) {
      if (!std::isfinite(v)) throw ValidationError("non-finite feature in sample " + std::to_string(i));
    }
    if (!std::isfinite(s.y_r) || !std::isfinite(s.y_c)) {
      throw ValidationError("non-finite outcome in sample " + std::to_string(i));
    }
    if (s.treated) ++n_treated_;
  }
}

std::pair<RctDataset, GroundTruth> generate_synthetic(const SyntheticConfig& cfg,
                                                      const ShiftSpec& shift) {
  if (cfg.n < 4) throw InvalidConfigError("synthetic n must be at least 4");
  if (cfg.d < 1) throw InvalidConfigError("synthetic d must be at least 1");
  if (!(cfg.noise >= 0.0)) throw InvalidConfigError("noise scale must be non-negative");
  if (shift.magnitude < 0.0) throw InvalidArgumentError("shift magnitude must be non-negative");

  const World world = make_world(cfg);
  const double comp0_weight = shift.kind == ShiftKind::kMixtureReweight ? 0.5 : 0.9;

  std::vector<RctSample> samples(cfg.n);
  GroundTruth truth;
  truth.tau_r.resize(cfg.n);
  truth.tau_c.resize(cfg.n);
  truth.roi.resize(cfg.n);

  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng(mix_seed(cfg.seed, cfg.stream, kSampleTag + i));
    RctSample& s = samples[i];
    s.x.resize(cfg.d);
    const bool minority = !rng.bernoulli(comp0_weight);
    const double spread = minority ? kMinoritySpreadFactor : 1.0;
    for (std::size_t k = 0; k < cfg.d; ++k) {
      s.x[k] = spread * rng.normal();
      if (shift.kind == ShiftKind::kMeanShift) s.x[k] += shift.magnitude;
    }

    double radius_sq = 0.0;
    for (double v : s.x) radius_sq += v * v;
    const double curvature =
        kRadialCurvature * (radius_sq / static_cast<double>(cfg.d) - 1.0);
    const double score = dot(world.w_roi, s.x) + world.roi_offset + curvature;
    const double roi = std::clamp(sigmoid(score), 0.05, 0.95);
    const double base_r = 0.1 + 0.3 * sigmoid(dot(world.w_base_r, s.x));
    const double base_c = 0.1 + 0.3 * sigmoid(dot(world.w_base_c, s.x));
    const double tau_c = rng.uniform(0.1, 0.5);
    const double tau_r = roi * tau_c;

    s.treated = rng.bernoulli(0.5);
    const double mean_r = base_r + (s.treated ? tau_r : 0.0);
    const double mean_c = base_c + (s.treated ? tau_c : 0.0);
    if (cfg.outcome_model == OutcomeModel::kBernoulli) {
      s.y_r = rng.bernoulli(mean_r) ? 1.0 : 0.0;
      s.y_c = rng.bernoulli(mean_c) ? 1.0 : 0.0;
    } else {
      s.y_r = mean_r + cfg.noise * rng.normal();
      s.y_c = mean_c + cfg.noise * rng.normal();
    }

    truth.tau_r[i] = tau_r;
    truth.tau_c[i] = tau_c;
    truth.roi[i] = roi;
  }

  return {RctDataset(std::move(samples), cfg.d), std::move(truth)};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string v) {
  while (!v.empty() && (v.back() == '\r' || v.back() == '\n' || v.back() == ' ')) v.pop_back();
  std::size_t start = 0;
  while (start < v.size() && v[start] == ' ') ++start;
  return v.substr(start);
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  const std::string value = trim(cell);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError("line " + std::to_string(line_no) + ", column '" + column +
                     "': cannot parse '" + value + "' as a number");
  }
  return out;
}

}  // namespace

RctDataset load_csv(const std::string& path, const ColumnMap& columns) {
  if (columns.features.empty()) throw InvalidArgumentError("column map has no feature columns");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + path + "' is empty, expected a header row");
  std::vector<std::string> header = split_line(line);
  for (std::string& h : header) h = trim(h);

  auto find_column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "' in '" + path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> feature_idx;
  feature_idx.reserve(columns.features.size());
  for (const std::string& name : columns.features) feature_idx.push_back(find_column(name));
  const std::size_t t_idx = find_column(columns.treatment);
  const std::size_t r_idx = find_column(columns.revenue);
  const std::size_t c_idx = find_column(columns.cost);

  std::vector<RctSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    RctSample s;
    s.x.reserve(feature_idx.size());
    for (std::size_t k = 0; k < feature_idx.size(); ++k) {
      s.x.push_back(parse_cell(cells[feature_idx[k]], line_no, columns.features[k]));
    }
    const double t = parse_cell(cells[t_idx], line_no, columns.treatment);
    if (t != 0.0 && t != 1.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": treatment value " +
                            std::to_string(t) + " is not in {0,1}");
    }
    s.treated = t == 1.0;
    s.y_r = parse_cell(cells[r_idx], line_no, columns.revenue);
    s.y_c = parse_cell(cells[c_idx], line_no, columns.cost);
    samples.push_back(std::move(s));
  }

  return RctDataset(std::move(samples), columns.features.size());
}

void save_csv(const RctDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t k = 0; k < ds.dim(); ++k) out << "x" << k << ",";
  out << "treatment,revenue,cost\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const RctSample& s : ds.samples()) {
    for (double v : s.x) {
      put(v);
      out << ',';
    }
    out << (s.treated ? 1 : 0) << ',';
    put(s.y_r);
    out << ',';
    put(s.y_c);
    out << '\n';
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

RctDataset rescale_outcomes(const RctDataset& ds, double factor_r, double factor_c) {
  if (!(factor_r > 0.0) || !(factor_c > 0.0)) {
    throw InvalidArgumentError("rescale factors must be positive");
  }
  std::vector<RctSample> samples = ds.samples();
  for (RctSample& s : samples) {
    s.y_r *= factor_r;
    s.y_c *= factor_c;
  }
  return RctDataset(std::move(samples), ds.dim());
}

RctDataset subsample(const RctDataset& ds, double rate, std::uint64_t seed) {
  if (!(rate > 0.0) || rate > 1.0) throw InvalidArgumentError("subsample rate must be in (0,1]");
  Rng rng(mix_seed(seed, 0x535542u));
  std::vector<RctSample> kept;
  for (const RctSample& s : ds.samples()) {
    if (rng.uniform() < rate) kept.push_back(s);
  }
  return RctDataset(std::move(kept), ds.dim());
}

std::array<RctDataset, 3> split(const RctDataset& ds, const std::array<double, 3>& fractions,
                                std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw InvalidArgumentError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgumentError("split fractions must sum to 1");

  std::vector<std::size_t> order(ds.n());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x53504cu));
  rng.shuffle(order);

  const std::size_t n = ds.n();
  const auto c1 = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const auto c2 = static_cast<std::size_t>(
      std::llround((fractions[0] + fractions[1]) * static_cast<double>(n)));
  std::array<RctDataset, 3> parts;
  std::array<std::pair<std::size_t, std::size_t>, 3> ranges = {
      {{0, c1}, {c1, c2}, {c2, n}}};
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<RctSample> samples;
    samples.reserve(ranges[p].second - ranges[p].first);
    for (std::size_t i = ranges[p].first; i < ranges[p].second; ++i) {
      samples.push_back(ds[order[i]]);
    }
    parts[p] = RctDataset(std::move(samples), ds.dim());
  }
  return parts;
}

DiffInMeans diff_in_means(const RctDataset& ds) {
  if (ds.n_treated() == 0 || ds.n_control() == 0) {
    throw DegenerateDataError("diff_in_means needs at least one sample in each arm");
  }
  double sum_r1 = 0.0, sum_c1 = 0.0, sum_r0 = 0.0, sum_c0 = 0.0;
  for (const RctSample& s : ds.samples()) {
    if (s.treated) {
      sum_r1 += s.y_r;
      sum_c1 += s.y_c;
    } else {
      sum_r0 += s.y_r;
      sum_c0 += s.y_c;
    }
  }
  const auto n1 = static_cast<double>(ds.n_treated());
  const auto n0 = static_cast<double>(ds.n_control());
  return {sum_r1 / n1 - sum_r0 / n0, sum_c1 / n1 - sum_c0 / n0};
}

}  // namespace rdrp
