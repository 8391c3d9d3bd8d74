#pragma once

#include <cmath>

namespace rdrp {

inline double sigmoid(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

/// Inverse of sigmoid on (0, 1).
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// log(1 + exp(v)) without overflow.
inline double softplus(double v) { return std::log1p(std::exp(-std::abs(v))) + std::max(v, 0.0); }

}  // namespace rdrp
