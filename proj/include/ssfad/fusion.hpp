#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ssfad/raster.hpp"

namespace ssfad {

/// Blend factors for the spectral and spatial maps; a + b = 1.
struct FusionWeights {
  double a = 0.5;
  double b = 0.5;

  void validate() const {
    if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0) ||
        std::abs(a + b - 1.0) > 1e-12) {
      throw std::invalid_argument("FusionWeights: a, b must lie in [0,1] and sum to 1");
    }
  }
};

struct SpectralNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

namespace detail {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace detail

/// Largest singular value of the map viewed as an H x W matrix, by power
/// iteration on R'R applied as R then R' products (R'R is never formed).
/// Starts from the normalized all-ones vector; if that start happens to lie
/// in the null space of a non-zero map, deterministic fallbacks (an index
/// ramp, then the first non-zero column's basis vector) keep the result
/// reproducible. Stops when the relative change of the Rayleigh estimate
/// drops below tol; `converged` is false if max_iter was exhausted first.
inline SpectralNormResult spectral_norm_full(const DetectionMap& map,
                                             double tol = 1e-9,
                                             int max_iter = 1000) {
  if (tol <= 0.0) throw std::invalid_argument("spectral_norm: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("spectral_norm: max_iter must be >= 1");
  const detail::RowMajorMap r(map.scores().data(), map.height(), map.width());
  if ((r.array() == 0.0).all()) return {0.0, 0, true};

  const auto cols = r.cols();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(cols) / std::sqrt(static_cast<double>(cols));
  for (int fallback = 0; (r * v).squaredNorm() == 0.0; ++fallback) {
    if (fallback == 0) {
      v = Eigen::VectorXd::LinSpaced(cols, 1.0, static_cast<double>(cols));
      v.normalize();
    } else {
      Eigen::Index k = 0;
      for (; k < cols && r.col(k).squaredNorm() == 0.0; ++k) {
      }
      v = Eigen::VectorXd::Unit(cols, k);
      break;
    }
  }

  double lambda = 0.0;
  SpectralNormResult result;
  result.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd u = r * v;
    const double lambda_next = u.squaredNorm();  // v' R'R v with ||v|| = 1
    const Eigen::VectorXd w = r.transpose() * u;
    const double wn = w.norm();
    result.iterations = it;
    if (lambda_next > 0.0 &&
        std::abs(lambda_next - lambda) <= tol * lambda_next) {
      lambda = lambda_next;
      result.converged = true;
      break;
    }
    lambda = lambda_next;
    if (wn == 0.0) break;  // v reached an exact fixed point
    v = w / wn;
  }
  result.value = std::sqrt(lambda);
  return result;
}

inline double spectral_norm(const DetectionMap& map, double tol = 1e-9,
                            int max_iter = 1000) {
  return spectral_norm_full(map, tol, max_iter).value;
}

namespace detail {

inline void require_same_shape(const DetectionMap& r1, const DetectionMap& r2,
                               const char* who) {
  if (r1.height() != r2.height() || r1.width() != r2.width()) {
    throw std::invalid_argument(std::string(who) + ": map shapes differ");
  }
}

}  // namespace detail

/// Adaptive score weights: each branch weighted by the spectral norm of its
/// minmax-normalized map.
inline FusionWeights adaptive_weights(const DetectionMap& r1,
                                      const DetectionMap& r2) {
  detail::require_same_shape(r1, r2, "adaptive_weights");
  const double s1 = spectral_norm(minmax_normalize(r1));
  const double s2 = spectral_norm(minmax_normalize(r2));
  if (s1 + s2 == 0.0) {
    throw std::invalid_argument("adaptive_weights: both maps are constant, no signal to fuse");
  }
  return {s1 / (s1 + s2), s2 / (s1 + s2)};
}

/// R = a * R1 + b * R2 on the minmax-normalized inputs.
inline DetectionMap fuse(const DetectionMap& r1, const DetectionMap& r2,
                         const FusionWeights& weights) {
  detail::require_same_shape(r1, r2, "fuse");
  weights.validate();
  const DetectionMap n1 = minmax_normalize(r1);
  const DetectionMap n2 = minmax_normalize(r2);
  DetectionMap out(r1.height(), r1.width());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.scores()[i] = weights.a * n1.scores()[i] + weights.b * n2.scores()[i];
  }
  return out;
}

/// Average pooling, the non-adaptive alternative: a = b = 0.5.
inline DetectionMap fuse_average(const DetectionMap& r1, const DetectionMap& r2) {
  return fuse(r1, r2, FusionWeights{0.5, 0.5});
}

}  // namespace ssfad
