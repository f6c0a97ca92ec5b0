#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <stdexcept>

#include "ssfad/parallel.hpp"
#include "ssfad/raster.hpp"
#include "ssfad/spectral.hpp"
#include "ssfad/windowing.hpp"

namespace ssfad {

/// Global RX: Mahalanobis distance of every pixel to the image-wide mean
/// under the image-wide covariance.
inline DetectionMap grx_map(const HyperCube& cube, double ridge = 1e-6,
                            int threads = 0) {
  if (ridge < 0.0) throw std::invalid_argument("grx_map: ridge must be non-negative");
  const int h = cube.height(), w = cube.width(), nb = cube.bands();
  const auto n = static_cast<Eigen::Index>(h) * w;

  Eigen::MatrixXd pixels(nb, n);
  for (int b = 0; b < nb; ++b) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        pixels(b, static_cast<Eigen::Index>(r) * w + c) = cube.at(r, c, b);
      }
    }
  }
  const Eigen::VectorXd mu = pixels.rowwise().mean();
  const Eigen::MatrixXd sigma =
      local_covariance(pixels, CovarianceMode::centered, ridge);

  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw SingularCovarianceError(
        "grx_map: global covariance is singular; increase ridge");
  }

  DetectionMap map(h, w);
  parallel_for(h, threads, [&](int r) {
    for (int c = 0; c < w; ++c) {
      const Eigen::VectorXd d =
          pixels.col(static_cast<Eigen::Index>(r) * w + c) - mu;
      map.at(r, c) = std::max(d.dot(llt.solve(d)), 0.0);
    }
  });
  return map;
}

/// Local RX: per pixel, Mahalanobis distance to the mean of the dual-window
/// ring under the ring covariance. Shares the covariance and Mahalanobis
/// kernels with the spectral detector.
inline DetectionMap lrx_map(const HyperCube& cube, const DualWindowSpec& spec,
                            double ridge = 1e-6, int threads = 0) {
  spec.validate();
  if (ridge < 0.0) throw std::invalid_argument("lrx_map: ridge must be non-negative");
  const int pad = spec.outer_radius();
  const HyperCube padded = pad_symmetric(cube, pad);
  DetectionMap map(cube.height(), cube.width());

  parallel_for(cube.height(), threads, [&](int r) {
    for (int c = 0; c < cube.width(); ++c) {
      const WindowView view = extract_dual_window(padded, {r, c}, spec, pad);
      const Eigen::VectorXd mu = view.ring.rowwise().mean();
      const Eigen::VectorXd d = view.center - mu;
      map.at(r, c) = detail::mahalanobis_with_retry(
          d, view.ring, CovarianceMode::centered, ridge);
    }
  });
  return map;
}

}  // namespace ssfad
