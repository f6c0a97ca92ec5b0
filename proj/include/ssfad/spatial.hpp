#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssfad/parallel.hpp"
#include "ssfad/raster.hpp"

namespace ssfad {

struct SpatialParams {
  int omega = 3;  // patch side length, odd so the patch centers on the pixel

  void validate() const {
    if (omega < 1 || omega % 2 == 0) {
      throw std::invalid_argument("SpatialParams: omega must be an odd integer >= 1");
    }
  }
};

/// The 8*omega offsets at Chebyshev distance omega, ordered clockwise from
/// the top-left corner. Translating a patch by any of them yields a neighbor
/// patch abutting the center patch without overlap.
inline std::vector<std::pair<int, int>> ring_window_offsets(int omega) {
  if (omega < 1) {
    throw std::invalid_argument("ring_window_offsets: omega must be >= 1");
  }
  std::vector<std::pair<int, int>> offsets;
  offsets.reserve(static_cast<std::size_t>(8 * omega));
  for (int c = -omega; c < omega; ++c) offsets.emplace_back(-omega, c);  // top edge, rightward
  for (int r = -omega; r < omega; ++r) offsets.emplace_back(r, omega);   // right edge, downward
  for (int c = omega; c > -omega; --c) offsets.emplace_back(omega, c);   // bottom edge, leftward
  for (int r = omega; r > -omega; --r) offsets.emplace_back(r, -omega);  // left edge, upward
  return offsets;
}

/// omega x omega x B block around `center` (unpadded frame), gathered from a
/// cube padded by `pad_radius`. Bands are rows, patch cells are columns.
inline Eigen::MatrixXd extract_patch(const HyperCube& padded, PixelCoord center,
                                     int omega, int pad_radius) {
  const int half = (omega - 1) / 2;
  const int nb = padded.bands();
  Eigen::MatrixXd patch(nb, omega * omega);
  int k = 0;
  for (int dr = -half; dr <= half; ++dr) {
    for (int dc = -half; dc <= half; ++dc, ++k) {
      const int pr = center.row + dr + pad_radius;
      const int pc = center.col + dc + pad_radius;
      if (pr < 0 || pr >= padded.height() || pc < 0 || pc >= padded.width()) {
        throw std::out_of_range("extract_patch: patch exceeds padded cube");
      }
      for (int b = 0; b < nb; ++b) patch(b, k) = padded.at(pr, pc, b);
    }
  }
  return patch;
}

/// Squared Frobenius norm of the patch difference, summed over all bands.
inline double patch_dissimilarity(const Eigen::MatrixXd& patch_a,
                                  const Eigen::MatrixXd& patch_b) {
  if (patch_a.rows() != patch_b.rows() || patch_a.cols() != patch_b.cols()) {
    throw std::invalid_argument("patch_dissimilarity: shape mismatch");
  }
  return (patch_a - patch_b).squaredNorm();
}

/// Spatial branch of SSFAD: per pixel, the minimum dissimilarity between the
/// center patch and the 8*omega patches ringing it. A large score means no
/// nearby background window matches the local structure. Produces map R2.
inline DetectionMap spatial_map(const HyperCube& cube, const SpatialParams& params,
                                int threads = 0) {
  params.validate();
  const int omega = params.omega;
  const int pad = 2 * omega;
  const HyperCube padded = pad_symmetric(cube, pad);
  const auto offsets = ring_window_offsets(omega);
  DetectionMap map(cube.height(), cube.width());

  parallel_for(cube.height(), threads, [&](int r) {
    for (int c = 0; c < cube.width(); ++c) {
      const Eigen::MatrixXd center_patch =
          extract_patch(padded, {r, c}, omega, pad);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [dr, dc] : offsets) {
        const Eigen::MatrixXd neighbor =
            extract_patch(padded, {r + dr, c + dc}, omega, pad);
        best = std::min(best, patch_dissimilarity(center_patch, neighbor));
      }
      map.at(r, c) = best;
    }
  });
  return map;
}

}  // namespace ssfad
