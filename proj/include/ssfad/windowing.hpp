#pragma once

#include <Eigen/Dense>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "ssfad/raster.hpp"

namespace ssfad {

/// Concentric dual window around a testing pixel. Both sides are odd so the
/// center pixel is well-defined; the ring between the windows supplies the
/// background samples.
struct DualWindowSpec {
  int omega_out = 5;
  int omega_in = 3;

  void validate() const {
    if (omega_out < 3 || omega_out % 2 == 0) {
      throw std::invalid_argument("DualWindowSpec: omega_out must be an odd integer >= 3");
    }
    if (omega_in < 1 || omega_in % 2 == 0) {
      throw std::invalid_argument("DualWindowSpec: omega_in must be an odd integer >= 1");
    }
    if (omega_out <= omega_in) {
      throw std::invalid_argument("DualWindowSpec: omega_out must exceed omega_in");
    }
  }

  int outer_radius() const { return (omega_out - 1) / 2; }
  int inner_radius() const { return (omega_in - 1) / 2; }
  int outer_count() const { return omega_out * omega_out; }             // N
  int ring_count() const { return omega_out * omega_out - omega_in * omega_in; }  // S
  int inner_count() const { return omega_in * omega_in - 1; }           // M
};

/// One testing pixel with its neighborhoods. Spectra are stored as columns.
/// Coordinates stay in the unpadded frame; at the border they follow the
/// window offset, not the mirrored source location, so inverse-distance
/// weights are the same for every pixel.
struct WindowView {
  PixelCoord center_coord;
  Eigen::VectorXd center;                // B
  std::vector<PixelCoord> inner_coords;  // M entries
  Eigen::MatrixXd inner;                 // B x M
  std::vector<PixelCoord> ring_coords;   // S entries
  Eigen::MatrixXd ring;                  // B x S
  std::vector<PixelCoord> outer_coords;  // N entries, includes the center
  Eigen::MatrixXd outer;                 // B x N
};

/// Gathers the dual window around `coord` (unpadded frame) from a cube that
/// was padded by `pad_radius >= spec.outer_radius()`.
inline WindowView extract_dual_window(const HyperCube& padded, PixelCoord coord,
                                      const DualWindowSpec& spec,
                                      int pad_radius) {
  spec.validate();
  const int p = spec.outer_radius();
  if (pad_radius < p) {
    throw std::invalid_argument("extract_dual_window: pad_radius smaller than outer window radius");
  }
  const int h = padded.height() - 2 * pad_radius;
  const int w = padded.width() - 2 * pad_radius;
  if (h <= 0 || w <= 0) {
    throw std::invalid_argument("extract_dual_window: padding exceeds cube size");
  }
  if (coord.row < 0 || coord.row >= h || coord.col < 0 || coord.col >= w) {
    throw std::out_of_range("extract_dual_window: coord outside the unpadded interior");
  }

  const int nb = padded.bands();
  const int hi = spec.inner_radius();
  WindowView view;
  view.center_coord = coord;
  view.center.resize(nb);
  view.outer.resize(nb, spec.outer_count());
  view.ring.resize(nb, spec.ring_count());
  view.inner.resize(nb, spec.inner_count());
  view.outer_coords.reserve(static_cast<std::size_t>(spec.outer_count()));
  view.ring_coords.reserve(static_cast<std::size_t>(spec.ring_count()));
  view.inner_coords.reserve(static_cast<std::size_t>(spec.inner_count()));

  int n_outer = 0, n_ring = 0, n_inner = 0;
  for (int dr = -p; dr <= p; ++dr) {
    for (int dc = -p; dc <= p; ++dc) {
      const int pr = coord.row + dr + pad_radius;
      const int pc = coord.col + dc + pad_radius;
      const PixelCoord abs{coord.row + dr, coord.col + dc};
      const int outer_idx = n_outer++;
      view.outer_coords.push_back(abs);
      for (int b = 0; b < nb; ++b) {
        view.outer(b, outer_idx) = padded.at(pr, pc, b);
      }
      const bool in_inner = std::abs(dr) <= hi && std::abs(dc) <= hi;
      if (dr == 0 && dc == 0) {
        view.center = view.outer.col(outer_idx);
      } else if (in_inner) {
        view.inner.col(n_inner) = view.outer.col(outer_idx);
        view.inner_coords.push_back(abs);
        ++n_inner;
      } else {
        view.ring.col(n_ring) = view.outer.col(outer_idx);
        view.ring_coords.push_back(abs);
        ++n_ring;
      }
    }
  }
  return view;
}

/// Inverse squared-distance weights over coordinate distances, normalized to
/// sum 1.
inline std::vector<double> idw_weights(PixelCoord center,
                                       const std::vector<PixelCoord>& neighbors) {
  if (neighbors.empty()) {
    throw std::invalid_argument("idw_weights: neighbor list is empty");
  }
  std::vector<double> weights(neighbors.size());
  double total = 0.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const double h = coord_distance(center, neighbors[i]);
    if (h <= 0.0) {
      throw std::invalid_argument("idw_weights: neighbor coincides with center");
    }
    weights[i] = 1.0 / (h * h);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace ssfad
