#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ssfad {

/// Grid position of a pixel. Signed so that window offsets around border
/// pixels can be expressed in the unpadded frame of reference.
struct PixelCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

inline double coord_distance(PixelCoord a, PixelCoord b) {
  const double dr = static_cast<double>(a.row) - static_cast<double>(b.row);
  const double dc = static_cast<double>(a.col) - static_cast<double>(b.col);
  return std::sqrt(dr * dr + dc * dc);
}

/// H x W x B raster of spectra, stored band-sequential (BSQ): band-major
/// traversal yields contiguous per-band planes. Values are kept in double
/// precision regardless of the on-disk type.
class HyperCube {
 public:
  HyperCube(int height, int width, int bands)
      : height_(height), width_(width), bands_(bands) {
    if (height <= 0 || width <= 0 || bands <= 0) {
      throw std::invalid_argument("HyperCube: dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(height) * width * bands, 0.0);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int bands() const { return bands_; }
  std::size_t size() const { return data_.size(); }

  double at(int r, int c, int b) const { return data_[index(r, c, b)]; }
  double& at(int r, int c, int b) { return data_[index(r, c, b)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t index(int r, int c, int b) const {
    assert(r >= 0 && r < height_ && c >= 0 && c < width_ && b >= 0 && b < bands_);
    return (static_cast<std::size_t>(b) * height_ + r) * width_ + c;
  }

  int height_;
  int width_;
  int bands_;
  std::vector<double> data_;
};

/// H x W real-valued anomaly scores, row-major.
class DetectionMap {
 public:
  DetectionMap(int height, int width) : height_(height), width_(width) {
    if (height <= 0 || width <= 0) {
      throw std::invalid_argument("DetectionMap: dimensions must be positive");
    }
    scores_.assign(static_cast<std::size_t>(height) * width, 0.0);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return scores_.size(); }

  double at(int r, int c) const { return scores_[index(r, c)]; }
  double& at(int r, int c) { return scores_[index(r, c)]; }

  const std::vector<double>& scores() const { return scores_; }
  std::vector<double>& scores() { return scores_; }

 private:
  std::size_t index(int r, int c) const {
    assert(r >= 0 && r < height_ && c >= 0 && c < width_);
    return static_cast<std::size_t>(r) * width_ + c;
  }

  int height_;
  int width_;
  std::vector<double> scores_;
};

/// H x W binary labels, 0 = background, 1 = anomaly.
class GroundTruthMask {
 public:
  GroundTruthMask(int height, int width) : height_(height), width_(width) {
    if (height <= 0 || width <= 0) {
      throw std::invalid_argument("GroundTruthMask: dimensions must be positive");
    }
    labels_.assign(static_cast<std::size_t>(height) * width, 0);
  }

  int height() const { return height_; }
  int width() const { return width_; }

  std::uint8_t at(int r, int c) const { return labels_[index(r, c)]; }
  std::uint8_t& at(int r, int c) { return labels_[index(r, c)]; }

  const std::vector<std::uint8_t>& labels() const { return labels_; }

  std::size_t anomaly_count() const {
    std::size_t n = 0;
    for (auto v : labels_) n += (v != 0);
    return n;
  }

 private:
  std::size_t index(int r, int c) const {
    assert(r >= 0 && r < height_ && c >= 0 && c < width_);
    return static_cast<std::size_t>(r) * width_ + c;
  }

  int height_;
  int width_;
  std::vector<std::uint8_t> labels_;
};

namespace detail {

// Symmetric reflection including the edge pixel: index -1 maps to 0, -2 to 1,
// n maps to n-1. Repeats until inside, so the radius may exceed the extent.
inline int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace detail

/// Pads every band plane by `radius` pixels of symmetric reflection.
inline HyperCube pad_symmetric(const HyperCube& cube, int radius) {
  if (radius < 0) {
    throw std::invalid_argument("pad_symmetric: radius must be non-negative");
  }
  const int h = cube.height(), w = cube.width(), nb = cube.bands();
  HyperCube out(h + 2 * radius, w + 2 * radius, nb);
  for (int b = 0; b < nb; ++b) {
    for (int r = -radius; r < h + radius; ++r) {
      const int sr = detail::reflect_index(r, h);
      for (int c = -radius; c < w + radius; ++c) {
        const int sc = detail::reflect_index(c, w);
        out.at(r + radius, c + radius, b) = cube.at(sr, sc, b);
      }
    }
  }
  return out;
}

/// Affine rescale of a map to [0, 1]; a constant map becomes all zeros.
inline DetectionMap minmax_normalize(const DetectionMap& map) {
  double lo = map.scores()[0], hi = map.scores()[0];
  for (double v : map.scores()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  DetectionMap out(map.height(), map.width());
  if (hi > lo) {
    const double scale = hi - lo;
    for (std::size_t i = 0; i < map.size(); ++i) {
      out.scores()[i] = (map.scores()[i] - lo) / scale;
    }
  }
  return out;
}

}  // namespace ssfad
