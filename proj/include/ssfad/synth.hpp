#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssfad/raster.hpp"

namespace ssfad {

/// SplitMix64: the fixed PRNG behind scene generation, so identical specs
/// regenerate bit-identical scenes in any implementation.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1): top 53 bits scaled down.
  double next_u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]: mapped away from 0 so log() stays finite.
  double next_u01_positive() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }
};

/// Box-Muller transform of two uniforms in (0, 1].
inline std::pair<double, double> box_muller(double u1, double u2) {
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

inline std::pair<double, double> gauss_pair(SplitMix64& prng) {
  const double u1 = prng.next_u01_positive();
  const double u2 = prng.next_u01_positive();
  return box_muller(u1, u2);
}

/// Hands out standard-normal variates one at a time, drawing Box-Muller
/// pairs and carrying the spare.
class GaussianStream {
 public:
  explicit GaussianStream(SplitMix64& prng) : prng_(prng) {}

  double next() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const auto [a, b] = gauss_pair(prng_);
    spare_ = b;
    return a;
  }

 private:
  SplitMix64& prng_;
  std::optional<double> spare_;
};

struct AnomalyBlockSpec {
  int row = 0;
  int col = 0;
  int size = 1;      // square side length in pixels
  double contrast = 0.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int height = 0;
  int width = 0;
  int bands = 0;
  int n_classes = 1;        // vertical background strips
  double noise_sigma = 0.0;
  std::vector<AnomalyBlockSpec> anomalies;

  void validate() const {
    if (height <= 0 || width <= 0 || bands <= 0) {
      throw std::invalid_argument("SceneSpec: dimensions must be positive");
    }
    if (n_classes <= 0) {
      throw std::invalid_argument("SceneSpec: n_classes must be positive");
    }
    if (!(noise_sigma > 0.0)) {
      throw std::invalid_argument("SceneSpec: noise_sigma must be positive");
    }
    for (std::size_t i = 0; i < anomalies.size(); ++i) {
      const auto& a = anomalies[i];
      if (a.size <= 0) {
        throw std::invalid_argument("SceneSpec: anomaly size must be positive");
      }
      if (a.contrast == 0.0) {
        throw std::invalid_argument("SceneSpec: anomaly contrast must be non-zero");
      }
      if (a.row < 0 || a.col < 0 || a.row + a.size > height ||
          a.col + a.size > width) {
        throw std::invalid_argument("SceneSpec: anomaly block " +
                                    std::to_string(i) + " lies outside the scene");
      }
      for (std::size_t j = 0; j < i; ++j) {
        const auto& o = anomalies[j];
        const bool disjoint = a.row + a.size <= o.row || o.row + o.size <= a.row ||
                              a.col + a.size <= o.col || o.col + o.size <= a.col;
        if (!disjoint) {
          throw std::invalid_argument("SceneSpec: anomaly blocks " +
                                      std::to_string(j) + " and " +
                                      std::to_string(i) + " overlap");
        }
      }
    }
  }
};

/// Deterministic synthetic scene: vertical background strips with one
/// signature per class, square anomaly blocks displaced along a per-block
/// unit direction, i.i.d. Gaussian noise everywhere. Draw order is fixed:
/// class signatures (class-major, band-major), anomaly directions, then
/// pixel noise in row-major, band-major order.
inline std::pair<HyperCube, GroundTruthMask> generate_scene(const SceneSpec& spec) {
  spec.validate();
  SplitMix64 prng(spec.seed);

  std::vector<std::vector<double>> signatures(
      static_cast<std::size_t>(spec.n_classes));
  for (auto& sig : signatures) {
    sig.resize(static_cast<std::size_t>(spec.bands));
    for (double& v : sig) v = 0.2 + 0.6 * prng.next_u01();
  }

  std::vector<std::vector<double>> directions(spec.anomalies.size());
  for (auto& dir : directions) {
    dir.resize(static_cast<std::size_t>(spec.bands));
    GaussianStream g(prng);
    double norm_sq = 0.0;
    for (double& v : dir) {
      v = g.next();
      norm_sq += v * v;
    }
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& v : dir) v *= inv;
    } else {
      dir[0] = 1.0;
    }
  }

  GroundTruthMask mask(spec.height, spec.width);
  std::vector<int> anomaly_of(static_cast<std::size_t>(spec.height) * spec.width, -1);
  for (std::size_t a = 0; a < spec.anomalies.size(); ++a) {
    const auto& blk = spec.anomalies[a];
    for (int r = blk.row; r < blk.row + blk.size; ++r) {
      for (int c = blk.col; c < blk.col + blk.size; ++c) {
        mask.at(r, c) = 1;
        anomaly_of[static_cast<std::size_t>(r) * spec.width + c] = static_cast<int>(a);
      }
    }
  }

  HyperCube cube(spec.height, spec.width, spec.bands);
  GaussianStream noise(prng);
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      const int cls = static_cast<int>(
          static_cast<long long>(c) * spec.n_classes / spec.width);
      const int a = anomaly_of[static_cast<std::size_t>(r) * spec.width + c];
      for (int b = 0; b < spec.bands; ++b) {
        double v = signatures[static_cast<std::size_t>(cls)][static_cast<std::size_t>(b)];
        if (a >= 0) {
          v += spec.anomalies[static_cast<std::size_t>(a)].contrast *
               directions[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
        cube.at(r, c, b) = v + spec.noise_sigma * noise.next();
      }
    }
  }
  return {std::move(cube), std::move(mask)};
}

/// key=value scene file; the `anomaly=row,col,size,contrast` key may repeat.
inline SceneSpec parse_scene_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene spec: " + path.string());
  SceneSpec spec;
  bool have_seed = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!std::getline(ls, key, '=')) continue;
    key.erase(0, key.find_first_not_of(" \t\r"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    if (key.empty()) continue;
    std::string value;
    std::getline(ls, value);
    value.erase(0, value.find_first_not_of(" \t\r"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    try {
      if (key == "seed") {
        spec.seed = std::stoull(value);
        have_seed = true;
      } else if (key == "height") {
        spec.height = std::stoi(value);
      } else if (key == "width") {
        spec.width = std::stoi(value);
      } else if (key == "bands") {
        spec.bands = std::stoi(value);
      } else if (key == "classes") {
        spec.n_classes = std::stoi(value);
      } else if (key == "noise_sigma") {
        spec.noise_sigma = std::stod(value);
      } else if (key == "anomaly") {
        AnomalyBlockSpec blk;
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream vs(value);
        if (!(vs >> blk.row >> c1 >> blk.col >> c2 >> blk.size >> c3 >> blk.contrast) ||
            c1 != ',' || c2 != ',' || c3 != ',') {
          throw std::runtime_error("expected row,col,size,contrast");
        }
        spec.anomalies.push_back(blk);
      } else {
        throw std::runtime_error("unknown key '" + key + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("scene spec " + path.string() + ", key '" + key +
                               "': " + e.what());
    }
  }
  if (!have_seed) {
    throw std::runtime_error("scene spec " + path.string() +
                             " must set seed explicitly");
  }
  return spec;
}

}  // namespace ssfad
