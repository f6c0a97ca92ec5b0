#pragma once

#include "ssfad/fusion.hpp"
#include "ssfad/spatial.hpp"
#include "ssfad/spectral.hpp"

namespace ssfad {

struct SsfadParams {
  SpectralParams spectral;
  SpatialParams spatial;
  bool adaptive_fusion = true;  // false: average pooling
};

struct SsfadResult {
  DetectionMap fused;
  DetectionMap spectral;
  DetectionMap spatial;
  FusionWeights weights;
};

/// Full SSFAD pipeline: spectral branch R1, spatial branch R2, then adaptive
/// or average-pooling fusion of the normalized maps.
inline SsfadResult ssfad_detect(const HyperCube& cube, const SsfadParams& params,
                                int threads = 0) {
  DetectionMap r1 = spectral_map(cube, params.spectral, threads);
  DetectionMap r2 = spatial_map(cube, params.spatial, threads);
  const FusionWeights weights =
      params.adaptive_fusion ? adaptive_weights(r1, r2) : FusionWeights{0.5, 0.5};
  DetectionMap fused = fuse(r1, r2, weights);
  return {std::move(fused), std::move(r1), std::move(r2), weights};
}

}  // namespace ssfad
