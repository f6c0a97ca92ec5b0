#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssfad/parallel.hpp"
#include "ssfad/raster.hpp"
#include "ssfad/windowing.hpp"

namespace ssfad {

struct SingularCovarianceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Which vector enters the Mahalanobis form for the testing pixel.
enum class TestVectorMode {
  centered,    // y - mean of the outer window
  residual,    // y - its median-mean line projection
  projection,  // the projection itself
};

/// Which spectra feed the saliency angles.
enum class SaliencyInput { original, projected };

/// Whether the local covariance is mean-centered or a raw second moment.
enum class CovarianceMode { centered, second_moment };

struct SpectralParams {
  DualWindowSpec window{5, 3};
  double c = 1.0;        // saliency position-distance constant
  double ridge = 1e-6;   // covariance regularizer, relative to trace/B
  bool clamp_eta = true;
  TestVectorMode test_vector_mode = TestVectorMode::centered;
  SaliencyInput saliency_input = SaliencyInput::original;
  CovarianceMode covariance_mode = CovarianceMode::centered;

  void validate() const {
    window.validate();
    if (c <= 0.0) throw std::invalid_argument("SpectralParams: c must be positive");
    if (ridge < 0.0) throw std::invalid_argument("SpectralParams: ridge must be non-negative");
  }
};

/// The local median-mean line: per-band median and mean of the N outer-window
/// pixels, plus the squared line length that Eq-style projections divide by.
struct LmmlFrame {
  Eigen::VectorXd median;
  Eigen::VectorXd mean;
  double denom = 0.0;  // ||mean - median||^2

  static LmmlFrame from_window(const Eigen::MatrixXd& outer) {
    const auto bands = outer.rows();
    const auto n = outer.cols();
    if (n < 1) throw std::invalid_argument("LmmlFrame: window is empty");
    LmmlFrame frame;
    frame.median.resize(bands);
    frame.mean = outer.rowwise().mean();
    std::vector<double> tmp(static_cast<std::size_t>(n));
    for (Eigen::Index b = 0; b < bands; ++b) {
      for (Eigen::Index i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = outer(b, i);
      auto mid = tmp.begin() + n / 2;
      std::nth_element(tmp.begin(), mid, tmp.end());
      double med = *mid;
      if (n % 2 == 0) {
        // even cardinality: midpoint of the two central order statistics
        med = (med + *std::max_element(tmp.begin(), mid)) / 2.0;
      }
      frame.median(b) = med;
    }
    frame.denom = (frame.mean - frame.median).squaredNorm();
    return frame;
  }

  // Collapse threshold for a (near-)zero-length median-mean line.
  bool degenerate() const {
    return denom < 1e-12 * std::max(1.0, mean.squaredNorm());
  }
};

/// Projects pixel spectra (columns) onto the median-mean line. Returns the
/// projected columns and the position parameters eta. With a degenerate line
/// everything collapses to the mean with eta = 1.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> lmml_project(
    const Eigen::MatrixXd& pixels, const LmmlFrame& frame, bool clamp) {
  if (pixels.rows() != frame.mean.rows()) {
    throw std::invalid_argument("lmml_project: band count mismatch");
  }
  const auto k = pixels.cols();
  Eigen::MatrixXd projections(pixels.rows(), k);
  Eigen::VectorXd etas(k);
  if (frame.degenerate()) {
    projections.colwise() = frame.mean.col(0);
    etas.setOnes();
    return {std::move(projections), std::move(etas)};
  }
  const Eigen::VectorXd line = frame.mean - frame.median;
  for (Eigen::Index i = 0; i < k; ++i) {
    double eta = (pixels.col(i) - frame.median).dot(line) / frame.denom;
    if (clamp) eta = std::clamp(eta, 0.0, 1.0);
    etas(i) = eta;
    // the affine form keeps eta = 0 / eta = 1 exactly on the endpoints
    projections.col(i) = (1.0 - eta) * frame.median + eta * frame.mean;
  }
  return {std::move(projections), std::move(etas)};
}

/// The monotonic-increasing feature enhancement: each ring projection is
/// scaled by its scalar IDW weight, and the gap to the projected testing
/// pixel is shrunk by 1 - exp(-||gap||/2).
inline Eigen::MatrixXd enhance_background(const Eigen::MatrixXd& ring_projections,
                                          const Eigen::VectorXd& test_projection,
                                          const std::vector<double>& idw) {
  if (static_cast<std::size_t>(ring_projections.cols()) != idw.size()) {
    throw std::invalid_argument("enhance_background: ring/weight count mismatch");
  }
  if (ring_projections.rows() != test_projection.rows()) {
    throw std::invalid_argument("enhance_background: band count mismatch");
  }
  Eigen::MatrixXd enhanced(ring_projections.rows(), ring_projections.cols());
  for (Eigen::Index s = 0; s < ring_projections.cols(); ++s) {
    const Eigen::VectorXd gap =
        test_projection - ring_projections.col(s) * idw[static_cast<std::size_t>(s)];
    enhanced.col(s) = (1.0 - std::exp(-0.5 * gap.norm())) * gap;
  }
  return enhanced;
}

/// Covariance of the enhanced background samples (columns), 1/S normalized,
/// plus a trace-relative ridge.
inline Eigen::MatrixXd local_covariance(const Eigen::MatrixXd& samples,
                                        CovarianceMode mode, double ridge) {
  const auto s = samples.cols();
  const auto bands = samples.rows();
  if (s < 1) throw std::invalid_argument("local_covariance: no samples");
  Eigen::MatrixXd sigma;
  if (mode == CovarianceMode::centered) {
    const Eigen::MatrixXd centered = samples.colwise() - samples.rowwise().mean();
    sigma = centered * centered.transpose() / static_cast<double>(s);
  } else {
    sigma = samples * samples.transpose() / static_cast<double>(s);
  }
  if (ridge > 0.0) {
    const double tr = sigma.trace();
    const double ridge_eff = tr > 0.0 ? ridge * tr / static_cast<double>(bands) : ridge;
    sigma.diagonal().array() += ridge_eff;
  }
  return sigma;
}

/// v' Sigma^-1 v via a Cholesky solve; the inverse is never formed.
inline double mahalanobis_score(const Eigen::VectorXd& v,
                                const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != v.rows()) {
    throw std::invalid_argument("mahalanobis_score: dimension mismatch");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw SingularCovarianceError("mahalanobis_score: covariance is singular or indefinite");
  }
  return std::max(v.dot(llt.solve(v)), 0.0);
}

namespace detail {

// Retry contract: on a singular covariance the caller re-regularizes once
// with a stronger ridge, then gives up.
inline double mahalanobis_with_retry(const Eigen::VectorXd& v,
                                     const Eigen::MatrixXd& samples,
                                     CovarianceMode mode, double ridge) {
  try {
    return mahalanobis_score(v, local_covariance(samples, mode, ridge));
  } catch (const SingularCovarianceError&) {
    const double bumped = ridge > 0.0 ? ridge * 1e3 : 1e-6;
    return mahalanobis_score(v, local_covariance(samples, mode, bumped));
  }
}

inline double spectral_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;  // flat spectrum carries no angle
  return std::acos(std::clamp(a.dot(b) / (na * nb), -1.0, 1.0));
}

}  // namespace detail

/// Mean saliency distance between the testing pixel and its inner-window
/// neighbors: spectral angle attenuated by position distance. Defined as 1
/// when there are no inner neighbors.
inline double saliency_weight(const Eigen::VectorXd& test_spectrum,
                              PixelCoord test_coord,
                              const Eigen::MatrixXd& inner_spectra,
                              const std::vector<PixelCoord>& inner_coords,
                              double c) {
  if (static_cast<std::size_t>(inner_spectra.cols()) != inner_coords.size()) {
    throw std::invalid_argument("saliency_weight: spectra/coordinate count mismatch");
  }
  const auto m = inner_spectra.cols();
  if (m == 0) return 1.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d_spe = detail::spectral_angle(inner_spectra.col(i), test_spectrum);
    const double d_pos =
        coord_distance(test_coord, inner_coords[static_cast<std::size_t>(i)]);
    total += d_spe / (1.0 + c * d_pos);
  }
  return total / static_cast<double>(m);
}

/// Spectral branch of SSFAD: LMML projection, IDW feature enhancement, local
/// Mahalanobis score, saliency weighting. Produces detection map R1.
inline DetectionMap spectral_map(const HyperCube& cube,
                                 const SpectralParams& params, int threads = 0) {
  params.validate();
  const int pad = params.window.outer_radius();
  const HyperCube padded = pad_symmetric(cube, pad);
  DetectionMap map(cube.height(), cube.width());

  parallel_for(cube.height(), threads, [&](int r) {
    for (int c = 0; c < cube.width(); ++c) {
      const WindowView view =
          extract_dual_window(padded, {r, c}, params.window, pad);
      const LmmlFrame frame = LmmlFrame::from_window(view.outer);

      const Eigen::VectorXd test_projection =
          lmml_project(view.center, frame, params.clamp_eta).first.col(0);
      const Eigen::MatrixXd ring_projections =
          lmml_project(view.ring, frame, params.clamp_eta).first;

      const std::vector<double> idw = idw_weights(view.center_coord, view.ring_coords);
      const Eigen::MatrixXd enhanced =
          enhance_background(ring_projections, test_projection, idw);

      Eigen::VectorXd test_vector;
      switch (params.test_vector_mode) {
        case TestVectorMode::centered:
          test_vector = view.center - frame.mean;
          break;
        case TestVectorMode::residual:
          test_vector = view.center - test_projection;
          break;
        case TestVectorMode::projection:
          test_vector = test_projection;
          break;
      }
      const double score = detail::mahalanobis_with_retry(
          test_vector, enhanced, params.covariance_mode, params.ridge);

      double w_sal = 1.0;
      if (params.window.inner_count() > 0) {
        if (params.saliency_input == SaliencyInput::original) {
          w_sal = saliency_weight(view.center, view.center_coord, view.inner,
                                  view.inner_coords, params.c);
        } else {
          const Eigen::MatrixXd inner_projections =
              lmml_project(view.inner, frame, params.clamp_eta).first;
          w_sal = saliency_weight(test_projection, view.center_coord,
                                  inner_projections, view.inner_coords, params.c);
        }
      }
      map.at(r, c) = score * w_sal;
    }
  });
  return map;
}

}  // namespace ssfad
