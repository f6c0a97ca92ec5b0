#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssfad/raster.hpp"

namespace ssfad {

/// ROC points in threshold order: starts at (0,0) under the +inf sentinel
/// threshold, ends at (1,1) at the minimum score. The detection rule is
/// score >= threshold, so tied scores share one threshold.
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;

  std::size_t size() const { return thresholds.size(); }
};

struct ClassStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Boxplot summaries of the two score populations. `interval` is the gap
/// between the anomaly box bottom and the background box top; larger means
/// better separated classes.
struct SeparabilityStats {
  ClassStats anomaly;
  ClassStats background;
  double interval = 0.0;  // q1(anomaly) - q3(background)
};

namespace detail {

inline void require_two_classes(const GroundTruthMask& mask) {
  const std::size_t anomalies = mask.anomaly_count();
  if (anomalies == 0 || anomalies == mask.labels().size()) {
    throw std::invalid_argument("evaluation requires at least one anomaly and one background pixel");
  }
}

inline void require_same_shape(const DetectionMap& map,
                               const GroundTruthMask& mask) {
  if (map.height() != mask.height() || map.width() != mask.width()) {
    throw std::invalid_argument("map and mask shapes differ");
  }
}

// Quantile by linear interpolation at rank q*(n-1) on sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline RocCurve roc_curve(const DetectionMap& map, const GroundTruthMask& mask) {
  detail::require_same_shape(map, mask);
  detail::require_two_classes(mask);

  const std::size_t n = map.size();
  std::vector<std::pair<double, bool>> samples(n);
  std::size_t total_anom = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool anom = mask.labels()[i] != 0;
    samples[i] = {map.scores()[i], anom};
    total_anom += anom;
  }
  const std::size_t total_bg = n - total_anom;
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i].second) {
      ++tp;
    } else {
      ++fp;
    }
    const bool last_of_tie = i + 1 == n || samples[i + 1].first != samples[i].first;
    if (last_of_tie) {
      curve.thresholds.push_back(samples[i].first);
      curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(total_bg));
      curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(total_anom));
    }
  }
  return curve;
}

/// Trapezoidal area under the ROC curve.
inline double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve.fpr[i] - curve.fpr[i - 1]) *
            (curve.tpr[i] + curve.tpr[i - 1]) * 0.5;
  }
  return area;
}

inline double auc(const DetectionMap& map, const GroundTruthMask& mask) {
  return auc(roc_curve(map, mask));
}

inline SeparabilityStats separability_stats(const DetectionMap& map,
                                            const GroundTruthMask& mask) {
  detail::require_same_shape(map, mask);
  detail::require_two_classes(mask);

  std::vector<double> anom, bg;
  for (std::size_t i = 0; i < map.size(); ++i) {
    (mask.labels()[i] != 0 ? anom : bg).push_back(map.scores()[i]);
  }
  std::sort(anom.begin(), anom.end());
  std::sort(bg.begin(), bg.end());

  const auto stats_of = [](const std::vector<double>& sorted) {
    ClassStats s;
    s.min = sorted.front();
    s.q1 = detail::quantile_sorted(sorted, 0.25);
    s.median = detail::quantile_sorted(sorted, 0.5);
    s.q3 = detail::quantile_sorted(sorted, 0.75);
    s.max = sorted.back();
    return s;
  };

  SeparabilityStats out;
  out.anomaly = stats_of(anom);
  out.background = stats_of(bg);
  out.interval = out.anomaly.q1 - out.background.q3;
  return out;
}

inline void write_roc_csv(const RocCurve& curve,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ROC csv: " + path.string());
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << detail::format_full(curve.thresholds[i]) << ','
        << detail::format_full(curve.fpr[i]) << ','
        << detail::format_full(curve.tpr[i]) << '\n';
  }
  if (!out.flush()) throw std::runtime_error("failed to write ROC csv: " + path.string());
}

inline void write_separability_csv(const SeparabilityStats& stats,
                                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stats csv: " + path.string());
  out << "class,min,q1,median,q3,max\n";
  const auto row = [&](const char* name, const ClassStats& s) {
    out << name << ',' << detail::format_full(s.min) << ','
        << detail::format_full(s.q1) << ',' << detail::format_full(s.median)
        << ',' << detail::format_full(s.q3) << ',' << detail::format_full(s.max)
        << '\n';
  };
  row("anomaly", stats.anomaly);
  row("background", stats.background);
  if (!out.flush()) throw std::runtime_error("failed to write stats csv: " + path.string());
}

}  // namespace ssfad
