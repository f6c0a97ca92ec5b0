// Command-line front end for the SSFAD detector library: synthesize scenes,
// run detectors, evaluate maps against ground truth, and sweep window sizes.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssfad/ssfad.hpp"

namespace {

struct Range {
  int start = 0;
  int stop = 0;
  int step = 1;

  std::vector<int> values() const {
    std::vector<int> out;
    for (int v = start; v <= stop; v += step) out.push_back(v);
    return out;
  }
};

Range parse_range(const std::string& text) {
  Range r;
  const auto c1 = text.find(':');
  try {
    if (c1 == std::string::npos) {
      r.start = r.stop = std::stoi(text);
      return r;
    }
    r.start = std::stoi(text.substr(0, c1));
    const auto rest = text.substr(c1 + 1);
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) {
      r.stop = std::stoi(rest);
    } else {
      r.stop = std::stoi(rest.substr(0, c2));
      r.step = std::stoi(rest.substr(c2 + 1));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("range", "expected start[:stop[:step]], got '" + text + "'");
  }
  if (r.step < 1 || r.stop < r.start) {
    throw CLI::ValidationError("range", "invalid range '" + text + "'");
  }
  return r;
}

const std::map<std::string, ssfad::TestVectorMode> kTestVectorModes{
    {"centered", ssfad::TestVectorMode::centered},
    {"residual", ssfad::TestVectorMode::residual},
    {"projection", ssfad::TestVectorMode::projection},
};
const std::map<std::string, ssfad::SaliencyInput> kSaliencyInputs{
    {"original", ssfad::SaliencyInput::original},
    {"projected", ssfad::SaliencyInput::projected},
};
const std::map<std::string, ssfad::CovarianceMode> kCovarianceModes{
    {"centered", ssfad::CovarianceMode::centered},
    {"second_moment", ssfad::CovarianceMode::second_moment},
};

struct DetectOptions {
  std::string cube_path;
  std::string method = "ssfad";
  int wout = 5;
  int win = 3;
  std::optional<int> omega;  // defaults to win
  std::string fusion = "adaptive";
  double ridge = 1e-6;
  std::string test_vector = "centered";
  std::string saliency_input = "original";
  std::string cov_mode = "centered";
  int threads = 0;

  ssfad::SpectralParams spectral_params() const {
    ssfad::SpectralParams p;
    p.window = {wout, win};
    p.ridge = ridge;
    p.test_vector_mode = kTestVectorModes.at(test_vector);
    p.saliency_input = kSaliencyInputs.at(saliency_input);
    p.covariance_mode = kCovarianceModes.at(cov_mode);
    return p;
  }

  ssfad::SpatialParams spatial_params() const { return {omega.value_or(win)}; }
};

void add_mode_flags(CLI::App* cmd, DetectOptions& opt) {
  cmd->add_option("--wout", opt.wout, "Outer window size (odd)")->capture_default_str();
  cmd->add_option("--win", opt.win, "Inner window size (odd)")->capture_default_str();
  cmd->add_option("--omega", opt.omega, "Spatial patch size (odd, default: --win)");
  cmd->add_option("--fusion", opt.fusion, "Fusion strategy")
      ->check(CLI::IsMember({"adaptive", "average"}))
      ->capture_default_str();
  cmd->add_option("--ridge", opt.ridge, "Covariance ridge (relative to trace/B)")
      ->capture_default_str();
  cmd->add_option("--test-vector", opt.test_vector, "Mahalanobis test vector mode")
      ->check(CLI::IsMember({"centered", "residual", "projection"}))
      ->capture_default_str();
  cmd->add_option("--saliency-input", opt.saliency_input, "Spectra used for saliency angles")
      ->check(CLI::IsMember({"original", "projected"}))
      ->capture_default_str();
  cmd->add_option("--cov-mode", opt.cov_mode, "Local covariance mode")
      ->check(CLI::IsMember({"centered", "second_moment"}))
      ->capture_default_str();
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
}

ssfad::DetectionMap run_method(const ssfad::HyperCube& cube, const DetectOptions& opt,
                               bool print_weights) {
  if (opt.method == "ssfad") {
    ssfad::SsfadParams params{opt.spectral_params(), opt.spatial_params(),
                              opt.fusion == "adaptive"};
    const ssfad::SsfadResult result = ssfad::ssfad_detect(cube, params, opt.threads);
    if (print_weights) {
      std::printf("fusion weights: a=%.6f b=%.6f\n", result.weights.a,
                  result.weights.b);
    }
    return result.fused;
  }
  if (opt.method == "ssfad-spectral") {
    return ssfad::spectral_map(cube, opt.spectral_params(), opt.threads);
  }
  if (opt.method == "ssfad-spatial") {
    return ssfad::spatial_map(cube, opt.spatial_params(), opt.threads);
  }
  if (opt.method == "grx") {
    return ssfad::grx_map(cube, opt.ridge, opt.threads);
  }
  if (opt.method == "lrx") {
    return ssfad::lrx_map(cube, {opt.wout, opt.win}, opt.ridge, opt.threads);
  }
  throw std::invalid_argument("unknown method '" + opt.method + "'");
}

int cmd_detect(const DetectOptions& opt, const std::string& out_path,
               const std::string& preview_path) {
  const ssfad::HyperCube cube = ssfad::load_cube(opt.cube_path);
  const ssfad::DetectionMap map = run_method(cube, opt, /*print_weights=*/true);
  ssfad::save_map(map, out_path);
  if (!preview_path.empty()) {
    ssfad::save_map_preview_pgm(map, preview_path);
  }
  return 0;
}

int cmd_eval(const std::string& map_path, const std::string& mask_path,
             const std::string& roc_path, const std::string& stats_path) {
  const ssfad::DetectionMap map = ssfad::load_map(map_path);
  const ssfad::GroundTruthMask mask =
      ssfad::load_mask(mask_path, std::make_pair(map.height(), map.width()));
  const ssfad::RocCurve curve = ssfad::roc_curve(map, mask);
  const double area = ssfad::auc(curve);
  const ssfad::SeparabilityStats stats = ssfad::separability_stats(map, mask);
  ssfad::write_roc_csv(curve, roc_path);
  ssfad::write_separability_csv(stats, stats_path);
  std::printf("AUC (%%): %.3f\n", area * 100.0);
  std::printf("separability interval: %.17g\n", stats.interval);
  return 0;
}

int cmd_synth(const ssfad::SceneSpec& spec, const std::string& out_prefix,
              ssfad::CubeDType dtype) {
  const auto [cube, mask] = ssfad::generate_scene(spec);
  ssfad::save_cube(cube, out_prefix + ".hdr", dtype);
  ssfad::save_mask_pgm(mask, out_prefix + "_mask.pgm");
  std::printf("wrote %s.hdr, %s.raw, %s_mask.pgm\n", out_prefix.c_str(),
              out_prefix.c_str(), out_prefix.c_str());
  return 0;
}

int cmd_sweep(DetectOptions opt, const std::string& mask_path,
              const std::string& wout_range, const std::string& win_range,
              const std::string& out_csv) {
  if (opt.method != "ssfad" && opt.method != "ssfad-spectral" && opt.method != "lrx") {
    throw std::invalid_argument("sweep supports methods with dual windows: ssfad, ssfad-spectral, lrx");
  }
  const ssfad::HyperCube cube = ssfad::load_cube(opt.cube_path);
  const ssfad::GroundTruthMask mask =
      ssfad::load_mask(mask_path, std::make_pair(cube.height(), cube.width()));

  const auto wouts = parse_range(wout_range).values();
  const auto wins = parse_range(win_range).values();

  std::ofstream csv(out_csv);
  if (!csv) throw std::runtime_error("cannot write sweep csv: " + out_csv);
  csv << "wout,win,auc\n";

  int best_wout = 0, best_win = 0;
  double best_auc = -1.0;
  int evaluated = 0;
  for (int wout : wouts) {
    for (int win : wins) {
      ssfad::DualWindowSpec spec{wout, win};
      try {
        spec.validate();
      } catch (const std::invalid_argument&) {
        continue;  // skip invalid pairs, e.g. win >= wout or even sizes
      }
      opt.wout = wout;
      opt.win = win;
      const ssfad::DetectionMap map = run_method(cube, opt, /*print_weights=*/false);
      const double area = ssfad::auc(map, mask);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", area);
      csv << wout << ',' << win << ',' << buf << '\n';
      ++evaluated;
      if (area > best_auc) {
        best_auc = area;
        best_wout = wout;
        best_win = win;
      }
    }
  }
  if (evaluated == 0) {
    throw std::invalid_argument("sweep ranges contain no valid (wout, win) pair");
  }
  if (!csv.flush()) throw std::runtime_error("failed to write sweep csv: " + out_csv);
  std::printf("best: wout=%d win=%d auc=%.17g\n", best_wout, best_win, best_auc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SSFAD spectral-spatial fusion anomaly detection"};
  app.require_subcommand(1);

  // detect
  DetectOptions det;
  std::string det_out, det_preview;
  auto* detect = app.add_subcommand("detect", "Run a detector on a cube and write a score map");
  detect->add_option("--cube", det.cube_path, "Cube header file")->required();
  detect->add_option("--method", det.method, "Detector")
      ->check(CLI::IsMember({"ssfad", "ssfad-spectral", "ssfad-spatial", "grx", "lrx"}))
      ->capture_default_str();
  detect->add_option("--out", det_out, "Output map header path")->required();
  detect->add_option("--preview", det_preview, "Optional PGM preview path");
  add_mode_flags(detect, det);

  // eval
  std::string eval_map, eval_mask, eval_roc, eval_stats;
  auto* eval = app.add_subcommand("eval", "Score a detection map against ground truth");
  eval->add_option("--map", eval_map, "Detection map header")->required();
  eval->add_option("--mask", eval_mask, "Ground-truth mask (PGM or raw header)")->required();
  eval->add_option("--roc-out", eval_roc, "ROC curve CSV output")->required();
  eval->add_option("--stats-out", eval_stats, "Separability CSV output")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic scene");
  std::string synth_spec_file, synth_prefix, synth_dtype = "float64";
  std::optional<std::uint64_t> synth_seed;
  int synth_h = 0, synth_w = 0, synth_b = 0, synth_classes = 3;
  double synth_noise = 0.02;
  std::vector<std::string> synth_anomalies;
  synth->add_option("--spec", synth_spec_file, "Scene spec file (key=value)");
  synth->add_option("--seed", synth_seed, "PRNG seed (required unless --spec sets it)");
  synth->add_option("--height", synth_h, "Scene height");
  synth->add_option("--width", synth_w, "Scene width");
  synth->add_option("--bands", synth_b, "Spectral bands");
  synth->add_option("--classes", synth_classes, "Background strip count")->capture_default_str();
  synth->add_option("--noise-sigma", synth_noise, "Gaussian noise sigma")->capture_default_str();
  synth->add_option("--anomaly", synth_anomalies,
                    "Anomaly block row,col,size,contrast (repeatable)");
  synth->add_option("--out-prefix", synth_prefix, "Output path prefix")->required();
  synth->add_option("--dtype", synth_dtype, "Cube on-disk scalar type")
      ->check(CLI::IsMember({"float32", "float64"}))
      ->capture_default_str();

  // sweep
  DetectOptions swp;
  std::string swp_mask, swp_wout = "5:25:2", swp_win = "3:15:2", swp_out;
  auto* sweep = app.add_subcommand("sweep", "Grid-search window sizes against ground truth");
  sweep->add_option("--cube", swp.cube_path, "Cube header file")->required();
  sweep->add_option("--mask", swp_mask, "Ground-truth mask")->required();
  sweep->add_option("--method", swp.method, "Detector (ssfad, ssfad-spectral, lrx)")
      ->capture_default_str();
  sweep->add_option("--wout", swp_wout, "Outer range start[:stop[:step]]")->capture_default_str();
  sweep->add_option("--win", swp_win, "Inner range start[:stop[:step]]")->capture_default_str();
  sweep->add_option("--out", swp_out, "Sweep CSV output")->required();
  sweep->add_option("--fusion", swp.fusion, "Fusion strategy for ssfad")
      ->check(CLI::IsMember({"adaptive", "average"}))
      ->capture_default_str();
  sweep->add_option("--ridge", swp.ridge, "Covariance ridge")->capture_default_str();
  sweep->add_option("--threads", swp.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed()) {
      return cmd_detect(det, det_out, det_preview);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_map, eval_mask, eval_roc, eval_stats);
    }
    if (synth->parsed()) {
      ssfad::SceneSpec spec;
      if (!synth_spec_file.empty()) {
        spec = ssfad::parse_scene_spec_file(synth_spec_file);
        if (synth_seed) spec.seed = *synth_seed;
      } else {
        if (!synth_seed) {
          throw std::invalid_argument("--seed is required (no implicit seed)");
        }
        spec.seed = *synth_seed;
        spec.height = synth_h;
        spec.width = synth_w;
        spec.bands = synth_b;
        spec.n_classes = synth_classes;
        spec.noise_sigma = synth_noise;
        for (const auto& text : synth_anomalies) {
          ssfad::AnomalyBlockSpec blk;
          char c1 = 0, c2 = 0, c3 = 0;
          std::istringstream vs(text);
          if (!(vs >> blk.row >> c1 >> blk.col >> c2 >> blk.size >> c3 >> blk.contrast) ||
              c1 != ',' || c2 != ',' || c3 != ',') {
            throw std::invalid_argument("--anomaly expects row,col,size,contrast, got '" +
                                        text + "'");
          }
          spec.anomalies.push_back(blk);
        }
      }
      return cmd_synth(spec, synth_prefix,
                       synth_dtype == "float32" ? ssfad::CubeDType::float32
                                                : ssfad::CubeDType::float64);
    }
    if (sweep->parsed()) {
      return cmd_sweep(swp, swp_mask, swp_wout, swp_win, swp_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
