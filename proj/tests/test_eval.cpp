#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "ssfad/eval.hpp"

using Catch::Matchers::WithinAbs;
using ssfad::DetectionMap;
using ssfad::GroundTruthMask;

namespace {

struct Labeled {
  DetectionMap map;
  GroundTruthMask mask;
};

Labeled labeled_from(const std::vector<double>& scores,
                     const std::vector<int>& labels) {
  const int n = static_cast<int>(scores.size());
  Labeled out{DetectionMap(1, n), GroundTruthMask(1, n)};
  for (int i = 0; i < n; ++i) {
    out.map.at(0, i) = scores[i];
    out.mask.at(0, i) = labels[i] ? 1 : 0;
  }
  return out;
}

Labeled random_labeled(int n, std::uint64_t seed, int distinct = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> score_dist(0.0, 1.0);
  std::bernoulli_distribution label_dist(0.3);
  std::vector<double> scores(static_cast<std::size_t>(n));
  std::vector<int> labels(static_cast<std::size_t>(n));
  bool any_anom = false, any_bg = false;
  for (int i = 0; i < n; ++i) {
    if (distinct > 0) {
      // draw from a small value set to force plenty of ties
      scores[static_cast<std::size_t>(i)] =
          std::floor(score_dist(rng) * distinct) / distinct;
    } else {
      scores[static_cast<std::size_t>(i)] = score_dist(rng);
    }
    labels[static_cast<std::size_t>(i)] = label_dist(rng) ? 1 : 0;
    (labels[static_cast<std::size_t>(i)] ? any_anom : any_bg) = true;
  }
  if (!any_anom) labels[0] = 1;
  if (!any_bg) labels[1] = 0;
  return labeled_from(scores, labels);
}

}  // namespace

TEST_CASE("roc curve on tiny hand cases", "[eval]") {
  SECTION("three pixels") {
    const auto in = labeled_from({0.9, 0.1, 0.2}, {1, 0, 0});
    const auto curve = ssfad::roc_curve(in.map, in.mask);
    REQUIRE(curve.size() == 4);
    CHECK(curve.fpr[0] == 0.0);
    CHECK(curve.tpr[0] == 0.0);
    CHECK(curve.fpr[1] == 0.0);
    CHECK(curve.tpr[1] == 1.0);
    CHECK(curve.fpr[2] == 0.5);
    CHECK(curve.tpr[2] == 1.0);
    CHECK(curve.fpr[3] == 1.0);
    CHECK(curve.tpr[3] == 1.0);
    CHECK(std::isinf(curve.thresholds[0]));
  }

  SECTION("all-equal scores collapse to the diagonal") {
    const auto in = labeled_from({0.4, 0.4, 0.4}, {1, 0, 0});
    const auto curve = ssfad::roc_curve(in.map, in.mask);
    REQUIRE(curve.size() == 2);
    CHECK(curve.fpr[1] == 1.0);
    CHECK(curve.tpr[1] == 1.0);
    CHECK_THAT(ssfad::auc(curve), WithinAbs(0.5, 1e-15));
  }

  SECTION("single-class masks are rejected") {
    const auto in = labeled_from({0.1, 0.2}, {1, 1});
    CHECK_THROWS_AS(ssfad::roc_curve(in.map, in.mask), std::invalid_argument);
  }
}

TEST_CASE("roc curve matches brute-force threshold counting", "[eval]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto in = random_labeled(200, 6000 + seed, seed % 2 ? 17 : 0);
    const auto curve = ssfad::roc_curve(in.map, in.mask);
    const auto brute =
        oracles::brute_force_roc(in.map.scores(),
                                 std::vector<int>(in.mask.labels().begin(),
                                                  in.mask.labels().end()));
    REQUIRE(curve.size() == brute.size());
    for (std::size_t i = 0; i < brute.size(); ++i) {
      REQUIRE(curve.thresholds[i] == brute[i].threshold);
      REQUIRE(curve.fpr[i] == brute[i].fpr);
      REQUIRE(curve.tpr[i] == brute[i].tpr);
    }
    // monotone, bounded point count
    for (std::size_t i = 1; i < curve.size(); ++i) {
      REQUIRE(curve.fpr[i] >= curve.fpr[i - 1]);
      REQUIRE(curve.tpr[i] >= curve.tpr[i - 1]);
    }
    REQUIRE(curve.size() <= in.map.size() + 2);
  }
}

TEST_CASE("auc equals the mann-whitney statistic", "[eval]") {
  SECTION("perfect separation scores one") {
    const auto in = labeled_from({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0});
    CHECK(ssfad::auc(in.map, in.mask) == 1.0);
  }

  SECTION("random scores with and without ties") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto in = random_labeled(120, 7000 + seed, seed % 3 ? 11 : 0);
      const double got = ssfad::auc(in.map, in.mask);
      const double want = oracles::mann_whitney_auc(
          in.map.scores(), std::vector<int>(in.mask.labels().begin(),
                                            in.mask.labels().end()));
      REQUIRE_THAT(got, WithinAbs(want, 1e-12));
    }
  }
}

TEST_CASE("auc is a rank statistic", "[eval]") {
  const auto in = random_labeled(150, 12345);
  const double base = ssfad::auc(in.map, in.mask);

  SECTION("invariant under strictly increasing transforms") {
    DetectionMap expd(1, 150), affine(1, 150);
    for (int i = 0; i < 150; ++i) {
      expd.at(0, i) = std::exp(in.map.at(0, i));
      affine.at(0, i) = 5.0 * in.map.at(0, i) + 3.0;
    }
    CHECK_THAT(ssfad::auc(expd, in.mask), WithinAbs(base, 1e-12));
    CHECK_THAT(ssfad::auc(affine, in.mask), WithinAbs(base, 1e-12));
  }

  SECTION("negating the scores flips the curve") {
    DetectionMap negated(1, 150);
    for (int i = 0; i < 150; ++i) negated.at(0, i) = -in.map.at(0, i);
    CHECK_THAT(ssfad::auc(negated, in.mask) + base, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("separability stats", "[eval]") {
  SECTION("exact quartile ranks") {
    const auto in = labeled_from({1, 2, 3, 4, 5, 0}, {1, 1, 1, 1, 1, 0});
    const auto stats = ssfad::separability_stats(in.map, in.mask);
    CHECK(stats.anomaly.min == 1.0);
    CHECK(stats.anomaly.q1 == 2.0);
    CHECK(stats.anomaly.median == 3.0);
    CHECK(stats.anomaly.q3 == 4.0);
    CHECK(stats.anomaly.max == 5.0);
  }

  SECTION("clean separation yields interval one") {
    const auto in = labeled_from({0, 0, 0, 1, 1, 1}, {0, 0, 0, 1, 1, 1});
    const auto stats = ssfad::separability_stats(in.map, in.mask);
    CHECK(stats.interval == 1.0);
  }

  SECTION("random classes match the sort-and-index oracle") {
    const auto in = random_labeled(101, 2222);
    const auto stats = ssfad::separability_stats(in.map, in.mask);
    std::vector<double> anom, bg;
    for (int i = 0; i < 101; ++i) {
      (in.mask.at(0, i) ? anom : bg).push_back(in.map.at(0, i));
    }
    CHECK(stats.anomaly.q1 == oracles::quantile_by_rank(anom, 0.25));
    CHECK(stats.anomaly.median == oracles::quantile_by_rank(anom, 0.5));
    CHECK(stats.anomaly.q3 == oracles::quantile_by_rank(anom, 0.75));
    CHECK(stats.background.q1 == oracles::quantile_by_rank(bg, 0.25));
    CHECK(stats.background.q3 == oracles::quantile_by_rank(bg, 0.75));
    CHECK(stats.interval == stats.anomaly.q1 - stats.background.q3);
    CHECK(stats.anomaly.min <= stats.anomaly.q1);
    CHECK(stats.anomaly.q1 <= stats.anomaly.median);
    CHECK(stats.anomaly.median <= stats.anomaly.q3);
    CHECK(stats.anomaly.q3 <= stats.anomaly.max);
  }
}

TEST_CASE("csv writers emit the documented headers", "[eval]") {
  const auto dir = oracles::make_temp_dir("ssfad_eval_");
  const auto in = labeled_from({0.9, 0.1, 0.2}, {1, 0, 0});

  ssfad::write_roc_csv(ssfad::roc_curve(in.map, in.mask), dir / "roc.csv");
  std::ifstream roc(dir / "roc.csv");
  std::string line;
  std::getline(roc, line);
  CHECK(line == "threshold,fpr,tpr");
  std::getline(roc, line);
  CHECK(line == "inf,0,0");

  ssfad::write_separability_csv(ssfad::separability_stats(in.map, in.mask),
                                dir / "stats.csv");
  std::ifstream stats(dir / "stats.csv");
  std::getline(stats, line);
  CHECK(line == "class,min,q1,median,q3,max");
  std::getline(stats, line);
  CHECK(line.substr(0, 8) == "anomaly,");
  std::filesystem::remove_all(dir);
}
