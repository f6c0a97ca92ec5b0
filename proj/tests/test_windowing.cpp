#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <random>
#include <set>

#include "ssfad/windowing.hpp"

using ssfad::DualWindowSpec;
using ssfad::HyperCube;
using ssfad::PixelCoord;

namespace {

HyperCube random_cube(int h, int w, int b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  HyperCube cube(h, w, b);
  for (double& v : cube.data()) v = dist(rng);
  return cube;
}

std::set<std::pair<int, int>> coord_set(const std::vector<PixelCoord>& coords) {
  std::set<std::pair<int, int>> s;
  for (const auto& c : coords) s.insert({c.row, c.col});
  return s;
}

}  // namespace

TEST_CASE("dual window cardinalities", "[windowing]") {
  const DualWindowSpec spec53{5, 3};
  CHECK(spec53.outer_count() == 25);
  CHECK(spec53.ring_count() == 16);
  CHECK(spec53.inner_count() == 8);

  const DualWindowSpec spec31{3, 1};
  CHECK(spec31.ring_count() == 8);
  CHECK(spec31.inner_count() == 0);

  CHECK_THROWS_AS((DualWindowSpec{4, 3}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DualWindowSpec{5, 5}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DualWindowSpec{5, 2}.validate()), std::invalid_argument);
}

TEST_CASE("extract_dual_window matches brute-force enumeration", "[windowing]") {
  for (const DualWindowSpec spec : {DualWindowSpec{5, 3}, DualWindowSpec{7, 3},
                                    DualWindowSpec{9, 5}, DualWindowSpec{3, 1}}) {
    const HyperCube cube = random_cube(12, 11, 3, 99 + spec.omega_out);
    const int pad = spec.outer_radius();
    const HyperCube padded = ssfad::pad_symmetric(cube, pad);
    for (const PixelCoord center : {PixelCoord{0, 0}, PixelCoord{5, 6}, PixelCoord{11, 10}}) {
      const auto view = ssfad::extract_dual_window(padded, center, spec, pad);

      REQUIRE(view.outer_coords.size() == static_cast<std::size_t>(spec.outer_count()));
      REQUIRE(view.ring_coords.size() == static_cast<std::size_t>(spec.ring_count()));
      REQUIRE(view.inner_coords.size() == static_cast<std::size_t>(spec.inner_count()));

      // brute-force double loop over offsets
      std::set<std::pair<int, int>> want_ring, want_inner;
      const int p = spec.outer_radius(), hi = spec.inner_radius();
      for (int dr = -p; dr <= p; ++dr) {
        for (int dc = -p; dc <= p; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const auto key = std::make_pair(center.row + dr, center.col + dc);
          if (std::max(std::abs(dr), std::abs(dc)) <= hi) {
            want_inner.insert(key);
          } else {
            want_ring.insert(key);
          }
        }
      }
      CHECK(coord_set(view.ring_coords) == want_ring);
      CHECK(coord_set(view.inner_coords) == want_inner);

      // ring and inner are disjoint; union plus center covers the outer window
      auto all = coord_set(view.outer_coords);
      CHECK(all.size() == static_cast<std::size_t>(spec.outer_count()));
      std::set<std::pair<int, int>> rebuilt = want_ring;
      rebuilt.insert(want_inner.begin(), want_inner.end());
      rebuilt.insert({center.row, center.col});
      CHECK(all == rebuilt);

      // spectra must match the mirrored source values
      for (std::size_t i = 0; i < view.ring_coords.size(); ++i) {
        const auto& rc = view.ring_coords[i];
        for (int b = 0; b < 3; ++b) {
          REQUIRE(view.ring(b, static_cast<Eigen::Index>(i)) ==
                  padded.at(rc.row + pad, rc.col + pad, b));
        }
      }
    }
  }
}

TEST_CASE("extract_dual_window validates inputs", "[windowing]") {
  const HyperCube cube = random_cube(6, 6, 2, 5);
  const DualWindowSpec spec{5, 3};
  const HyperCube padded = ssfad::pad_symmetric(cube, spec.outer_radius());
  CHECK_THROWS_AS(ssfad::extract_dual_window(padded, {6, 0}, spec, spec.outer_radius()),
                  std::out_of_range);
  CHECK_THROWS_AS(ssfad::extract_dual_window(padded, {0, 0}, spec, 1),
                  std::invalid_argument);
}

TEST_CASE("idw weights from inverse squared distances", "[windowing]") {
  SECTION("two neighbors at distances 1 and 2") {
    const auto w = ssfad::idw_weights({0, 0}, {{0, 1}, {0, 2}});
    CHECK_THAT(w[0], Catch::Matchers::WithinAbs(0.8, 1e-15));
    CHECK_THAT(w[1], Catch::Matchers::WithinAbs(0.2, 1e-15));
  }

  SECTION("four symmetric neighbors share the weight") {
    const auto w = ssfad::idw_weights({5, 5}, {{4, 5}, {6, 5}, {5, 4}, {5, 6}});
    for (double v : w) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.25, 1e-15));
  }

  SECTION("full (5,3) ring: sums to one, matches direct recomputation") {
    const HyperCube cube = random_cube(9, 9, 2, 17);
    const DualWindowSpec spec{5, 3};
    const HyperCube padded = ssfad::pad_symmetric(cube, spec.outer_radius());
    const auto view = ssfad::extract_dual_window(padded, {4, 4}, spec, spec.outer_radius());
    const auto w = ssfad::idw_weights(view.center_coord, view.ring_coords);

    double sum = 0.0;
    for (double v : w) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));

    double denom = 0.0;
    for (const auto& c : view.ring_coords) {
      const double dr = c.row - 4.0, dc = c.col - 4.0;
      denom += 1.0 / (dr * dr + dc * dc);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double dr = view.ring_coords[i].row - 4.0;
      const double dc = view.ring_coords[i].col - 4.0;
      REQUIRE_THAT(w[i], Catch::Matchers::WithinRel(1.0 / (dr * dr + dc * dc) / denom, 1e-14));
    }
  }

  SECTION("translation and permutation invariance") {
    std::vector<ssfad::PixelCoord> neighbors{{1, 2}, {3, 0}, {0, 0}, {2, 2}};
    const auto base = ssfad::idw_weights({1, 1}, neighbors);

    std::vector<ssfad::PixelCoord> shifted;
    for (auto c : neighbors) shifted.push_back({c.row + 7, c.col - 3});
    const auto moved = ssfad::idw_weights({8, -2}, shifted);
    for (std::size_t i = 0; i < base.size(); ++i) REQUIRE(base[i] == moved[i]);

    std::vector<ssfad::PixelCoord> reversed(neighbors.rbegin(), neighbors.rend());
    auto perm = ssfad::idw_weights({1, 1}, reversed);
    std::reverse(perm.begin(), perm.end());
    std::vector<double> sorted_base = base, sorted_perm = perm;
    std::sort(sorted_base.begin(), sorted_base.end());
    std::sort(sorted_perm.begin(), sorted_perm.end());
    CHECK(sorted_base == sorted_perm);
  }

  SECTION("neighbor on the center is rejected") {
    CHECK_THROWS_AS(ssfad::idw_weights({2, 2}, {{2, 2}}), std::invalid_argument);
  }
}
