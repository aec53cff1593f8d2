#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dyadic.hpp"

using namespace ucprop;

namespace {

Cube unit_root2() { return Cube{{0.5, 0.5, 0}, 1.0, 2}; }

Grid aligned_grid2(int cells) {
  // nodes at cell corners of the unit square, so rank-k cubes with
  // 2^k | cells have exact half-open node counts
  return Grid(2, {cells + 1, cells + 1, 1}, 1.0 / cells, {0, 0, 0});
}

// random antichain of cubes of rank <= max_rank (n = 2)
CubeFamily random_antichain(std::mt19937_64& rng, int max_rank) {
  Cube root = unit_root2();
  std::vector<DyadicCube> cubes;
  std::uniform_int_distribution<int> rank_dist(0, max_rank);
  std::uniform_int_distribution<int> child(0, 3);
  int count = 1 + static_cast<int>(rng() % 6);
  for (int i = 0; i < count; ++i) {
    int r = rank_dist(rng);
    std::vector<std::uint8_t> p(r);
    for (int j = 0; j < r; ++j) p[j] = static_cast<std::uint8_t>(child(rng));
    DyadicCube c(root, p);
    bool comparable = false;
    for (const auto& o : cubes)
      if (o.contains(c) || c.contains(o)) comparable = true;
    if (!comparable) cubes.push_back(c);
  }
  if (cubes.empty()) cubes.emplace_back(root, std::vector<std::uint8_t>{0});
  return CubeFamily(root, std::move(cubes));
}

bool same_family(const CubeFamily& a, const CubeFamily& b) {
  if (a.size() != b.size()) return false;
  auto ca = a.cubes();
  auto cb = b.cubes();
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  return std::equal(ca.begin(), ca.end(), cb.begin());
}

}  // namespace

TEST_CASE("dyadic geometry follows the path") {
  Cube root = unit_root2();
  DyadicCube q(root, {0});  // lower-left quadrant
  Cube geo = q.geometry();
  CHECK(geo.side == doctest::Approx(0.5));
  CHECK(geo.center[0] == doctest::Approx(0.25));
  CHECK(geo.center[1] == doctest::Approx(0.25));
  DyadicCube qq = q.child(3);  // upper-right of lower-left
  Cube geo2 = qq.geometry();
  CHECK(geo2.side == doctest::Approx(0.25));
  CHECK(geo2.center[0] == doctest::Approx(0.375));
  CHECK(geo2.center[1] == doctest::Approx(0.375));
  CHECK(qq.parent() == q);
  CHECK(q.parent().is_root());
  CHECK(q.parent().parent().is_root());
  CHECK(qq.measure() == doctest::Approx(1.0 / 16));
}

TEST_CASE("filled_ratio node counting") {
  Grid g = aligned_grid2(32);
  Cube root = unit_root2();
  DyadicCube rootc(root, {});

  SUBCASE("full set gives 1, empty gives 0") {
    RegionMask full(g, true), empty(g);
    CHECK(filled_ratio(rootc, full) == 1.0);
    CHECK(filled_ratio(DyadicCube(root, {2, 1}), full) == 1.0);
    CHECK(filled_ratio(rootc, empty) == 0.0);
  }
  SUBCASE("one quadrant fills a quarter of the root") {
    RegionMask quad = box_mask(g, {0, 0, 0}, {0.5 - 1e-9, 0.5 - 1e-9, 0});
    CHECK(filled_ratio(rootc, quad) == doctest::Approx(0.25).epsilon(0.02));
    CHECK(filled_ratio(DyadicCube(root, {0}), quad) ==
          doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("sub-cell cube is a resolution error") {
    DyadicCube tiny(root, std::vector<std::uint8_t>(6, 0));  // side 1/64 < h
    RegionMask full(g, true);
    CHECK_THROWS_AS(filled_ratio(tiny, full), resolution_error);
  }
}

TEST_CASE("maximal_filled_cubes") {
  Grid g = aligned_grid2(64);
  Cube root = unit_root2();
  DyadicCube rootc(root, {});
  // set = strict interior of quadrant (1) so ratios are exact at rank 0/1
  RegionMask quad = box_mask(g, {0, 0, 0}, {0.5 - 1e-9, 0.5 - 1e-9, 0});

  SUBCASE("full set gives the root") {
    RegionMask full(g, true);
    auto fam = maximal_filled_cubes(rootc, full, 0.9, 4);
    REQUIRE(fam.size() == 1);
    CHECK(fam.cubes()[0].is_root());
  }
  SUBCASE("quadrant with beta 1/2 selects the quadrant") {
    auto fam = maximal_filled_cubes(rootc, quad, 0.5, 4);
    REQUIRE(fam.size() == 1);
    CHECK(fam.cubes()[0].path() == std::vector<std::uint8_t>{0});
  }
  SUBCASE("quadrant with beta 0.2 selects the root") {
    auto fam = maximal_filled_cubes(rootc, quad, 0.2, 4);
    REQUIRE(fam.size() == 1);
    CHECK(fam.cubes()[0].is_root());
  }
  SUBCASE("result is an antichain with filled members") {
    RegionMask blob = ball_mask(g, {0.3, 0.7, 0}, 0.22);
    auto fam = maximal_filled_cubes(rootc, blob, 0.6, 4);
    CHECK(fam.is_antichain());
    for (const auto& c : fam.cubes()) CHECK(filled_ratio(c, blob) > 0.6);
  }
}

TEST_CASE("nadirashvili_step base cases") {
  Cube root = unit_root2();

  SUBCASE("root family fires case II immediately") {
    CubeFamily fam(root, {DyadicCube(root, {})});
    auto res = nadirashvili_step(fam, 0.7);
    CHECK(res.step_case == StepCase::II);
    CHECK(res.family1.is_root_only());
  }
  SUBCASE("single quadrant, beta = 1/2 gives case I with E1 = Q0") {
    CubeFamily fam(root, {DyadicCube(root, {0})});
    auto res = nadirashvili_step(fam, 0.5);
    CHECK(res.step_case == StepCase::I);
    CHECK(res.family1.is_root_only());
    CHECK(res.e1_measure == doctest::Approx(1.0));
    CHECK(res.e1_measure >= 2.0 * res.e_measure);
  }
  SUBCASE("single quadrant, beta = 0.2 gives case II") {
    CubeFamily fam(root, {DyadicCube(root, {0})});
    auto res = nadirashvili_step(fam, 0.2);
    CHECK(res.step_case == StepCase::II);
    CHECK(res.family1.is_root_only());
    // beta^{-1} |E| = 1.25 > 1 = |Q0|
    CHECK(res.e_measure / 0.2 > 1.0);
  }
  SUBCASE("non-antichain input is rejected") {
    CubeFamily bad(root, {DyadicCube(root, {0}), DyadicCube(root, {0, 1})});
    CHECK_THROWS_AS(nadirashvili_step(bad, 0.5), contract_error);
  }
}

TEST_CASE("nadirashvili_step matches brute force on random antichains") {
  std::mt19937_64 rng(271828);
  for (int trial = 0; trial < 500; ++trial) {
    CubeFamily fam = random_antichain(rng, 3);
    double beta = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    auto fast = nadirashvili_step(fam, beta);
    auto slow = nadirashvili_step_bruteforce(fam, beta, 4);
    CHECK(same_family(fast.covered, slow.covered));
    CHECK(same_family(fast.family1, slow.family1));
    CHECK(fast.step_case == slow.step_case);
    // dichotomy holds in every case
    if (fast.step_case == StepCase::I)
      CHECK(fast.e1_measure >= fast.e_measure / beta - 1e-12);
    else
      CHECK(fast.e_measure / beta > 1.0 - 1e-12);
  }
}

TEST_CASE("iterate_families") {
  Cube root = unit_root2();

  SUBCASE("root input terminates with N = 0") {
    CubeFamily fam(root, {DyadicCube(root, {})});
    auto tr = iterate_families(fam, 0.5);
    CHECK(tr.steps == 0);
    CHECK(tr.trace.size() == 1);
  }
  SUBCASE("single quadrant at beta 1/2 takes one step") {
    CubeFamily fam(root, {DyadicCube(root, {0})});
    auto tr = iterate_families(fam, 0.5);
    CHECK(tr.steps == 1);
    REQUIRE(tr.trace.size() == 2);
    CHECK(tr.trace.back().is_root_only());
  }
  SUBCASE("measures grow geometrically in case I") {
    // three rank-2 cubes inside distinct rank-1 cubes
    CubeFamily fam(root, {DyadicCube(root, {0, 3}), DyadicCube(root, {1, 0}),
                          DyadicCube(root, {2, 2})});
    auto tr = iterate_families(fam, 0.5);
    CHECK(tr.trace.back().is_root_only());
    for (int j = 1; j <= tr.steps; ++j) {
      bool final_step = (j == tr.steps);
      if (!final_step)
        CHECK(tr.measures[j] >= std::pow(2.0, j) * tr.measures[0] - 1e-12);
    }
  }
}

TEST_CASE("mask_to_cubes covers the mask interior exactly") {
  Grid g = aligned_grid2(64);
  Cube root = unit_root2();
  RegionMask quad = box_mask(g, {0, 0, 0}, {0.5 - 1e-9, 0.5 - 1e-9, 0});
  auto fam = mask_to_cubes(root, quad);
  CHECK(fam.is_antichain());
  REQUIRE(!fam.empty());
  // every returned cube is fully inside the mask
  for (const auto& c : fam.cubes()) CHECK(filled_ratio(c, quad) == 1.0);
  // union reaches most of the quadrant
  double u = 0;
  for (const auto& c : fam.cubes()) u += c.measure();
  CHECK(u >= 0.2);
}

TEST_CASE("family serialization round-trips") {
  Cube root = unit_root2();
  CubeFamily fam(root, {DyadicCube(root, {0, 3}), DyadicCube(root, {2})});
  std::string path = "test_family_roundtrip.txt";
  save_family(fam, path);
  CubeFamily back = load_family(path);
  CHECK(same_family(fam, back));
  CHECK(back.root().side == doctest::Approx(root.side));
  std::remove(path.c_str());
}
