#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dic/error.hpp"
#include "dic/integer_search.hpp"
#include "dic/rng.hpp"
#include "dic/synth.hpp"
#include "oracles.hpp"

using namespace dic;

namespace {

// Reference shifted by an exact integer amount; the unique correlation peak
// sits at the shift.
struct ShiftPair {
  GrayImage ref;
  GrayImage tgt;
  ShiftPair(int w, int h, std::uint64_t seed, int su, int sv)
      : ref(oracles::speckle(w, h, seed)),
        tgt(synth_warped_pair(ref, [&] {
              WarpSpec warp;
              warp.u = su;
              warp.v = sv;
              return warp;
            }()).first) {}
};

}  // namespace

TEST_CASE("inertia weight schedule endpoints") {
  CHECK(inertia_weight(0, 5) == 0.9);
  CHECK(inertia_weight(5, 5) == 0.4);
  CHECK(inertia_weight(3, 5) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("feasible window is the radius box intersected with the image") {
  const SubsetSpec spec{50, 50, 15};
  const auto win = feasible_window(spec, 100, 100, 25);
  CHECK(win.lo_dx == -25);
  CHECK(win.hi_dx == 25);
  CHECK(win.lo_dy == -25);
  CHECK(win.hi_dy == 25);

  const SubsetSpec edge{16, 50, 15};
  const auto clipped = feasible_window(edge, 100, 100, 25);
  CHECK(clipped.lo_dx == -1);
  CHECK(clipped.hi_dx == 25);

  const SubsetSpec outside{32, 32, 8};
  CHECK_THROWS_WITH_AS(feasible_window(outside, 20, 20, 5),
                       doctest::Contains("no valid search position"), Error);
}

TEST_CASE("bfs finds an exact integer shift in window mode") {
  const ShiftPair pair(100, 100, 17, 3, -2);
  const SubsetSpec spec{50, 50, 15};
  const auto stats = subset_stats(pair.ref, spec);
  SearchConfig cfg;
  cfg.bfs_domain = BfsDomain::window;
  const auto result = bfs_search(stats, pair.tgt, spec, cfg);
  CHECK(result.dx == 3);
  CHECK(result.dy == -2);
  CHECK(result.zncc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.evaluations == 51 * 51);  // radius 25, all positions in bounds
  CHECK(result.generations_used == 0);
}

TEST_CASE("bfs whole-image evaluation count is the fit-position count") {
  const ShiftPair pair(100, 60, 18, 1, 1);
  const SubsetSpec spec{50, 30, 15};
  const auto stats = subset_stats(pair.ref, spec);
  SearchConfig cfg;
  cfg.bfs_domain = BfsDomain::whole_image;
  const auto result = bfs_search(stats, pair.tgt, spec, cfg);
  CHECK(result.evaluations == (100 - 30) * (60 - 30));
  CHECK(result.dx == 1);
  CHECK(result.dy == 1);
}

TEST_CASE("bfs matches the exhaustive oracle on random pairs") {
  for (int trial = 0; trial < 10; ++trial) {
    const GrayImage ref = oracles::speckle(80, 70, 300 + trial);
    WarpSpec warp;
    warp.u = (trial % 5) - 2;
    warp.v = ((trial * 3) % 7) - 3;
    const GrayImage tgt = synth_warped_pair(ref, warp).first;
    const SubsetSpec spec{40, 35, 12};
    const auto stats = subset_stats(ref, spec);

    SearchConfig cfg;
    cfg.bfs_domain = BfsDomain::window;
    cfg.search_radius = 8;
    const auto result = bfs_search(stats, tgt, spec, cfg);
    const auto expected = oracles::bfs_argmax(ref, spec, tgt, -8, 8, -8, 8);
    CHECK(result.dx == expected.dx);
    CHECK(result.dy == expected.dy);
    CHECK(result.evaluations == expected.evaluations);
  }
}

TEST_CASE("bfs ties break toward the smallest (dy, dx)") {
  // Period-8 texture: every displacement that is a multiple of 8 on both axes
  // reproduces the subset exactly.
  std::vector<double> px(32 * 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      px[y * 32 + x] = ((x % 8 < 4) ^ (y % 8 < 4)) ? 200.0 : 50.0;
  const GrayImage img(32, 32, px);
  const SubsetSpec spec{16, 16, 7};
  const auto stats = subset_stats(img, spec);
  SearchConfig cfg;
  cfg.bfs_domain = BfsDomain::window;
  cfg.search_radius = 8;
  const auto result = bfs_search(stats, img, spec, cfg);
  CHECK(result.dx == -8);
  CHECK(result.dy == -8);
  CHECK(result.zncc == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bfs skips degenerate windows without counting them") {
  // Left half of the target is flat; windows fully inside it cannot be
  // normalized and are skipped.
  const GrayImage ref = oracles::speckle(64, 64, 55);
  std::vector<double> px = ref.pixels();
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 36; ++x) px[y * 64 + x] = 100.0;
  const GrayImage tgt(64, 64, std::move(px));

  const SubsetSpec spec{32, 32, 8};
  const auto stats = subset_stats(ref, spec);
  SearchConfig cfg;
  cfg.bfs_domain = BfsDomain::window;
  cfg.search_radius = 10;

  long textured = 0;
  for (int dy = -10; dy <= 10; ++dy)
    for (int dx = -10; dx <= 10; ++dx)
      if (oracles::zncc(ref, spec, tgt, dx, dy).has_value()) ++textured;
  REQUIRE(textured < 21 * 21);

  const auto result = bfs_search(stats, tgt, spec, cfg);
  CHECK(result.evaluations == textured);
}

TEST_CASE("bfs reports when every position is degenerate") {
  const GrayImage ref = oracles::speckle(40, 40, 56);
  const GrayImage flat(40, 40, std::vector<double>(1600, 99.0));
  const SubsetSpec spec{20, 20, 8};
  const auto stats = subset_stats(ref, spec);
  SearchConfig cfg;
  cfg.bfs_domain = BfsDomain::window;
  cfg.search_radius = 5;
  CHECK_THROWS_WITH_AS(bfs_search(stats, flat, spec, cfg),
                       doctest::Contains("degenerate"), Error);
}

TEST_CASE("pso is deterministic for a fixed stream seed") {
  const ShiftPair pair(100, 100, 19, -4, 5);
  const SubsetSpec spec{50, 50, 15};
  const auto stats = subset_stats(pair.ref, spec);
  SearchConfig cfg;

  auto run = [&] {
    CorrelationMemo memo;
    StreamRng rng(derive_stream_seed(42, 0, 0));
    return pso_search(stats, pair.tgt, spec, cfg, memo, rng);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.dx == b.dx);
  CHECK(a.dy == b.dy);
  CHECK(a.zncc == b.zncc);  // bit-identical
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.generations_used == b.generations_used);
}

TEST_CASE("swarm searches respect their evaluation budgets") {
  // Unrelated images: no position clears the stop threshold, so the swarm
  // runs every generation.
  const GrayImage ref = oracles::speckle(100, 100, 61);
  const GrayImage tgt = oracles::speckle(100, 100, 62);
  const SubsetSpec spec{50, 50, 15};
  const auto stats = subset_stats(ref, spec);
  SearchConfig cfg;

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CorrelationMemo memo;
    StreamRng rng(derive_stream_seed(seed, 0, 0));
    const auto pso = pso_search(stats, tgt, spec, cfg, memo, rng);
    CHECK(pso.generations_used == cfg.max_generations);
    CHECK(pso.evaluations <= cfg.particle_count * (cfg.max_generations + 1));
    CHECK(pso.update_evaluations <= cfg.particle_count * cfg.max_generations);

    CorrelationMemo memo2;
    StreamRng rng2(derive_stream_seed(seed, 0, 0));
    const auto mpso = mpso_search(stats, tgt, spec, cfg, memo2, rng2);
    CHECK(mpso.evaluations <= 5 * cfg.particle_count * (cfg.max_generations + 1));
    CHECK(mpso.update_evaluations <= 5 * cfg.particle_count * cfg.max_generations);
  }
}

TEST_CASE("swarm results never beat brute force on the same window") {
  SearchConfig cfg;
  cfg.bfs_domain = BfsDomain::window;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GrayImage ref = oracles::speckle(100, 100, 700 + seed);
    WarpSpec warp;
    warp.u = 2.4;
    warp.v = -3.6;
    const GrayImage tgt = synth_warped_pair(ref, warp).first;
    const SubsetSpec spec{50, 50, 15};
    const auto stats = subset_stats(ref, spec);
    const auto best = bfs_search(stats, tgt, spec, cfg);

    CorrelationMemo memo;
    StreamRng rng(derive_stream_seed(seed, 3, 7));
    const auto pso = pso_search(stats, tgt, spec, cfg, memo, rng);
    CHECK(pso.zncc <= best.zncc + 1e-12);

    CorrelationMemo memo2;
    StreamRng rng2(derive_stream_seed(seed, 3, 7));
    const auto mpso = mpso_search(stats, tgt, spec, cfg, memo2, rng2);
    CHECK(mpso.zncc <= best.zncc + 1e-12);
  }
}

TEST_CASE("all three searchers recover exact integer shifts") {
  int pso_hits = 0, mpso_hits = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const ShiftPair pair(100, 100, 900 + t, 3, -2);
    const SubsetSpec spec{50, 50, 15};
    const auto stats = subset_stats(pair.ref, spec);
    SearchConfig cfg;
    cfg.bfs_domain = BfsDomain::window;

    const auto bfs = bfs_search(stats, pair.tgt, spec, cfg);
    REQUIRE(bfs.dx == 3);
    REQUIRE(bfs.dy == -2);
    REQUIRE(bfs.zncc >= 0.999);

    CorrelationMemo m1;
    StreamRng r1(derive_stream_seed(t, 0, 0));
    const auto pso = pso_search(stats, pair.tgt, spec, cfg, m1, r1);
    if (pso.dx == 3 && pso.dy == -2 && pso.zncc >= 0.999) ++pso_hits;

    CorrelationMemo m2;
    StreamRng r2(derive_stream_seed(t, 0, 0));
    const auto mpso = mpso_search(stats, pair.tgt, spec, cfg, m2, r2);
    if (mpso.dx == 3 && mpso.dy == -2 && mpso.zncc >= 0.999) ++mpso_hits;
  }
  CHECK(pso_hits >= 99);
  CHECK(mpso_hits >= 99);
}

TEST_CASE("identical images can terminate the swarm at initialization") {
  const GrayImage img = oracles::speckle(100, 100, 77);
  const SubsetSpec spec{50, 50, 15};
  const auto stats = subset_stats(img, spec);
  SearchConfig cfg;

  bool found_init_hit = false;
  for (std::uint64_t seed = 0; seed < 200 && !found_init_hit; ++seed) {
    CorrelationMemo memo;
    StreamRng rng(derive_stream_seed(seed, 0, 0));
    const auto result = pso_search(stats, img, spec, cfg, memo, rng);
    if (result.generations_used == 0) {
      found_init_hit = true;
      CHECK(result.zncc >= cfg.stop_threshold);
      CHECK(result.dx == 0);
      CHECK(result.dy == 0);
      CHECK(result.update_evaluations == 0);
    }
  }
  CHECK(found_init_hit);
}

TEST_CASE("star step climbs to the neighborhood peak") {
  const ShiftPair pair(100, 100, 81, 3, 0);
  const SubsetSpec spec{50, 50, 15};
  const auto stats = subset_stats(pair.ref, spec);
  const auto win = feasible_window(spec, 100, 100, 25);

  CorrelationMemo memo;
  const auto [pos, c] = star_best(stats, pair.tgt, spec, win, memo, 2, 0);
  CHECK(pos.first == 3);
  CHECK(pos.second == 0);
  CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(memo.misses() == 5);
}

TEST_CASE("modified swarm needs no more generations than the standard one") {
  int mpso_not_slower = 0;
  const int trials = 30;
  for (int t = 0; t < trials; ++t) {
    const ShiftPair pair(100, 100, 1300 + t, 3, -2);
    const SubsetSpec spec{50, 50, 15};
    const auto stats = subset_stats(pair.ref, spec);
    SearchConfig cfg;

    CorrelationMemo m1;
    StreamRng r1(derive_stream_seed(t, 1, 1));
    const auto pso = pso_search(stats, pair.tgt, spec, cfg, m1, r1);

    CorrelationMemo m2;
    StreamRng r2(derive_stream_seed(t, 1, 1));
    const auto mpso = mpso_search(stats, pair.tgt, spec, cfg, m2, r2);
    if (mpso.generations_used <= pso.generations_used) ++mpso_not_slower;
  }
  CHECK(mpso_not_slower >= trials * 8 / 10);
}
