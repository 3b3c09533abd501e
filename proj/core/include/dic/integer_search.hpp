#pragma once

#include <cstdint>
#include <utility>

#include "dic/correlation.hpp"
#include "dic/image.hpp"
#include "dic/rng.hpp"

namespace dic {

enum class BfsDomain { window, whole_image };

struct SearchConfig {
  int search_radius = 25;
  BfsDomain bfs_domain = BfsDomain::whole_image;
  int particle_count = 50;
  int max_generations = 5;
  double stop_threshold = 0.995;
  double c1 = 2.0;
  double c2 = 2.0;
  std::uint64_t rng_seed = 0;
};

struct IntegerResult {
  int dx = 0;
  int dy = 0;
  double zncc = -2.0;
  long evaluations = 0;         // distinct correlation computations, total
  long update_evaluations = 0;  // distinct computations after the init sweep
  int generations_used = 0;
};

// Inclusive displacement bounds within which the displaced subset stays inside
// the target image.
struct DispWindow {
  int lo_dx = 0, hi_dx = 0, lo_dy = 0, hi_dy = 0;
  bool contains(int dx, int dy) const {
    return dx >= lo_dx && dx <= hi_dx && dy >= lo_dy && dy <= hi_dy;
  }
};

// +/- radius around the reference position, intersected with the in-bounds
// constraint. Throws when no displaced position is valid.
DispWindow feasible_window(const SubsetSpec& spec, int image_width,
                           int image_height, int radius);

// Every position where the subset fits, independent of radius.
DispWindow whole_image_window(const SubsetSpec& spec, int image_width,
                              int image_height);

// Decaying inertia weight; t is the update-generation index.
double inertia_weight(int t, int max_generations);

// Exhaustive argmax over the configured domain. Ties break toward the
// lexicographically smallest (dy, dx). Degenerate target windows are skipped
// and not counted as evaluations.
IntegerResult bfs_search(const SubsetStats& ref_stats, const GrayImage& target,
                         const SubsetSpec& spec, const SearchConfig& cfg);

// Particle swarm over the feasible window. All randomness comes from `rng`,
// which callers derive per (seed, pair, subset); results are reproducible
// bit-for-bit regardless of scheduling.
IntegerResult pso_search(const SubsetStats& ref_stats, const GrayImage& target,
                         const SubsetSpec& spec, const SearchConfig& cfg,
                         CorrelationMemo& memo, StreamRng& rng);

// Swarm with a star-search descent step folded into every particle
// evaluation: the position and its 4-neighborhood are probed and the particle
// moves to the best of the five.
IntegerResult mpso_search(const SubsetStats& ref_stats, const GrayImage& target,
                          const SubsetSpec& spec, const SearchConfig& cfg,
                          CorrelationMemo& memo, StreamRng& rng);

// One star step: best of {(dx,dy)} plus its 4-neighborhood, clamped to the
// window. Returns the winning displacement and its correlation.
std::pair<std::pair<int, int>, double> star_best(
    const SubsetStats& ref_stats, const GrayImage& target, const SubsetSpec& spec,
    const DispWindow& window, CorrelationMemo& memo, int dx, int dy);

}  // namespace dic
