#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dic/pipeline.hpp"
#include "dic/synth.hpp"

namespace dic {

// Self-contained accuracy check: synthesize a speckle pair per warp, analyze
// it, compare against the exact displacement. The sweep crosses sub-pixel
// fractions with integer offsets so both the integer stage and the refiners
// are exercised; v gets the opposite sign of u.
struct SweepConfig {
  int width = 160;
  int height = 160;
  std::uint64_t seed = 7;
  SpeckleParams speckle;  // blob_count <= 0 means scale by area
  RunConfig base;         // methods are overridden per combo
  std::vector<double> fractions = {0.1, 0.25, 0.5, 0.75, 0.9};
  std::vector<int> offsets = {-3, 0, 4};
};

struct ComboAccuracy {
  IntegerMethod integer_method = IntegerMethod::bfs;
  SubpixelMethod subpixel_method = SubpixelMethod::none;
  double max_err = 0;   // over both axes, all points, all warps
  double mean_err = 0;
  int measurements = 0;
  int unconverged = 0;
  bool pass = false;          // < 0.1 px refined, <= 0.5 px integer-only
  bool mean_flagged = false;  // mean >= 0.05 px
};

struct SweepReport {
  std::vector<ComboAccuracy> combos;
  int warp_count = 0;
  int poi_count = 0;
  double elapsed_s = 0;
};

SweepReport run_accuracy_sweep(
    const std::vector<std::pair<IntegerMethod, SubpixelMethod>>& combos,
    const SweepConfig& cfg);

}  // namespace dic
