#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dic/image.hpp"
#include "dic/integer_search.hpp"
#include "dic/subpixel.hpp"

namespace dic {

enum class IntegerMethod { bfs, pso, mpso };
enum class SubpixelMethod { nr, icgn, none };
enum class ExecMode { serial, subimage_parallel, image_parallel };
enum class ReferencePolicy { update_every_pair, fixed_first };

std::string to_string(IntegerMethod m);
std::string to_string(SubpixelMethod m);
std::string to_string(ExecMode m);
std::string to_string(ReferencePolicy p);

struct GridParams {
  int half_width = 15;
  int spacing = 10;
  int margin = -1;  // <0: auto = half_width + search_radius
};

struct RunConfig {
  IntegerMethod integer_method = IntegerMethod::mpso;
  SubpixelMethod subpixel_method = SubpixelMethod::nr;
  ExecMode mode = ExecMode::serial;
  ReferencePolicy reference_policy = ReferencePolicy::update_every_pair;
  int worker_count = 1;
  SearchConfig search;
  RefineConfig refine;
  GridParams grid;

  int effective_margin() const {
    return grid.margin >= 0 ? grid.margin : grid.half_width + search.search_radius;
  }
  int effective_workers() const {
    return mode == ExecMode::serial ? 1 : std::max(1, worker_count);
  }
};

struct PoiRecord {
  int x = 0, y = 0;
  double u = 0, v = 0;
  double zncc = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iterations = 0;       // sub-pixel iterations (0 when integer-only)
  long evaluations = 0;     // integer-search correlation evaluations
  long update_evaluations = 0;
};

struct DisplacementField {
  int pair_index = 0;
  int ref_id = 0, tgt_id = 0;
  std::vector<PoiRecord> records;
  std::string error;  // nonempty when the whole pair failed
  bool failed() const { return !error.empty(); }
};

// (reference, target) image indices for a sequence of n frames under the
// given policy: consecutive pairs or everything against frame 0.
std::vector<std::pair<int, int>> sequence_pairs(ReferencePolicy policy, int image_count);

// Contiguous balanced chunks: first (n % k) chunks get one extra item.
std::vector<std::pair<std::size_t, std::size_t>> partition_ranges(std::size_t n, int workers);

DisplacementField analyze_pair(const GrayImage& reference, const GrayImage& target,
                               const RunConfig& cfg, std::uint64_t pair_index = 0);

std::vector<DisplacementField> analyze_sequence(const std::vector<GrayImage>& images,
                                                const RunConfig& cfg);

std::string field_filename(int pair_index);                     // field_0000.csv
std::string field_csv_string(const DisplacementField& field);   // bit-stable
void write_field_csv(const DisplacementField& field, const std::filesystem::path& path);

}  // namespace dic
