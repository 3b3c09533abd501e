#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dic/image.hpp"

namespace dic {

// Reference-side precomputation shared by every candidate evaluation of one
// subset: mean gray level, mean-centered values, and the centered norm that
// forms the left denominator factor of the correlation coefficient.
struct SubsetStats {
  double mean = 0.0;
  double norm = 0.0;                // sqrt(sum of squared deviations)
  std::vector<double> centered;     // (2M+1)^2, row-major
  int half_width = 0;
};

SubsetStats subset_stats(const GrayImage& image, const SubsetSpec& spec);

// Zero-normalized cross correlation between the precomputed reference subset
// and the target subset displaced by integer (dx, dy). In [-1, 1] up to
// rounding. Throws "window out of range" when the displaced subset leaves the
// image and "degenerate target subset" when the target window is constant.
double zncc(const SubsetStats& ref_stats, const GrayImage& target,
            const SubsetSpec& spec, int dx, int dy);

// Integer-displacement lookup table for one subset against one target image.
// Confined to a single search invocation; never shared across workers.
class CorrelationMemo {
 public:
  const double* find(int dx, int dy) const {
    auto it = table_.find(key(dx, dy));
    return it == table_.end() ? nullptr : &it->second;
  }
  void insert(int dx, int dy, double value) { table_.emplace(key(dx, dy), value); }

  void count_hit() { ++hits_; }
  void count_miss() { ++misses_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  static std::uint64_t key(int dx, int dy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(dx)) << 32) |
           static_cast<std::uint32_t>(dy);
  }
  std::unordered_map<std::uint64_t, double> table_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

// Memoized variant; repeated displacements return the stored value bit-for-bit
// and count as hits, not evaluations.
double zncc_memo(CorrelationMemo& memo, const SubsetStats& ref_stats,
                 const GrayImage& target, const SubsetSpec& spec, int dx, int dy);

}  // namespace dic
