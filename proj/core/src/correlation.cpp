#include "dic/correlation.hpp"

#include <cmath>

#include "dic/error.hpp"

namespace dic {

SubsetStats subset_stats(const GrayImage& image, const SubsetSpec& spec) {
  if (!subset_fits(spec, image.width(), image.height()))
    throw Error("subset out of image bounds");
  const int m = spec.half_width;
  const int side = 2 * m + 1;
  const std::size_t n = static_cast<std::size_t>(side) * side;

  SubsetStats stats;
  stats.half_width = m;
  stats.centered.resize(n);

  double sum = 0.0;
  for (int dy = -m; dy <= m; ++dy) {
    const double* row = image.row(spec.center_y + dy) + (spec.center_x - m);
    for (int i = 0; i < side; ++i) sum += row[i];
  }
  stats.mean = sum / static_cast<double>(n);

  double sumsq = 0.0;
  std::size_t k = 0;
  for (int dy = -m; dy <= m; ++dy) {
    const double* row = image.row(spec.center_y + dy) + (spec.center_x - m);
    for (int i = 0; i < side; ++i, ++k) {
      const double c = row[i] - stats.mean;
      stats.centered[k] = c;
      sumsq += c * c;
    }
  }
  stats.norm = std::sqrt(sumsq);
  return stats;
}

double zncc(const SubsetStats& ref_stats, const GrayImage& target,
            const SubsetSpec& spec, int dx, int dy) {
  if (ref_stats.norm <= 0.0) throw Error("degenerate subset");
  const int m = ref_stats.half_width;
  const int side = 2 * m + 1;
  const int cx = spec.center_x + dx;
  const int cy = spec.center_y + dy;
  if (cx - m < 0 || cx + m > target.width() - 1 || cy - m < 0 || cy + m > target.height() - 1)
    throw Error("window out of range");

  const std::size_t n = static_cast<std::size_t>(side) * side;
  double sum = 0.0;
  for (int oy = -m; oy <= m; ++oy) {
    const double* row = target.row(cy + oy) + (cx - m);
    for (int i = 0; i < side; ++i) sum += row[i];
  }
  const double mean = sum / static_cast<double>(n);

  double cross = 0.0, sumsq = 0.0;
  std::size_t k = 0;
  for (int oy = -m; oy <= m; ++oy) {
    const double* row = target.row(cy + oy) + (cx - m);
    for (int i = 0; i < side; ++i, ++k) {
      const double g = row[i] - mean;
      cross += ref_stats.centered[k] * g;
      sumsq += g * g;
    }
  }
  const double norm = std::sqrt(sumsq);
  if (norm <= 0.0) throw Error("degenerate target subset");
  return cross / (ref_stats.norm * norm);
}

double zncc_memo(CorrelationMemo& memo, const SubsetStats& ref_stats,
                 const GrayImage& target, const SubsetSpec& spec, int dx, int dy) {
  if (const double* cached = memo.find(dx, dy)) {
    memo.count_hit();
    return *cached;
  }
  const double value = zncc(ref_stats, target, spec, dx, dy);
  memo.insert(dx, dy, value);
  memo.count_miss();
  return value;
}

}  // namespace dic
