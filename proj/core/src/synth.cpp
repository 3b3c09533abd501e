#include "dic/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dic/error.hpp"
#include "dic/rng.hpp"
#include "dic/subpixel.hpp"

namespace dic {

int default_blob_count(int width, int height) {
  return std::max(1, width * height / 50);
}

namespace {

// Variance of every w x w window must clear the floor, otherwise correlation
// denominators can vanish. Summed-area tables make the scan O(W*H).
void check_texture(const std::vector<double>& px, int w, int h,
                   const SpeckleParams& p) {
  const int win = std::min({p.texture_window, w, h});
  const std::size_t sw = static_cast<std::size_t>(w) + 1;
  const std::size_t sh = static_cast<std::size_t>(h) + 1;
  std::vector<double> s1(sw * sh, 0.0), s2(sw * sh, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = px[static_cast<std::size_t>(y) * w + x];
      const std::size_t i = static_cast<std::size_t>(y + 1) * sw + (x + 1);
      s1[i] = v + s1[i - 1] + s1[i - sw] - s1[i - sw - 1];
      s2[i] = v * v + s2[i - 1] + s2[i - sw] - s2[i - sw - 1];
    }
  const double n = static_cast<double>(win) * win;
  for (int y = 0; y + win <= h; ++y)
    for (int x = 0; x + win <= w; ++x) {
      const std::size_t a = static_cast<std::size_t>(y) * sw + x;
      const std::size_t b = static_cast<std::size_t>(y) * sw + (x + win);
      const std::size_t c = static_cast<std::size_t>(y + win) * sw + x;
      const std::size_t d = static_cast<std::size_t>(y + win) * sw + (x + win);
      const double sum = s1[d] - s1[b] - s1[c] + s1[a];
      const double sumsq = s2[d] - s2[b] - s2[c] + s2[a];
      const double var = std::max(0.0, sumsq / n - (sum / n) * (sum / n));
      if (var < p.variance_floor) throw Error("textureless pattern");
    }
}

}  // namespace

GrayImage synth_speckle(int width, int height, std::uint64_t seed,
                        const SpeckleParams& params) {
  if (width < 1 || height < 1) throw Error("zero-dimension image");
  if (params.sigma_min <= 0 || params.sigma_max < params.sigma_min)
    throw Error("invalid blob radius range");

  std::vector<double> px(static_cast<std::size_t>(width) * height, params.background);
  StreamRng rng(mix64(seed));
  const double log_lo = std::log(params.sigma_min);
  const double log_hi = std::log(params.sigma_max);
  for (int b = 0; b < params.blob_count; ++b) {
    const double cx = rng.uniform(0.0, width - 1.0);
    const double cy = rng.uniform(0.0, height - 1.0);
    // Log-uniform radii mix fine detail with broad structure; the broad
    // component is what gives the correlation surface long-range guidance.
    // Contrast shrinks with radius so large blobs shade instead of saturate.
    const double sigma = std::exp(rng.uniform(log_lo, log_hi));
    double amp = rng.uniform(params.amp_min, params.amp_max) *
                 std::pow(params.sigma_min / sigma, 0.8);
    if (rng.uniform01() < 0.5) amp = -amp;

    const int reach = static_cast<int>(std::ceil(3.0 * sigma));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - reach);
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx)) + reach);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - reach);
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy)) + reach);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - cx, dy = y - cy;
        px[static_cast<std::size_t>(y) * width + x] += amp * std::exp(-(dx * dx + dy * dy) * inv2s2);
      }
  }
  for (auto& v : px) v = std::clamp(v, 0.0, 255.0);
  check_texture(px, width, height, params);
  return GrayImage(width, height, std::move(px));
}

GroundTruth::GroundTruth(WarpSpec warp, double origin_x, double origin_y,
                         int width, int height, std::vector<std::uint8_t> valid_mask)
    : warp_(warp), ox_(origin_x), oy_(origin_y), width_(width), height_(height),
      mask_(std::move(valid_mask)) {
  // Tightest all-valid rectangle, grown inward from the borders.
  x0_ = 0; y0_ = 0; x1_ = width_ - 1; y1_ = height_ - 1;
  auto row_valid = [&](int y, int xa, int xb) {
    for (int x = xa; x <= xb; ++x)
      if (!valid(x, y)) return false;
    return true;
  };
  auto col_valid = [&](int x, int ya, int yb) {
    for (int y = ya; y <= yb; ++y)
      if (!valid(x, y)) return false;
    return true;
  };
  while (y0_ <= y1_ && !row_valid(y0_, x0_, x1_)) ++y0_;
  while (y1_ >= y0_ && !row_valid(y1_, x0_, x1_)) --y1_;
  while (x0_ <= x1_ && !col_valid(x0_, y0_, y1_)) ++x0_;
  while (x1_ >= x0_ && !col_valid(x1_, y0_, y1_)) --x1_;
}

std::pair<double, double> GroundTruth::displacement_at(double x, double y) const {
  const double rx = x - ox_, ry = y - oy_;
  return {warp_.u + warp_.ux * rx + warp_.uy * ry,
          warp_.v + warp_.vx * rx + warp_.vy * ry};
}

std::pair<GrayImage, GroundTruth> synth_warped_pair(const GrayImage& reference,
                                                    const WarpSpec& warp) {
  const int w = reference.width(), h = reference.height();
  const double ox = (w - 1) / 2.0, oy = (h - 1) / 2.0;

  // Forward map: x -> x + d(x) with d the first-order field anchored at the
  // center. The target is built from the inverse map so its pixel grid is
  // sampled exactly once.
  const double a00 = 1.0 + warp.ux, a01 = warp.uy;
  const double a10 = warp.vx, a11 = 1.0 + warp.vy;
  const double det = a00 * a11 - a01 * a10;
  if (std::abs(det) < 1e-8) throw Error("warp not invertible");
  const double i00 = a11 / det, i01 = -a01 / det;
  const double i10 = -a10 / det, i11 = a00 / det;

  std::vector<double> px(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<std::uint8_t> mask(px.size(), 0);
  std::size_t valid_count = 0;
  const bool pure_translation = warp.is_translation();

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sx, sy;
      if (pure_translation) {
        sx = x - warp.u;
        sy = y - warp.v;
      } else {
        // Solve x = s + d(s) for s: s = origin + A^-1 * (x - origin - t).
        const double bx = x - ox - warp.u;
        const double by = y - oy - warp.v;
        sx = ox + i00 * bx + i01 * by;
        sy = oy + i10 * bx + i11 * by;
      }
      if (sx >= 0.0 && sx <= w - 1.0 && sy >= 0.0 && sy <= h - 1.0) {
        px[static_cast<std::size_t>(y) * w + x] = interp_bilinear(reference, sx, sy);
        mask[static_cast<std::size_t>(y) * w + x] = 1;
        ++valid_count;
      }
    }
  if (valid_count == 0) throw Error("warp out of bounds");

  GrayImage target(w, h, std::move(px), reference.id() + 1);
  GroundTruth truth(warp, ox, oy, w, h, std::move(mask));
  return {std::move(target), std::move(truth)};
}

void write_truth_csv(const GroundTruth& truth, const std::vector<SubsetSpec>& pois,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "x,y,u,v\n";
  char buf[96];
  for (const auto& poi : pois) {
    const auto [u, v] = truth.displacement_at(poi.center_x, poi.center_y);
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g\n", poi.center_x, poi.center_y, u, v);
    out << buf;
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace dic
