#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "dic/image.hpp"

namespace dic {

// Sum of randomly placed Gaussian blobs on a mid-gray background, clipped to
// [0, 255]. Deterministic for a fixed seed.
struct SpeckleParams {
  int blob_count = 0;          // 0 is rejected; callers usually scale by area
  double sigma_min = 1.0;      // blob radius range, px
  double sigma_max = 2.5;
  double amp_min = 40.0;       // blob contrast range, gray levels, random sign
  double amp_max = 140.0;
  double background = 128.0;
  double variance_floor = 25.0;  // min gray-level variance over any texture window
  int texture_window = 31;
};

// blob_count = area / 50 gives roughly half coverage with the default radii.
int default_blob_count(int width, int height);

GrayImage synth_speckle(int width, int height, std::uint64_t seed,
                        const SpeckleParams& params);

// First-order warp: u, v in pixels; the gradient terms are dimensionless.
struct WarpSpec {
  double u = 0, v = 0;
  double ux = 0, uy = 0, vx = 0, vy = 0;
  bool is_translation() const { return ux == 0 && uy == 0 && vx == 0 && vy == 0; }
};

// Exact displacement field of a synthesized pair. The affine part is anchored
// at the image center so displacements stay small across the frame.
class GroundTruth {
 public:
  GroundTruth(WarpSpec warp, double origin_x, double origin_y, int width,
              int height, std::vector<std::uint8_t> valid_mask);

  const WarpSpec& warp() const { return warp_; }
  std::pair<double, double> displacement_at(double x, double y) const;
  bool valid(int x, int y) const { return mask_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  // Largest margins known valid; conservative for affine warps.
  int valid_x0() const { return x0_; }
  int valid_y0() const { return y0_; }
  int valid_x1() const { return x1_; }
  int valid_y1() const { return y1_; }

 private:
  WarpSpec warp_;
  double ox_, oy_;
  int width_, height_;
  std::vector<std::uint8_t> mask_;
  int x0_, y0_, x1_, y1_;
};

// Target(x, y) = reference sampled at the warp's preimage of (x, y); pixels
// whose preimage falls outside the reference are zeroed and flagged invalid.
std::pair<GrayImage, GroundTruth> synth_warped_pair(const GrayImage& reference,
                                                    const WarpSpec& warp);

// CSV "x,y,u,v", one row per point of interest, >= 9 significant digits.
void write_truth_csv(const GroundTruth& truth, const std::vector<SubsetSpec>& pois,
                     const std::filesystem::path& path);

}  // namespace dic
