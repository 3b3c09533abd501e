#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace dic {

// Single-channel image with double-precision gray levels, row-major.
// Immutable after construction; copies share the pixel buffer, so handing
// images to worker threads is cheap and needs no synchronization.
class GrayImage {
 public:
  GrayImage(int width, int height, std::vector<double> data, int id = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  int id() const { return id_; }

  double at(int x, int y) const { return (*data_)[static_cast<std::size_t>(y) * width_ + x]; }
  const double* row(int y) const { return data_->data() + static_cast<std::size_t>(y) * width_; }
  const std::vector<double>& pixels() const { return *data_; }

 private:
  int width_;
  int height_;
  int id_;
  std::shared_ptr<const std::vector<double>> data_;
};

// A point of interest plus its (2M+1) x (2M+1) footprint.
struct SubsetSpec {
  int center_x = 0;
  int center_y = 0;
  int half_width = 15;
};

bool subset_fits(const SubsetSpec& spec, int image_width, int image_height);

// FNV-1a over the raw pixel bytes; used by tests to prove analysis never
// mutates its inputs.
std::uint64_t image_checksum(const GrayImage& img);

// Binary (P5) and ASCII (P2) portable graymaps, 8-bit only. Byte value n maps
// to gray level n exactly.
GrayImage load_image(const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

// All files in `dir` matching the glob `pattern`, ordered lexicographically by
// filename. Requires at least two images of identical dimensions.
std::vector<GrayImage> load_sequence(const std::filesystem::path& dir,
                                     const std::string& pattern);

// Regular grid of points of interest. Candidate centers run from `margin` to
// `dim - margin` inclusive in steps of `spacing`; candidates whose subset does
// not fully fit the image are dropped. Depends only on dimensions and the
// parameters, never on pixel content.
std::vector<SubsetSpec> grid_subsets(const GrayImage& img, int half_width,
                                     int spacing, int margin);

}  // namespace dic
