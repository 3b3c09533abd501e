#include "dic/image.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dic/error.hpp"

namespace dic {

GrayImage::GrayImage(int width, int height, std::vector<double> data, int id)
    : width_(width), height_(height), id_(id) {
  if (width < 1 || height < 1) throw Error("zero-dimension image");
  if (data.size() != static_cast<std::size_t>(width) * height)
    throw Error("pixel buffer size does not match dimensions");
  for (double v : data)
    if (!std::isfinite(v)) throw Error("non-finite gray level");
  data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

bool subset_fits(const SubsetSpec& spec, int image_width, int image_height) {
  const int m = spec.half_width;
  return m >= 1 && spec.center_x >= m && spec.center_x <= image_width - 1 - m &&
         spec.center_y >= m && spec.center_y <= image_height - 1 - m;
}

std::uint64_t image_checksum(const GrayImage& img) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto& px = img.pixels();
  const auto* bytes = reinterpret_cast<const unsigned char*>(px.data());
  for (std::size_t i = 0; i < px.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// Header fields may be separated by comments; binary data starts after the
// single whitespace byte that follows maxval.
int next_header_int(std::istream& in) {
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      in.unget();
      break;
    }
  }
  int value;
  if (!(in >> value)) throw Error("unreadable portable graymap header");
  return value;
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("unreadable file: " + path.string());

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2'))
    throw Error("unsupported format (want P5 or P2 graymap): " + path.string());
  const bool binary = magic[1] == '5';

  const int w = next_header_int(in);
  const int h = next_header_int(in);
  const int maxval = next_header_int(in);
  if (w < 1 || h < 1) throw Error("zero-dimension image: " + path.string());
  if (maxval < 1 || maxval > 255)
    throw Error("unsupported format (only 8-bit graymaps): " + path.string());

  std::vector<double> data(static_cast<std::size_t>(w) * h);
  if (binary) {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(data.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
      throw Error("unreadable file (truncated pixel data): " + path.string());
    for (std::size_t i = 0; i < raw.size(); ++i) data[i] = raw[i];
  } else {
    for (auto& v : data) {
      int value;
      if (!(in >> value)) throw Error("unreadable file (truncated pixel data): " + path.string());
      if (value < 0 || value > maxval) throw Error("unreadable file (sample out of range): " + path.string());
      v = value;
    }
  }
  return GrayImage(w, h, std::move(data));
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.pixels().size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double v = std::round(img.pixels()[i]);
    raw[i] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<GrayImage> load_sequence(const std::filesystem::path& dir,
                                     const std::string& pattern) {
  if (!std::filesystem::is_directory(dir))
    throw Error("not a directory: " + dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (fnmatch(pattern.c_str(), name.c_str(), 0) == 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  if (files.size() < 2) throw Error("insufficient images (need at least 2 matching '" + pattern + "')");

  std::vector<GrayImage> images;
  images.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    GrayImage img = load_image(files[i]);
    if (!images.empty() &&
        (img.width() != images.front().width() || img.height() != images.front().height()))
      throw Error("dimension mismatch in sequence: " + files[i].string());
    images.emplace_back(img.width(), img.height(), img.pixels(), static_cast<int>(i));
  }
  return images;
}

std::vector<SubsetSpec> grid_subsets(const GrayImage& img, int half_width,
                                     int spacing, int margin) {
  if (half_width < 1) throw Error("half_width must be >= 1");
  if (spacing < 1) throw Error("spacing must be >= 1");
  if (margin < 0) throw Error("margin must be >= 0");

  std::vector<int> xs, ys;
  for (int x = margin; x <= img.width() - margin; x += spacing) xs.push_back(x);
  for (int y = margin; y <= img.height() - margin; y += spacing) ys.push_back(y);

  std::vector<SubsetSpec> grid;
  for (int y : ys)
    for (int x : xs) {
      SubsetSpec spec{x, y, half_width};
      if (subset_fits(spec, img.width(), img.height())) grid.push_back(spec);
    }
  if (grid.empty()) throw Error("image too small to host any subset");
  return grid;
}

}  // namespace dic
