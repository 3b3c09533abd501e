#pragma once

// Brute-force reference implementations used only by tests. Everything here
// is written directly from the defining formulas with plain double loops and
// must stay independent of the library code paths it checks.

#include <cmath>
#include <optional>
#include <utility>

#include "dic/image.hpp"
#include "dic/subpixel.hpp"
#include "dic/synth.hpp"

namespace oracles {

// Correlation coefficient, literal form: means first, then the three sums.
inline std::optional<double> zncc(const dic::GrayImage& f_img, const dic::SubsetSpec& spec,
                                  const dic::GrayImage& g_img, int dx, int dy) {
  const int m = spec.half_width;
  const double n = (2.0 * m + 1) * (2.0 * m + 1);

  double f_mean = 0, g_mean = 0;
  for (int y = -m; y <= m; ++y)
    for (int x = -m; x <= m; ++x) {
      f_mean += f_img.at(spec.center_x + x, spec.center_y + y);
      g_mean += g_img.at(spec.center_x + dx + x, spec.center_y + dy + y);
    }
  f_mean /= n;
  g_mean /= n;

  double num = 0, fden = 0, gden = 0;
  for (int y = -m; y <= m; ++y)
    for (int x = -m; x <= m; ++x) {
      const double fv = f_img.at(spec.center_x + x, spec.center_y + y) - f_mean;
      const double gv = g_img.at(spec.center_x + dx + x, spec.center_y + dy + y) - g_mean;
      num += fv * gv;
      fden += fv * fv;
      gden += gv * gv;
    }
  if (fden <= 0 || gden <= 0) return std::nullopt;
  return num / (std::sqrt(fden) * std::sqrt(gden));
}

struct ArgmaxResult {
  int dx = 0, dy = 0;
  double c = -2.0;
  long evaluations = 0;
};

// Exhaustive argmax with smallest-(dy,dx) tie break.
inline ArgmaxResult bfs_argmax(const dic::GrayImage& f_img, const dic::SubsetSpec& spec,
                               const dic::GrayImage& g_img, int lo_dx, int hi_dx,
                               int lo_dy, int hi_dy) {
  ArgmaxResult best;
  bool found = false;
  for (int dy = lo_dy; dy <= hi_dy; ++dy)
    for (int dx = lo_dx; dx <= hi_dx; ++dx) {
      const auto c = zncc(f_img, spec, g_img, dx, dy);
      if (!c) continue;
      ++best.evaluations;
      if (!found || *c > best.c) {
        found = true;
        best.c = *c;
        best.dx = dx;
        best.dy = dy;
      }
    }
  return best;
}

// Convex-combination bilinear form (the library uses the coefficient form).
inline double bilinear(const dic::GrayImage& img, double x, double y) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  if (x0 > img.width() - 2) x0 = img.width() - 2;
  if (y0 > img.height() - 2) y0 = img.height() - 2;
  const double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x0 + 1, y0) +
         (1 - fx) * fy * img.at(x0, y0 + 1) + fx * fy * img.at(x0 + 1, y0 + 1);
}

// Zero-normalized SSD of a warped target subset against the reference subset,
// rebuilt from scratch (own sampling, own normalization).
inline double znssd(const dic::GrayImage& ref, const dic::SubsetSpec& spec,
                    const dic::GrayImage& target, const dic::WarpParams& p) {
  const int m = spec.half_width;
  const double n = (2.0 * m + 1) * (2.0 * m + 1);

  double f_mean = 0, g_mean = 0;
  for (int dy = -m; dy <= m; ++dy)
    for (int dx = -m; dx <= m; ++dx) {
      f_mean += ref.at(spec.center_x + dx, spec.center_y + dy);
      g_mean += bilinear(target, spec.center_x + dx + p.u + p.ux * dx + p.uy * dy,
                         spec.center_y + dy + p.v + p.vx * dx + p.vy * dy);
    }
  f_mean /= n;
  g_mean /= n;

  double fden = 0, gden = 0;
  for (int dy = -m; dy <= m; ++dy)
    for (int dx = -m; dx <= m; ++dx) {
      const double fv = ref.at(spec.center_x + dx, spec.center_y + dy) - f_mean;
      const double gv = bilinear(target, spec.center_x + dx + p.u + p.ux * dx + p.uy * dy,
                                 spec.center_y + dy + p.v + p.vx * dx + p.vy * dy) -
                        g_mean;
      fden += fv * fv;
      gden += gv * gv;
    }
  const double fn = std::sqrt(fden), gn = std::sqrt(gden);

  double sum = 0;
  for (int dy = -m; dy <= m; ++dy)
    for (int dx = -m; dx <= m; ++dx) {
      const double fv = (ref.at(spec.center_x + dx, spec.center_y + dy) - f_mean) / fn;
      const double gv = (bilinear(target, spec.center_x + dx + p.u + p.ux * dx + p.uy * dy,
                                  spec.center_y + dy + p.v + p.vx * dx + p.vy * dy) -
                         g_mean) /
                        gn;
      sum += (fv - gv) * (fv - gv);
    }
  return sum;
}

// Central finite differences of the criterion above w.r.t. one warp component.
inline double znssd_fd(const dic::GrayImage& ref, const dic::SubsetSpec& spec,
                       const dic::GrayImage& target, const dic::WarpParams& p,
                       int component, double h) {
  auto bump = [&](double sign) {
    dic::WarpParams q = p;
    double* fields[6] = {&q.u, &q.ux, &q.uy, &q.v, &q.vx, &q.vy};
    *fields[component] += sign * h;
    return q;
  };
  return (znssd(ref, spec, target, bump(+1)) - znssd(ref, spec, target, bump(-1))) /
         (2.0 * h);
}

inline dic::GrayImage speckle(int w, int h, std::uint64_t seed) {
  dic::SpeckleParams params;
  params.blob_count = dic::default_blob_count(w, h);
  return dic::synth_speckle(w, h, seed, params);
}

}  // namespace oracles
