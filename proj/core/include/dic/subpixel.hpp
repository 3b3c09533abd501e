#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dic/correlation.hpp"
#include "dic/image.hpp"

namespace dic {

// First-order subset warp (u, u_x, u_y, v, v_x, v_y).
struct WarpParams {
  double u = 0, ux = 0, uy = 0;
  double v = 0, vx = 0, vy = 0;
};

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

Eigen::Matrix3d warp_matrix(const WarpParams& p);

// W(p) composed with W(increment)^-1, returned in parameter form. An exactly
// zero increment returns p unchanged. Throws when the increment matrix is not
// invertible (|det| < 1e-8).
WarpParams compose_with_inverse(const WarpParams& p, const WarpParams& increment);

// Gray level at a sub-pixel position from the four surrounding pixels.
// Reproduces stored pixels exactly at integer coordinates and never leaves the
// [min, max] range of the cell corners.
double interp_bilinear(const GrayImage& image, double x, double y);

struct GradSample {
  double gx = 0, gy = 0;
};

// Image gradient at a sub-pixel position: central differences at the pixel
// nodes, bilinearly interpolated. Valid for x in [1, w-2], y in [1, h-2].
GradSample grad_bilinear(const GrayImage& image, double x, double y);

struct RefineConfig {
  double tol = 0.01;  // stop when max(|du|, |dv|) drops below this, px
  int max_iter = 20;
};

struct SubpixelResult {
  WarpParams warp;
  double u = 0, v = 0;
  double zncc = 0;
  int iterations = 0;
  bool converged = false;
  // Criterion value at each visited warp, initial included; used to observe
  // convergence behaviour.
  std::vector<double> criterion_history;
};

// Everything the inverse-compositional solver can hoist out of the iteration:
// reference stats, node gradients, steepest-descent images, and the 6x6
// Hessian with its factorization.
struct RefinerState {
  SubsetSpec spec;
  SubsetStats stats;
  std::vector<Vector6d> steepest;  // one row per subset pixel
  Matrix6d hessian = Matrix6d::Zero();
  double condition = 0.0;
  Eigen::LDLT<Matrix6d> solver;
};

RefinerState icgn_precompute(const GrayImage& reference, const SubsetSpec& spec);

// Forward Newton-type minimization of the zero-normalized SSD; gradients and
// the Gauss-Newton Hessian are rebuilt from the target every iteration.
SubpixelResult refine_nr(const SubsetStats& ref_stats, const GrayImage& target,
                         const SubsetSpec& spec, std::pair<int, int> init,
                         const RefineConfig& cfg);

// Inverse-compositional Gauss-Newton on the same criterion; per-iteration work
// is one target resample plus a back-substitution against the precomputed
// factorization.
SubpixelResult refine_icgn(const RefinerState& state, const GrayImage& target,
                           const SubsetSpec& spec, std::pair<int, int> init,
                           const RefineConfig& cfg);

}  // namespace dic
