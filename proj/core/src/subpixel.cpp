#include "dic/subpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dic/error.hpp"

namespace dic {

Eigen::Matrix3d warp_matrix(const WarpParams& p) {
  Eigen::Matrix3d w;
  w << 1.0 + p.ux, p.uy, p.u,
       p.vx, 1.0 + p.vy, p.v,
       0.0, 0.0, 1.0;
  return w;
}

namespace {

bool is_zero(const WarpParams& p) {
  return p.u == 0 && p.v == 0 && p.ux == 0 && p.uy == 0 && p.vx == 0 && p.vy == 0;
}

// Inverse of [[A, t], [0, 1]] built directly so the bottom row stays exact.
Eigen::Matrix3d affine_inverse(const WarpParams& p) {
  const double a00 = 1.0 + p.ux, a01 = p.uy;
  const double a10 = p.vx, a11 = 1.0 + p.vy;
  const double det = a00 * a11 - a01 * a10;
  if (std::abs(det) < 1e-8) throw Error("non-invertible warp increment");
  const double i00 = a11 / det, i01 = -a01 / det;
  const double i10 = -a10 / det, i11 = a00 / det;
  Eigen::Matrix3d w;
  w << i00, i01, -(i00 * p.u + i01 * p.v),
       i10, i11, -(i10 * p.u + i11 * p.v),
       0.0, 0.0, 1.0;
  return w;
}

WarpParams params_from_matrix(const Eigen::Matrix3d& w) {
  WarpParams p;
  p.ux = w(0, 0) - 1.0;
  p.uy = w(0, 1);
  p.u = w(0, 2);
  p.vx = w(1, 0);
  p.vy = w(1, 1) - 1.0;
  p.v = w(1, 2);
  return p;
}

}  // namespace

WarpParams compose_with_inverse(const WarpParams& p, const WarpParams& increment) {
  if (is_zero(increment)) return p;
  const Eigen::Matrix3d composed = warp_matrix(p) * affine_inverse(increment);
  return params_from_matrix(composed);
}

double interp_bilinear(const GrayImage& image, double x, double y) {
  const int w = image.width(), h = image.height();
  if (!(x >= 0.0 && x <= w - 1.0 && y >= 0.0 && y <= h - 1.0))
    throw Error("interpolation coordinate out of domain");

  int x0, y0;
  double fx, fy;
  if (w == 1) {
    x0 = 0;
    fx = 0.0;
  } else {
    x0 = static_cast<int>(std::floor(x));
    if (x0 > w - 2) x0 = w - 2;
    fx = x - x0;
  }
  if (h == 1) {
    y0 = 0;
    fy = 0.0;
  } else {
    y0 = static_cast<int>(std::floor(y));
    if (y0 > h - 2) y0 = h - 2;
    fy = y - y0;
  }
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double f00 = image.at(x0, y0), f10 = image.at(x1, y0);
  const double f01 = image.at(x0, y1), f11 = image.at(x1, y1);

  // Integer coordinates must reproduce the stored pixel bit-for-bit.
  if (fx == 0.0 && fy == 0.0) return f00;
  if (fx == 1.0 && fy == 0.0) return f10;
  if (fx == 0.0 && fy == 1.0) return f01;
  if (fx == 1.0 && fy == 1.0) return f11;

  const double a00 = f00;
  const double a10 = f10 - f00;
  const double a01 = f01 - f00;
  const double a11 = f00 + f11 - f10 - f01;
  const double g = a00 + a10 * fx + a01 * fy + a11 * fx * fy;

  const double lo = std::min(std::min(f00, f10), std::min(f01, f11));
  const double hi = std::max(std::max(f00, f10), std::max(f01, f11));
  return std::clamp(g, lo, hi);
}

GradSample grad_bilinear(const GrayImage& image, double x, double y) {
  const int w = image.width(), h = image.height();
  if (!(x >= 1.0 && x <= w - 2.0 && y >= 1.0 && y <= h - 2.0))
    throw Error("gradient sample out of domain");

  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};

  GradSample g;
  for (int b = 0; b < 2; ++b) {
    if (wy[b] == 0.0) continue;
    for (int a = 0; a < 2; ++a) {
      if (wx[a] == 0.0) continue;
      const int i = x0 + a, j = y0 + b;
      const double weight = wx[a] * wy[b];
      g.gx += weight * 0.5 * (image.at(i + 1, j) - image.at(i - 1, j));
      g.gy += weight * 0.5 * (image.at(i, j + 1) - image.at(i, j - 1));
    }
  }
  return g;
}

namespace {

constexpr int kGuardBand = 2;  // subset center keeps M+2 px clearance

void check_guard(const GrayImage& target, const SubsetSpec& spec, const WarpParams& p) {
  const double cx = spec.center_x + p.u;
  const double cy = spec.center_y + p.v;
  const double lim = spec.half_width + kGuardBand;
  if (!(cx >= lim && cx <= target.width() - 1 - lim && cy >= lim &&
        cy <= target.height() - 1 - lim))
    throw Error("drifted out of bounds");
}

struct SampledSubset {
  std::vector<double> g;   // raw gray levels through the warp
  std::vector<GradSample> grad;  // empty unless requested
  double mean = 0;
  double norm = 0;         // sqrt(sum of squared deviations)
};

// Warp has the subset-local form x* = x + u + ux*dx + uy*dy (same for y).
void sample_through_warp(const GrayImage& target, const SubsetSpec& spec,
                         const WarpParams& p, bool with_gradients,
                         SampledSubset& out) {
  check_guard(target, spec, p);
  const int m = spec.half_width;
  const int side = 2 * m + 1;
  const std::size_t n = static_cast<std::size_t>(side) * side;
  out.g.resize(n);
  if (with_gradients) out.grad.resize(n);

  try {
    std::size_t k = 0;
    for (int dy = -m; dy <= m; ++dy)
      for (int dx = -m; dx <= m; ++dx, ++k) {
        const double sx = spec.center_x + dx + p.u + p.ux * dx + p.uy * dy;
        const double sy = spec.center_y + dy + p.v + p.vx * dx + p.vy * dy;
        out.g[k] = interp_bilinear(target, sx, sy);
        if (with_gradients) out.grad[k] = grad_bilinear(target, sx, sy);
      }
  } catch (const Error&) {
    throw Error("drifted out of bounds");
  }

  double sum = 0;
  for (double v : out.g) sum += v;
  out.mean = sum / static_cast<double>(n);
  double sumsq = 0;
  for (double v : out.g) {
    const double c = v - out.mean;
    sumsq += c * c;
  }
  out.norm = std::sqrt(sumsq);
}

double warp_determinant(const WarpParams& p) {
  return (1.0 + p.ux) * (1.0 + p.vy) - p.uy * p.vx;
}

}  // namespace

RefinerState icgn_precompute(const GrayImage& reference, const SubsetSpec& spec) {
  const int m = spec.half_width;
  if (spec.center_x - m - 1 < 0 || spec.center_x + m + 1 > reference.width() - 1 ||
      spec.center_y - m - 1 < 0 || spec.center_y + m + 1 > reference.height() - 1)
    throw Error("subset too close to border for gradients");

  RefinerState state;
  state.spec = spec;
  state.stats = subset_stats(reference, spec);
  if (state.stats.norm <= 0.0) throw Error("degenerate texture");

  const int side = 2 * m + 1;
  state.steepest.reserve(static_cast<std::size_t>(side) * side);
  for (int dy = -m; dy <= m; ++dy)
    for (int dx = -m; dx <= m; ++dx) {
      const int x = spec.center_x + dx, y = spec.center_y + dy;
      const double gx = 0.5 * (reference.at(x + 1, y) - reference.at(x - 1, y));
      const double gy = 0.5 * (reference.at(x, y + 1) - reference.at(x, y - 1));
      Vector6d row;
      row << gx, gx * dx, gx * dy, gy, gy * dx, gy * dy;
      state.steepest.push_back(row);
      state.hessian.noalias() += row * row.transpose();
    }

  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(state.hessian);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  state.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(state.condition < 1e12)) throw Error("degenerate texture");
  state.solver.compute(state.hessian);
  return state;
}

SubpixelResult refine_nr(const SubsetStats& ref_stats, const GrayImage& target,
                         const SubsetSpec& spec, std::pair<int, int> init,
                         const RefineConfig& cfg) {
  if (ref_stats.norm <= 0.0) throw Error("degenerate subset");
  const std::size_t n = ref_stats.centered.size();
  const int m = ref_stats.half_width;

  SubpixelResult result;
  WarpParams p;
  p.u = init.first;
  p.v = init.second;

  SampledSubset sampled;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    sample_through_warp(target, spec, p, /*with_gradients=*/true, sampled);
    if (sampled.norm <= 0.0) throw Error("degenerate target subset");

    double cross = 0;
    for (std::size_t k = 0; k < n; ++k)
      cross += ref_stats.centered[k] * (sampled.g[k] - sampled.mean);
    const double zncc_now = cross / (ref_stats.norm * sampled.norm);
    result.criterion_history.push_back(2.0 * (1.0 - zncc_now));

    // d(ZNSSD)/dp = -2/(nf*ng) * sum_k [F_k - (S/ng^2) G_k] * J_k with the
    // normalization's own derivative folded in; the Hessian keeps only the
    // Gauss-Newton term.
    const double ng2 = sampled.norm * sampled.norm;
    const double scale = -2.0 / (ref_stats.norm * sampled.norm);
    Vector6d gradient = Vector6d::Zero();
    Matrix6d hessian = Matrix6d::Zero();
    std::size_t k = 0;
    for (int dy = -m; dy <= m; ++dy)
      for (int dx = -m; dx <= m; ++dx, ++k) {
        const double gk = sampled.g[k] - sampled.mean;
        const double coeff = ref_stats.centered[k] - (cross / ng2) * gk;
        const GradSample& gr = sampled.grad[k];
        Vector6d jac;
        jac << gr.gx, gr.gx * dx, gr.gx * dy, gr.gy, gr.gy * dx, gr.gy * dy;
        gradient.noalias() += coeff * jac;
        hessian.noalias() += jac * jac.transpose();
      }
    gradient *= scale;
    hessian *= 2.0 / ng2;

    Eigen::LDLT<Matrix6d> solver(hessian);
    if (solver.info() != Eigen::Success) throw Error("degenerate subset");
    const Vector6d step = solver.solve(-gradient);
    if (!step.allFinite()) throw Error("degenerate subset");

    p.u += step(0);
    p.ux += step(1);
    p.uy += step(2);
    p.v += step(3);
    p.vx += step(4);
    p.vy += step(5);
    if (std::abs(warp_determinant(p)) < 1e-8) throw Error("warp not invertible");

    result.iterations = iter;
    if (std::max(std::abs(step(0)), std::abs(step(3))) < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  sample_through_warp(target, spec, p, /*with_gradients=*/false, sampled);
  if (sampled.norm <= 0.0) throw Error("degenerate target subset");
  double cross = 0;
  for (std::size_t k = 0; k < n; ++k)
    cross += ref_stats.centered[k] * (sampled.g[k] - sampled.mean);
  result.zncc = cross / (ref_stats.norm * sampled.norm);
  result.criterion_history.push_back(2.0 * (1.0 - result.zncc));
  result.warp = p;
  result.u = p.u;
  result.v = p.v;
  return result;
}

SubpixelResult refine_icgn(const RefinerState& state, const GrayImage& target,
                           const SubsetSpec& spec, std::pair<int, int> init,
                           const RefineConfig& cfg) {
  if (spec.center_x != state.spec.center_x || spec.center_y != state.spec.center_y ||
      spec.half_width != state.spec.half_width)
    throw Error("refiner state does not match subset");
  const SubsetStats& stats = state.stats;
  const std::size_t n = stats.centered.size();

  SubpixelResult result;
  WarpParams p;
  p.u = init.first;
  p.v = init.second;

  SampledSubset sampled;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    sample_through_warp(target, spec, p, /*with_gradients=*/false, sampled);
    if (sampled.norm <= 0.0) throw Error("degenerate target subset");

    double cross = 0;
    for (std::size_t k = 0; k < n; ++k)
      cross += stats.centered[k] * (sampled.g[k] - sampled.mean);
    result.criterion_history.push_back(
        2.0 * (1.0 - cross / (stats.norm * sampled.norm)));

    // Least-squares increment against the precomputed reference-side system:
    // H dp = -sum_k J_k * [F_k - (nf/ng) G_k].
    const double ratio = stats.norm / sampled.norm;
    Vector6d rhs = Vector6d::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      const double e = stats.centered[k] - ratio * (sampled.g[k] - sampled.mean);
      rhs.noalias() += e * state.steepest[k];
    }
    const Vector6d step = state.solver.solve(-rhs);
    if (!step.allFinite()) throw Error("degenerate texture");

    WarpParams increment{step(0), step(1), step(2), step(3), step(4), step(5)};
    p = compose_with_inverse(p, increment);
    if (std::abs(warp_determinant(p)) < 1e-8) throw Error("warp not invertible");

    result.iterations = iter;
    if (std::max(std::abs(step(0)), std::abs(step(3))) < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  sample_through_warp(target, spec, p, /*with_gradients=*/false, sampled);
  if (sampled.norm <= 0.0) throw Error("degenerate target subset");
  double cross = 0;
  for (std::size_t k = 0; k < n; ++k)
    cross += stats.centered[k] * (sampled.g[k] - sampled.mean);
  result.zncc = cross / (stats.norm * sampled.norm);
  result.criterion_history.push_back(2.0 * (1.0 - result.zncc));
  result.warp = p;
  result.u = p.u;
  result.v = p.v;
  return result;
}

}  // namespace dic
