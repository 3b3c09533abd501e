#include "dic/integer_search.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dic/error.hpp"

namespace dic {

DispWindow feasible_window(const SubsetSpec& spec, int image_width,
                           int image_height, int radius) {
  const int m = spec.half_width;
  DispWindow w;
  w.lo_dx = std::max(-radius, m - spec.center_x);
  w.hi_dx = std::min(radius, image_width - 1 - m - spec.center_x);
  w.lo_dy = std::max(-radius, m - spec.center_y);
  w.hi_dy = std::min(radius, image_height - 1 - m - spec.center_y);
  if (w.lo_dx > w.hi_dx || w.lo_dy > w.hi_dy) throw Error("no valid search position");
  return w;
}

DispWindow whole_image_window(const SubsetSpec& spec, int image_width,
                              int image_height) {
  const int m = spec.half_width;
  DispWindow w;
  w.lo_dx = m - spec.center_x;
  w.hi_dx = image_width - 1 - m - spec.center_x;
  w.lo_dy = m - spec.center_y;
  w.hi_dy = image_height - 1 - m - spec.center_y;
  if (w.lo_dx > w.hi_dx || w.lo_dy > w.hi_dy) throw Error("no valid search position");
  return w;
}

double inertia_weight(int t, int max_generations) {
  return 0.9 - static_cast<double>(t) / (2.0 * max_generations);
}

namespace {

// (dy, dx) lexicographic tie-break keeps every searcher deterministic and
// mode-independent.
bool improves(double c, int dx, int dy, double best_c, int best_dx, int best_dy) {
  if (c > best_c) return true;
  if (c < best_c) return false;
  if (dy != best_dy) return dy < best_dy;
  return dx < best_dx;
}

}  // namespace

IntegerResult bfs_search(const SubsetStats& ref_stats, const GrayImage& target,
                         const SubsetSpec& spec, const SearchConfig& cfg) {
  const DispWindow domain =
      cfg.bfs_domain == BfsDomain::whole_image
          ? whole_image_window(spec, target.width(), target.height())
          : feasible_window(spec, target.width(), target.height(), cfg.search_radius);

  IntegerResult result;
  bool found = false;
  for (int dy = domain.lo_dy; dy <= domain.hi_dy; ++dy)
    for (int dx = domain.lo_dx; dx <= domain.hi_dx; ++dx) {
      double c;
      try {
        c = zncc(ref_stats, target, spec, dx, dy);
      } catch (const Error&) {
        continue;  // constant target window; not an evaluation
      }
      ++result.evaluations;
      if (!found || improves(c, dx, dy, result.zncc, result.dx, result.dy)) {
        found = true;
        result.zncc = c;
        result.dx = dx;
        result.dy = dy;
      }
    }
  if (!found) throw Error("all positions degenerate");
  return result;
}

namespace {

struct Particle {
  double x, y;    // real-valued position (displacement units)
  double vx, vy;
  int best_dx = 0, best_dy = 0;
  double best_c = -2.0;
  bool has_best = false;
};

int round_clamp(double v, int lo, int hi) {
  return std::clamp(static_cast<int>(std::lround(v)), lo, hi);
}

// Probe one integer displacement through the memo; a constant target window
// counts as "no result" rather than an evaluation.
bool probe(const SubsetStats& stats, const GrayImage& target, const SubsetSpec& spec,
           CorrelationMemo& memo, int dx, int dy, double& c_out) {
  try {
    c_out = zncc_memo(memo, stats, target, spec, dx, dy);
    return true;
  } catch (const Error&) {
    return false;
  }
}

IntegerResult swarm_search(const SubsetStats& stats, const GrayImage& target,
                           const SubsetSpec& spec, const SearchConfig& cfg,
                           CorrelationMemo& memo, StreamRng& rng, bool star) {
  if (cfg.particle_count < 1 || cfg.max_generations < 1)
    throw Error("invalid swarm configuration");
  const DispWindow win =
      feasible_window(spec, target.width(), target.height(), cfg.search_radius);

  const double vspan = cfg.search_radius / 2.0;
  std::vector<Particle> swarm(static_cast<std::size_t>(cfg.particle_count));
  for (auto& p : swarm) {
    p.x = rng.uniform(win.lo_dx, win.hi_dx);
    p.y = rng.uniform(win.lo_dy, win.hi_dy);
    p.vx = rng.uniform(-vspan, vspan);
    p.vy = rng.uniform(-vspan, vspan);
  }

  int g_dx = 0, g_dy = 0;
  double g_c = -2.0;
  bool has_g = false;

  // g_best updates as soon as any particle improves it, so later particles in
  // the same generation are pulled toward fresh information.
  auto offer_gbest = [&](double c, int dx, int dy) {
    if (!has_g || improves(c, dx, dy, g_c, g_dx, g_dy)) {
      has_g = true;
      g_c = c;
      g_dx = dx;
      g_dy = dy;
    }
  };

  auto evaluate_particle = [&](Particle& p) {
    const int dx = round_clamp(p.x, win.lo_dx, win.hi_dx);
    const int dy = round_clamp(p.y, win.lo_dy, win.hi_dy);
    int eff_dx = dx, eff_dy = dy;
    double c;
    bool ok;
    if (star) {
      auto [pos, best] = star_best(stats, target, spec, win, memo, dx, dy);
      eff_dx = pos.first;
      eff_dy = pos.second;
      c = best;
      ok = c > -2.0;
    } else {
      ok = probe(stats, target, spec, memo, dx, dy, c);
    }
    if (!ok) return;
    if (star) {
      p.x = eff_dx;  // the descent step repositions the particle
      p.y = eff_dy;
    }
    if (!p.has_best || improves(c, eff_dx, eff_dy, p.best_c, p.best_dx, p.best_dy)) {
      p.has_best = true;
      p.best_c = c;
      p.best_dx = eff_dx;
      p.best_dy = eff_dy;
    }
    offer_gbest(c, eff_dx, eff_dy);
  };

  for (auto& p : swarm) evaluate_particle(p);
  if (!has_g) throw Error("all positions degenerate");
  const long init_evals = static_cast<long>(memo.misses());

  IntegerResult result;
  result.generations_used = 0;

  if (g_c < cfg.stop_threshold) {
    for (int t = 0; t < cfg.max_generations; ++t) {
      const double w = inertia_weight(t, cfg.max_generations);
      for (auto& p : swarm) {
        // Draw order per particle: r1,r2 for x, then r1,r2 for y.
        const double r1x = rng.uniform01(), r2x = rng.uniform01();
        const double r1y = rng.uniform01(), r2y = rng.uniform01();
        p.vx = w * p.vx + cfg.c1 * r1x * (p.best_dx - p.x) + cfg.c2 * r2x * (g_dx - p.x);
        p.vy = w * p.vy + cfg.c1 * r1y * (p.best_dy - p.y) + cfg.c2 * r2y * (g_dy - p.y);
        p.x = std::clamp(p.x + p.vx, static_cast<double>(win.lo_dx),
                         static_cast<double>(win.hi_dx));
        p.y = std::clamp(p.y + p.vy, static_cast<double>(win.lo_dy),
                         static_cast<double>(win.hi_dy));
        evaluate_particle(p);
      }
      result.generations_used = t + 1;
      if (g_c >= cfg.stop_threshold) break;
    }
  }

  result.dx = g_dx;
  result.dy = g_dy;
  result.zncc = g_c;
  result.evaluations = static_cast<long>(memo.misses());
  result.update_evaluations = result.evaluations - init_evals;
  return result;
}

}  // namespace

std::pair<std::pair<int, int>, double> star_best(
    const SubsetStats& ref_stats, const GrayImage& target, const SubsetSpec& spec,
    const DispWindow& window, CorrelationMemo& memo, int dx, int dy) {
  static constexpr int kOffsets[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  int best_dx = dx, best_dy = dy;
  double best_c = -2.0;
  bool found = false;
  for (const auto& off : kOffsets) {
    const int px = std::clamp(dx + off[0], window.lo_dx, window.hi_dx);
    const int py = std::clamp(dy + off[1], window.lo_dy, window.hi_dy);
    double c;
    if (!probe(ref_stats, target, spec, memo, px, py, c)) continue;
    if (!found || improves(c, px, py, best_c, best_dx, best_dy)) {
      found = true;
      best_c = c;
      best_dx = px;
      best_dy = py;
    }
  }
  return {{best_dx, best_dy}, found ? best_c : -2.0};
}

IntegerResult pso_search(const SubsetStats& ref_stats, const GrayImage& target,
                         const SubsetSpec& spec, const SearchConfig& cfg,
                         CorrelationMemo& memo, StreamRng& rng) {
  return swarm_search(ref_stats, target, spec, cfg, memo, rng, /*star=*/false);
}

IntegerResult mpso_search(const SubsetStats& ref_stats, const GrayImage& target,
                          const SubsetSpec& spec, const SearchConfig& cfg,
                          CorrelationMemo& memo, StreamRng& rng) {
  return swarm_search(ref_stats, target, spec, cfg, memo, rng, /*star=*/true);
}

}  // namespace dic
