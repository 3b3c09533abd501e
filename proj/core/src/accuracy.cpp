#include "dic/accuracy.hpp"

#include <chrono>
#include <cmath>

#include "dic/error.hpp"

namespace dic {

SweepReport run_accuracy_sweep(
    const std::vector<std::pair<IntegerMethod, SubpixelMethod>>& combos,
    const SweepConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();

  SpeckleParams speckle = cfg.speckle;
  if (speckle.blob_count <= 0)
    speckle.blob_count = default_blob_count(cfg.width, cfg.height);
  const GrayImage reference = synth_speckle(cfg.width, cfg.height, cfg.seed, speckle);
  const std::vector<SubsetSpec> grid =
      grid_subsets(reference, cfg.base.grid.half_width, cfg.base.grid.spacing,
                   cfg.base.effective_margin());

  SweepReport report;
  report.poi_count = static_cast<int>(grid.size());
  report.combos.reserve(combos.size());
  for (const auto& [im, sm] : combos) {
    ComboAccuracy acc;
    acc.integer_method = im;
    acc.subpixel_method = sm;
    report.combos.push_back(acc);
  }

  std::vector<double> err_sum(combos.size(), 0.0);
  int warp_index = 0;
  for (int offset : cfg.offsets)
    for (double fraction : cfg.fractions) {
      WarpSpec warp;
      warp.u = offset + fraction;
      warp.v = -(offset + fraction);
      auto [target, truth] = synth_warped_pair(reference, warp);

      for (std::size_t c = 0; c < combos.size(); ++c) {
        RunConfig run = cfg.base;
        run.integer_method = combos[c].first;
        run.subpixel_method = combos[c].second;
        const DisplacementField field =
            analyze_pair(reference, target, run, static_cast<std::uint64_t>(warp_index));

        ComboAccuracy& acc = report.combos[c];
        for (const auto& rec : field.records) {
          const auto [tu, tv] = truth.displacement_at(rec.x, rec.y);
          const double eu = std::abs(rec.u - tu);
          const double ev = std::abs(rec.v - tv);
          acc.max_err = std::max({acc.max_err, eu, ev});
          err_sum[c] += eu + ev;
          acc.measurements += 2;
          if (!rec.converged) ++acc.unconverged;
        }
      }
      ++warp_index;
    }
  report.warp_count = warp_index;

  for (std::size_t c = 0; c < combos.size(); ++c) {
    ComboAccuracy& acc = report.combos[c];
    acc.mean_err = acc.measurements > 0 ? err_sum[c] / acc.measurements : 0.0;
    const double bound =
        acc.subpixel_method == SubpixelMethod::none ? 0.5 + 1e-9 : 0.1;
    acc.pass = acc.unconverged == 0 && acc.measurements > 0 &&
               (acc.subpixel_method == SubpixelMethod::none ? acc.max_err <= bound
                                                            : acc.max_err < bound);
    acc.mean_flagged = acc.mean_err >= 0.05;
  }

  report.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace dic
