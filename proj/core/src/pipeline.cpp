#include "dic/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <thread>

#include "dic/error.hpp"
#include "dic/rng.hpp"

namespace dic {

std::string to_string(IntegerMethod m) {
  switch (m) {
    case IntegerMethod::bfs: return "bfs";
    case IntegerMethod::pso: return "pso";
    case IntegerMethod::mpso: return "mpso";
  }
  return "?";
}

std::string to_string(SubpixelMethod m) {
  switch (m) {
    case SubpixelMethod::nr: return "nr";
    case SubpixelMethod::icgn: return "icgn";
    case SubpixelMethod::none: return "none";
  }
  return "?";
}

std::string to_string(ExecMode m) {
  switch (m) {
    case ExecMode::serial: return "serial";
    case ExecMode::subimage_parallel: return "subimage";
    case ExecMode::image_parallel: return "image";
  }
  return "?";
}

std::string to_string(ReferencePolicy p) {
  return p == ReferencePolicy::update_every_pair ? "update" : "fixed";
}

std::vector<std::pair<int, int>> sequence_pairs(ReferencePolicy policy, int image_count) {
  if (image_count < 2) throw Error("insufficient images");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(image_count) - 1);
  for (int i = 1; i < image_count; ++i) {
    if (policy == ReferencePolicy::update_every_pair)
      pairs.emplace_back(i - 1, i);
    else
      pairs.emplace_back(0, i);
  }
  return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> partition_ranges(std::size_t n, int workers) {
  if (workers < 1) throw Error("worker count must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  const std::size_t k = static_cast<std::size_t>(workers);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return ranges;
}

namespace {

// One point of interest, start to finish. Pure given its inputs; every
// stochastic draw comes from the stream keyed by (seed, pair, subset), so the
// result is identical no matter which worker runs it.
PoiRecord process_subset(const GrayImage& reference, const GrayImage& target,
                         const SubsetSpec& spec, const RunConfig& cfg,
                         std::uint64_t pair_index, std::uint64_t subset_index) {
  PoiRecord rec;
  rec.x = spec.center_x;
  rec.y = spec.center_y;
  try {
    const SubsetStats stats = subset_stats(reference, spec);
    StreamRng rng(derive_stream_seed(cfg.search.rng_seed, pair_index, subset_index));
    CorrelationMemo memo;

    IntegerResult ir;
    switch (cfg.integer_method) {
      case IntegerMethod::bfs:
        ir = bfs_search(stats, target, spec, cfg.search);
        break;
      case IntegerMethod::pso:
        ir = pso_search(stats, target, spec, cfg.search, memo, rng);
        break;
      case IntegerMethod::mpso:
        ir = mpso_search(stats, target, spec, cfg.search, memo, rng);
        break;
    }
    rec.u = ir.dx;
    rec.v = ir.dy;
    rec.zncc = ir.zncc;
    rec.evaluations = ir.evaluations;
    rec.update_evaluations = ir.update_evaluations;

    switch (cfg.subpixel_method) {
      case SubpixelMethod::none:
        rec.converged = true;
        break;
      case SubpixelMethod::nr: {
        const SubpixelResult sr =
            refine_nr(stats, target, spec, {ir.dx, ir.dy}, cfg.refine);
        rec.u = sr.u;
        rec.v = sr.v;
        rec.zncc = sr.zncc;
        rec.iterations = sr.iterations;
        rec.converged = sr.converged;
        break;
      }
      case SubpixelMethod::icgn: {
        const RefinerState state = icgn_precompute(reference, spec);
        const SubpixelResult sr =
            refine_icgn(state, target, spec, {ir.dx, ir.dy}, cfg.refine);
        rec.u = sr.u;
        rec.v = sr.v;
        rec.zncc = sr.zncc;
        rec.iterations = sr.iterations;
        rec.converged = sr.converged;
        break;
      }
    }
  } catch (const Error&) {
    rec.converged = false;  // keep whatever stages already filled in
  }
  return rec;
}

void warn_oversubscribed(int workers) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0 && workers > static_cast<int>(hw))
    std::fprintf(stderr,
                 "warning: %d workers requested but only %u hardware threads available\n",
                 workers, hw);
}

}  // namespace

DisplacementField analyze_pair(const GrayImage& reference, const GrayImage& target,
                               const RunConfig& cfg, std::uint64_t pair_index) {
  if (reference.width() != target.width() || reference.height() != target.height())
    throw Error("dimension mismatch");

  const std::vector<SubsetSpec> grid = grid_subsets(
      reference, cfg.grid.half_width, cfg.grid.spacing, cfg.effective_margin());

  DisplacementField field;
  field.pair_index = static_cast<int>(pair_index);
  field.ref_id = reference.id();
  field.tgt_id = target.id();
  field.records.resize(grid.size());

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      field.records[k] = process_subset(reference, target, grid[k], cfg, pair_index, k);
  };

  const int workers = cfg.mode == ExecMode::subimage_parallel ? cfg.effective_workers() : 1;
  if (workers <= 1 || grid.size() <= 1) {
    run_range(0, grid.size());
  } else {
    // Disjoint contiguous chunks into a preallocated buffer: no locks, and
    // output order is positional, so completion order cannot matter.
    std::vector<std::thread> pool;
    for (const auto& [begin, end] : partition_ranges(grid.size(), workers)) {
      if (begin == end) continue;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return field;
}

std::vector<DisplacementField> analyze_sequence(const std::vector<GrayImage>& images,
                                                const RunConfig& cfg) {
  const auto pairs = sequence_pairs(cfg.reference_policy, static_cast<int>(images.size()));
  std::vector<DisplacementField> fields(pairs.size());

  if (cfg.mode != ExecMode::serial) warn_oversubscribed(cfg.effective_workers());

  auto run_pair = [&](std::size_t i) {
    const auto& [a, b] = pairs[i];
    try {
      fields[i] = analyze_pair(images[a], images[b], cfg, i);
    } catch (const Error& e) {
      fields[i].pair_index = static_cast<int>(i);
      fields[i].ref_id = images[a].id();
      fields[i].tgt_id = images[b].id();
      fields[i].error = e.what();
    }
  };

  if (cfg.mode == ExecMode::image_parallel && cfg.effective_workers() > 1 && pairs.size() > 1) {
    std::vector<std::thread> pool;
    for (const auto& [begin, end] : partition_ranges(pairs.size(), cfg.effective_workers())) {
      if (begin == end) continue;
      pool.emplace_back([&, begin, end] {
        for (std::size_t i = begin; i < end; ++i) run_pair(i);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < pairs.size(); ++i) run_pair(i);
  }
  return fields;
}

std::string field_filename(int pair_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "field_%04d.csv", pair_index);
  return buf;
}

std::string field_csv_string(const DisplacementField& field) {
  std::string out = "x,y,u,v,zncc,converged,iterations,evaluations\n";
  char buf[192];
  for (const auto& r : field.records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%d,%d,%ld\n", r.x, r.y,
                  r.u, r.v, r.zncc, r.converged ? 1 : 0, r.iterations, r.evaluations);
    out += buf;
  }
  return out;
}

void write_field_csv(const DisplacementField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << field_csv_string(field);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace dic
