#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dic/pipeline.hpp"

namespace dic {

struct BenchCell {
  IntegerMethod integer_method = IntegerMethod::pso;
  SubpixelMethod subpixel_method = SubpixelMethod::nr;
  ExecMode mode = ExecMode::serial;
};

struct BenchRecord {
  BenchCell cell;
  std::string dataset_id;
  int repeats = 0;
  int pair_count = 0;
  double mean_s = 0;
  double stddev_s = 0;
  double per_pair_s = 0;
  double frame_rate_hz = 0;  // pair_count / mean_s
  long long total_evaluations = 0;
  bool failed = false;
  std::string error;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  std::string dataset_id;
  std::string cpu_model;
  unsigned hardware_threads = 0;
  int worker_count = 0;
  std::string timestamp;
  // Timing boundary: per repeat, from just before image loading to after the
  // last field CSV is flushed. Report serialization itself is not timed.
};

struct RepeatsPolicy {
  bool auto_bands = true;
  int fixed = 1;
};

// Repeat count from the untimed warm-up duration: long runs need few repeats,
// short runs many.
int auto_repeats(double warmup_seconds);

// Runs every cell strictly sequentially (parallel cells get the machine to
// themselves). Each repeat re-loads the dataset, analyzes it, and writes the
// per-pair field CSVs under `scratch_dir`.
BenchReport run_bench(const std::vector<BenchCell>& cells,
                      const std::filesystem::path& dataset_dir,
                      const std::string& pattern, const RunConfig& base,
                      const RepeatsPolicy& repeats,
                      const std::filesystem::path& scratch_dir);

struct RatioRow {
  std::string kind;    // bfs_vs_pso | image_speedup_vs_serial | subimage_speedup_vs_serial
  std::string detail;  // the cells the ratio compares
  double value = 0;
  std::string note;    // nonempty when a needed cell is missing/failed
};

std::vector<RatioRow> derive_ratios(const BenchReport& report);

// Wide layout: one row per (integer, subpixel) combination, one mean-seconds
// column per mode.
void write_times_csv(const BenchReport& report, const std::filesystem::path& path);
void write_records_csv(const BenchReport& report, const std::filesystem::path& path);
void write_ratios_csv(const std::vector<RatioRow>& ratios, const std::filesystem::path& path);

// "key = value" lines; the run manifest format shared by all tools.
void write_manifest(const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::filesystem::path& path);

std::string cpu_model_name();
std::string timestamp_utc();

}  // namespace dic
