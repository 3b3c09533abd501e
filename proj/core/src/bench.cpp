#include "dic/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include "dic/error.hpp"

namespace dic {

int auto_repeats(double warmup_seconds) {
  if (warmup_seconds > 60.0) return 25;
  if (warmup_seconds >= 10.0) return 100;
  if (warmup_seconds >= 1.0) return 250;
  return 1000;
}

namespace {

struct CellRun {
  double seconds = 0;
  int pair_count = 0;
  long long evaluations = 0;
  bool hard_failed = false;
  std::string error;
};

// One end-to-end repetition: load, analyze, serialize fields. This is the
// timed unit.
CellRun run_once(const std::filesystem::path& dataset_dir, const std::string& pattern,
                 const RunConfig& cfg, const std::filesystem::path& out_dir) {
  CellRun run;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<GrayImage> images = load_sequence(dataset_dir, pattern);
  const std::vector<DisplacementField> fields = analyze_sequence(images, cfg);
  for (const auto& field : fields) {
    write_field_csv(field, out_dir / field_filename(field.pair_index));
    if (field.failed()) {
      run.hard_failed = true;
      if (run.error.empty()) run.error = field.error;
    }
    for (const auto& r : field.records) run.evaluations += r.evaluations;
  }
  const auto t1 = std::chrono::steady_clock::now();
  run.seconds = std::chrono::duration<double>(t1 - t0).count();
  run.pair_count = static_cast<int>(fields.size());
  return run;
}

std::string cell_dir_name(const BenchCell& cell) {
  return "cell-" + to_string(cell.integer_method) + "-" + to_string(cell.subpixel_method) +
         "-" + to_string(cell.mode);
}

}  // namespace

BenchReport run_bench(const std::vector<BenchCell>& cells,
                      const std::filesystem::path& dataset_dir,
                      const std::string& pattern, const RunConfig& base,
                      const RepeatsPolicy& repeats,
                      const std::filesystem::path& scratch_dir) {
  if (cells.empty()) throw Error("empty benchmark matrix");
  if (!repeats.auto_bands && repeats.fixed < 1) throw Error("repeats must be >= 1");

  BenchReport report;
  report.dataset_id = dataset_dir.filename().string();
  if (report.dataset_id.empty()) report.dataset_id = dataset_dir.string();
  report.cpu_model = cpu_model_name();
  report.hardware_threads = std::thread::hardware_concurrency();
  report.worker_count = base.worker_count;
  report.timestamp = timestamp_utc();

  for (const auto& cell : cells) {
    BenchRecord rec;
    rec.cell = cell;
    rec.dataset_id = report.dataset_id;

    RunConfig cfg = base;
    cfg.integer_method = cell.integer_method;
    cfg.subpixel_method = cell.subpixel_method;
    cfg.mode = cell.mode;

    const auto out_dir = scratch_dir / cell_dir_name(cell);
    try {
      std::filesystem::create_directories(out_dir);

      const CellRun warmup = run_once(dataset_dir, pattern, cfg, out_dir);
      if (warmup.hard_failed) throw Error(warmup.error);

      rec.repeats = repeats.auto_bands ? auto_repeats(warmup.seconds) : repeats.fixed;
      rec.pair_count = warmup.pair_count;
      rec.total_evaluations = warmup.evaluations;

      double sum = 0, sumsq = 0;
      for (int r = 0; r < rec.repeats; ++r) {
        const CellRun run = run_once(dataset_dir, pattern, cfg, out_dir);
        if (run.hard_failed) throw Error(run.error);
        if (run.evaluations != rec.total_evaluations)
          throw Error("evaluation counts differ between repeats");
        sum += run.seconds;
        sumsq += run.seconds * run.seconds;
      }
      rec.mean_s = sum / rec.repeats;
      const double var =
          rec.repeats > 1
              ? std::max(0.0, (sumsq - sum * sum / rec.repeats) / (rec.repeats - 1))
              : 0.0;
      rec.stddev_s = std::sqrt(var);
      rec.per_pair_s = rec.pair_count > 0 ? rec.mean_s / rec.pair_count : 0.0;
      rec.frame_rate_hz = rec.mean_s > 0 ? rec.pair_count / rec.mean_s : 0.0;
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    report.records.push_back(rec);
  }
  return report;
}

namespace {

const BenchRecord* find_cell(const BenchReport& report, IntegerMethod im,
                             SubpixelMethod sm, ExecMode mode) {
  for (const auto& r : report.records)
    if (!r.failed && r.cell.integer_method == im && r.cell.subpixel_method == sm &&
        r.cell.mode == mode && r.mean_s > 0)
      return &r;
  return nullptr;
}

bool have_any(const BenchReport& report, IntegerMethod im) {
  for (const auto& r : report.records)
    if (r.cell.integer_method == im) return true;
  return false;
}

}  // namespace

std::vector<RatioRow> derive_ratios(const BenchReport& report) {
  std::vector<RatioRow> rows;
  const SubpixelMethod subs[] = {SubpixelMethod::nr, SubpixelMethod::icgn,
                                 SubpixelMethod::none};
  const ExecMode modes[] = {ExecMode::serial, ExecMode::subimage_parallel,
                            ExecMode::image_parallel};
  const IntegerMethod ints[] = {IntegerMethod::bfs, IntegerMethod::pso,
                                IntegerMethod::mpso};

  if (have_any(report, IntegerMethod::bfs) && have_any(report, IntegerMethod::pso)) {
    for (auto sm : subs)
      for (auto mode : modes) {
        const auto* bfs = find_cell(report, IntegerMethod::bfs, sm, mode);
        const auto* pso = find_cell(report, IntegerMethod::pso, sm, mode);
        bool wanted = false;
        for (const auto& r : report.records)
          if (r.cell.subpixel_method == sm && r.cell.mode == mode) wanted = true;
        if (!wanted) continue;
        RatioRow row;
        row.kind = "bfs_vs_pso";
        row.detail = "sub=" + to_string(sm) + ",mode=" + to_string(mode) +
                     ",dataset=" + report.dataset_id;
        if (bfs && pso) {
          row.value = bfs->mean_s / pso->mean_s;
        } else {
          row.value = std::numeric_limits<double>::quiet_NaN();
          row.note = "missing cell";
        }
        rows.push_back(row);
      }
  }

  for (auto im : ints)
    for (auto sm : subs) {
      const auto* serial = find_cell(report, im, sm, ExecMode::serial);
      bool wanted = false;
      for (const auto& r : report.records)
        if (r.cell.integer_method == im && r.cell.subpixel_method == sm) wanted = true;
      if (!wanted) continue;
      const struct {
        const char* kind;
        ExecMode mode;
      } targets[] = {{"image_speedup_vs_serial", ExecMode::image_parallel},
                     {"subimage_speedup_vs_serial", ExecMode::subimage_parallel}};
      for (const auto& t : targets) {
        bool mode_wanted = false;
        for (const auto& r : report.records)
          if (r.cell.integer_method == im && r.cell.subpixel_method == sm &&
              r.cell.mode == t.mode)
            mode_wanted = true;
        if (!mode_wanted) continue;
        const auto* par = find_cell(report, im, sm, t.mode);
        RatioRow row;
        row.kind = t.kind;
        row.detail = "int=" + to_string(im) + ",sub=" + to_string(sm) +
                     ",dataset=" + report.dataset_id;
        if (serial && par) {
          row.value = serial->mean_s / par->mean_s;
        } else {
          row.value = std::numeric_limits<double>::quiet_NaN();
          row.note = "missing cell";
        }
        rows.push_back(row);
      }
    }
  return rows;
}

void write_times_csv(const BenchReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());

  std::vector<ExecMode> modes;
  for (auto mode : {ExecMode::serial, ExecMode::subimage_parallel, ExecMode::image_parallel})
    for (const auto& r : report.records)
      if (r.cell.mode == mode) {
        modes.push_back(mode);
        break;
      }

  out << "integer_method,subpixel_method";
  for (auto mode : modes)
    out << "," << report.dataset_id << "_" << to_string(mode) << "_mean_s";
  out << "\n";

  char buf[64];
  for (auto im : {IntegerMethod::bfs, IntegerMethod::pso, IntegerMethod::mpso})
    for (auto sm : {SubpixelMethod::nr, SubpixelMethod::icgn, SubpixelMethod::none}) {
      bool present = false;
      for (const auto& r : report.records)
        if (r.cell.integer_method == im && r.cell.subpixel_method == sm) present = true;
      if (!present) continue;
      out << to_string(im) << "," << to_string(sm);
      for (auto mode : modes) {
        const BenchRecord* rec = nullptr;
        for (const auto& r : report.records)
          if (r.cell.integer_method == im && r.cell.subpixel_method == sm &&
              r.cell.mode == mode)
            rec = &r;
        if (rec == nullptr || rec->failed) {
          out << ",";
        } else {
          std::snprintf(buf, sizeof buf, ",%.6f", rec->mean_s);
          out << buf;
        }
      }
      out << "\n";
    }
  if (!out) throw Error("write failed: " + path.string());
}

void write_records_csv(const BenchReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "integer_method,subpixel_method,mode,dataset,repeats,pairs,mean_s,stddev_s,"
         "per_pair_s,frame_rate_hz,total_evaluations,failed,error\n";
  char buf[256];
  for (const auto& r : report.records) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%d,%d,%.6f,%.6f,%.6f,%.4f,%lld,%d,",
                  to_string(r.cell.integer_method).c_str(),
                  to_string(r.cell.subpixel_method).c_str(),
                  to_string(r.cell.mode).c_str(), r.dataset_id.c_str(), r.repeats,
                  r.pair_count, r.mean_s, r.stddev_s, r.per_pair_s, r.frame_rate_hz,
                  r.total_evaluations, r.failed ? 1 : 0);
    out << buf << r.error << "\n";
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_ratios_csv(const std::vector<RatioRow>& ratios,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "kind,detail,value,note\n";
  char buf[64];
  for (const auto& row : ratios) {
    std::snprintf(buf, sizeof buf, "%.4f", row.value);
    out << row.kind << "," << row.detail << "," << (std::isnan(row.value) ? "" : buf)
        << "," << row.note << "\n";
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_manifest(const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
  if (!out) throw Error("write failed: " + path.string());
}

std::string cpu_model_name() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        std::string name = line.substr(colon + 1);
        if (!name.empty() && name.front() == ' ') name.erase(0, 1);
        return name;
      }
    }
  }
  return "unknown";
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dic
