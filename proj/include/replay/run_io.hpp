#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "replay/harness.hpp"

namespace replay {

inline constexpr const char* kArtifactVersion = "replaylab-0.1.0";

// Learning-curve CSV: episode,return,moving_avg,loss. Timing lives in its
// own sidecar so these bytes depend only on the config and seed.
void write_run_csv(std::ostream& os, const RunRecord& rec, int ma_window);
void write_timing_csv(std::ostream& os, const RunRecord& rec);
void write_eval_csv(std::ostream& os, const RunRecord& rec);
void write_indices_csv(std::ostream& os, const RunRecord& rec);

void write_toy_frequency_csv(std::ostream& os, const ToyRecord& rec);
void write_toy_qtable_csv(std::ostream& os, const ToyRecord& rec);

struct Manifest {
  std::string version = kArtifactVersion;
  std::string command;
  std::vector<std::pair<std::string, std::string>> config_kv;
  std::vector<uint64_t> seeds;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;  // paths relative to the manifest's directory
};

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);
std::string utc_now_iso8601();

// Last moving_avg value of a CSV produced by write_run_csv.
double final_moving_avg_of_csv(const std::filesystem::path& csv);

struct RunDirSummary {
  std::string dir;
  std::string env;
  std::string sampler;
  int ma_window = 0;
  std::vector<double> finals;  // final moving average per seed, manifest order
  int k = 0;
  double topk = 0.0;
  double topk_std = 0.0;  // sample std over the k selected seeds
};

// Reads dir/manifest.json and the per-seed learning-curve CSVs it points
// to, then applies the top-k aggregate. Throws naming the offending file.
RunDirSummary summarize_run_dir(const std::filesystem::path& dir, int k);

void write_report_csv(std::ostream& os, std::span<const RunDirSummary> rows);
void print_report(std::ostream& os, std::span<const RunDirSummary> rows);

}  // namespace replay
