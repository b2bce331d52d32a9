#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace replay {

// Trailing mean with a growing head: element i averages
// series[max(0, i-window+1) .. i].
std::vector<double> moving_average(std::span<const double> series, int window);

// Mean of the k largest values.
double topk_final(std::span<const double> final_values, int k);

struct FaultAlgorithm {
  double success_value = 0.0;
  double fault_probability = 0.0;
};

// Monte-Carlo model of seed-level run faults: each seeded run of an
// algorithm yields its nominal value, or 0 with fault_probability, plus
// optional Gaussian noise on every outcome.
struct FaultModel {
  std::vector<FaultAlgorithm> algorithms = {{0.9, 0.5}, {1.0, 0.5}, {0.8, 0.5}};
  double gaussian_sigma = 0.0;
  int environments = 20;
  int seeds_per_env = 10;
  int trials = 500;
  int top_k = 3;

  void validate() const;
  // Index of the algorithm with the strictly largest success value.
  size_t ground_truth() const;
};

struct FaultAccuracy {
  double topk = 0.0;
  double avg = 0.0;
};

// Fraction of (trial, environment) cells where the ground-truth algorithm
// strictly wins under the top-k metric and under the plain mean. Ties count
// as misses. Parallel over trials with independent per-trial streams;
// bit-identical to fault_sim_serial.
FaultAccuracy fault_sim(const FaultModel& model, uint64_t seed);

// Single-threaded reference for the parallel version.
FaultAccuracy fault_sim_serial(const FaultModel& model, uint64_t seed);

}  // namespace replay
