#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <omp.h>

#include "replay/agents.hpp"
#include "replay/envs.hpp"
#include "replay/importance.hpp"
#include "replay/metrics.hpp"
#include "replay/rng.hpp"

using namespace replay;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Median-free quick timing: best of `reps` runs, which is stable enough for a
// smoke benchmark and keeps total runtime low.
template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    double dt = seconds_since(t0);
    if (dt < best) best = dt;
  }
  return best;
}

void bench_score_buffer() {
  Rng rng(7);
  auto env = make_env("cartpole");
  ReplayBuffer buf = collect_random_buffer(*env, 20000, rng);

  DqnHyper hyper;
  DqnLearner learner(4, 2, hyper, rng);

  ScoreVector serial, parallel;
  double t_serial = best_of(3, [&] { serial = score_buffer_serial(learner, buf, hyper.gamma); });
  double t_parallel = best_of(3, [&] { parallel = score_buffer(learner, buf, hyper.gamma); });

  bool identical = serial.scores == parallel.scores;
  std::printf("score_buffer  n=%zu  serial %.3fs  parallel %.3fs  speedup %.2fx  identical=%s\n",
              buf.size(), t_serial, t_parallel, t_serial / t_parallel,
              identical ? "yes" : "NO");
}

void bench_fault_sim() {
  FaultModel model;
  model.trials = 2000;

  FaultAccuracy serial{}, parallel{};
  double t_serial = best_of(3, [&] { serial = fault_sim_serial(model, 1); });
  double t_parallel = best_of(3, [&] { parallel = fault_sim(model, 1); });

  bool identical = serial.topk == parallel.topk && serial.avg == parallel.avg;
  std::printf("fault_sim     trials=%d  serial %.3fs  parallel %.3fs  speedup %.2fx  identical=%s\n",
              model.trials, t_serial, t_parallel, t_serial / t_parallel,
              identical ? "yes" : "NO");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bench_score_buffer();
  bench_fault_sim();
  return 0;
}
