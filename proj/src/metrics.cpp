#include "replay/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "replay/rng.hpp"

namespace replay {

std::vector<double> moving_average(std::span<const double> series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  if (series.empty()) throw std::invalid_argument("moving_average: empty series");
  std::vector<double> out(series.size());
  double acc = 0.0;
  const auto w = static_cast<size_t>(window);
  for (size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= w) acc -= series[i - w];
    size_t len = std::min(i + 1, w);
    out[i] = acc / static_cast<double>(len);
  }
  return out;
}

double topk_final(std::span<const double> final_values, int k) {
  if (k < 1 || static_cast<size_t>(k) > final_values.size()) {
    throw std::invalid_argument("topk_final: k out of range");
  }
  std::vector<double> v(final_values.begin(), final_values.end());
  std::partial_sort(v.begin(), v.begin() + k, v.end(), std::greater<>());
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += v[static_cast<size_t>(i)];
  return acc / static_cast<double>(k);
}

void FaultModel::validate() const {
  if (algorithms.size() < 2) throw std::invalid_argument("FaultModel: need at least two algorithms");
  for (const auto& a : algorithms) {
    if (!(a.fault_probability >= 0.0 && a.fault_probability <= 1.0)) {
      throw std::invalid_argument("FaultModel: fault_probability must lie in [0,1]");
    }
    if (!std::isfinite(a.success_value)) {
      throw std::invalid_argument("FaultModel: non-finite success value");
    }
  }
  if (!(gaussian_sigma >= 0.0)) throw std::invalid_argument("FaultModel: sigma must be >= 0");
  if (environments < 1 || seeds_per_env < 1 || trials < 1) {
    throw std::invalid_argument("FaultModel: counts must be positive");
  }
  if (top_k < 1 || top_k > seeds_per_env) {
    throw std::invalid_argument("FaultModel: top_k must lie in [1, seeds_per_env]");
  }
  ground_truth();
}

size_t FaultModel::ground_truth() const {
  size_t best = 0;
  for (size_t i = 1; i < algorithms.size(); ++i) {
    if (algorithms[i].success_value > algorithms[best].success_value) best = i;
  }
  for (size_t i = 0; i < algorithms.size(); ++i) {
    if (i != best && algorithms[i].success_value == algorithms[best].success_value) {
      throw std::invalid_argument("FaultModel: ground truth must be a unique maximum");
    }
  }
  return best;
}

namespace {

// Counts ground-truth wins for one trial across all environments. One rng
// stream per trial keeps the parallel schedule irrelevant to the draws.
void run_trial(const FaultModel& model, size_t truth, Rng& rng,
               int64_t& topk_wins, int64_t& avg_wins) {
  const auto n_alg = model.algorithms.size();
  const auto n_seeds = static_cast<size_t>(model.seeds_per_env);
  std::vector<double> outcomes(n_seeds);
  std::vector<double> topk_score(n_alg), avg_score(n_alg);

  for (int e = 0; e < model.environments; ++e) {
    for (size_t a = 0; a < n_alg; ++a) {
      const auto& alg = model.algorithms[a];
      double sum = 0.0;
      for (size_t s = 0; s < n_seeds; ++s) {
        double v = rng.uniform01() < alg.fault_probability ? 0.0 : alg.success_value;
        if (model.gaussian_sigma > 0.0) v += model.gaussian_sigma * rng.normal();
        outcomes[s] = v;
        sum += v;
      }
      topk_score[a] = topk_final(outcomes, model.top_k);
      avg_score[a] = sum / static_cast<double>(n_seeds);
    }
    auto strict_win = [truth](const std::vector<double>& score) {
      for (size_t a = 0; a < score.size(); ++a) {
        if (a != truth && score[a] >= score[truth]) return false;
      }
      return true;
    };
    if (strict_win(topk_score)) ++topk_wins;
    if (strict_win(avg_score)) ++avg_wins;
  }
}

FaultAccuracy sim_impl(const FaultModel& model, uint64_t seed, bool parallel) {
  model.validate();
  const size_t truth = model.ground_truth();
  int64_t topk_wins = 0;
  int64_t avg_wins = 0;

#pragma omp parallel for schedule(static) reduction(+ : topk_wins, avg_wins) if (parallel)
  for (int trial = 0; trial < model.trials; ++trial) {
    Rng rng = Rng::stream(seed, 0x666175756c74ull ^ (static_cast<uint64_t>(trial) << 8));
    int64_t tw = 0, aw = 0;
    run_trial(model, truth, rng, tw, aw);
    topk_wins += tw;
    avg_wins += aw;
  }

  const double cells = static_cast<double>(model.trials) * model.environments;
  return {static_cast<double>(topk_wins) / cells, static_cast<double>(avg_wins) / cells};
}

}  // namespace

FaultAccuracy fault_sim(const FaultModel& model, uint64_t seed) {
  return sim_impl(model, seed, true);
}

FaultAccuracy fault_sim_serial(const FaultModel& model, uint64_t seed) {
  return sim_impl(model, seed, false);
}

}  // namespace replay
