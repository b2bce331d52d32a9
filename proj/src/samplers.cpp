#include "replay/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace replay {

void SamplerSpec::validate() const {
  if (batch_size < 1) throw std::invalid_argument("SamplerSpec: batch_size must be >= 1");
  if (grad_steps < 1) throw std::invalid_argument("SamplerSpec: grad_steps must be >= 1");
  if (!(mixing_p >= 0.0 && mixing_p <= 1.0)) {
    throw std::invalid_argument("SamplerSpec: mixing_p must lie in [0,1]");
  }
  if (!(per_alpha >= 0.0)) throw std::invalid_argument("SamplerSpec: per_alpha must be >= 0");
  if (!(per_beta >= 0.0 && per_beta <= 1.0)) {
    throw std::invalid_argument("SamplerSpec: per_beta must lie in [0,1]");
  }
  if (!(per_epsilon > 0.0)) throw std::invalid_argument("SamplerSpec: per_epsilon must be > 0");
}

std::vector<size_t> top_indices(std::span<const double> scores, size_t k) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("top_indices: non-finite score");
  }
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  k = std::min(k, idx.size());
  auto better = [&scores](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a > b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

size_t pivot_batch_count(double mixing_p, int grad_steps) {
  // The guard keeps e.g. (1-0.3)*10 from ceiling to 8; it can only misfire
  // if (1-p)*G sits within 1e-9 above an integer, far below double error
  // for any sane G.
  double raw = (1.0 - mixing_p) * static_cast<double>(grad_steps);
  double n = std::ceil(raw - 1e-9);
  if (n < 0.0) n = 0.0;
  return static_cast<size_t>(n);
}

namespace {

std::vector<size_t> block_back(size_t pivot, size_t b) {
  size_t first = pivot + 1 >= b ? pivot + 1 - b : 0;
  std::vector<size_t> out;
  out.reserve(pivot - first + 1);
  for (size_t i = first; i <= pivot; ++i) out.push_back(i);
  return out;
}

std::vector<size_t> block_forward(size_t pivot, size_t b, size_t buf_len) {
  size_t last = std::min(buf_len - 1, pivot + b - 1);
  std::vector<size_t> out;
  out.reserve(last - pivot + 1);
  for (size_t i = pivot; i <= last; ++i) out.push_back(i);
  return out;
}

}  // namespace

EpochPlan plan_ier(std::span<const double> scores, size_t buf_len,
                   const SamplerSpec& spec, Rng& rng) {
  spec.validate();
  if (buf_len == 0) throw std::invalid_argument("plan_ier: empty buffer");
  if (scores.size() != buf_len) {
    throw std::invalid_argument("plan_ier: scores length must equal buffer length");
  }
  const auto b = static_cast<size_t>(spec.batch_size);
  const auto g_total = static_cast<size_t>(spec.grad_steps);

  std::vector<size_t> ranking =
      spec.pivot_mode == PivotMode::TdTop
          ? top_indices(scores, std::min(g_total, buf_len))
          : sample_indices(rng, buf_len, std::min(g_total, buf_len));

  const size_t n_pivot = pivot_batch_count(spec.mixing_p, spec.grad_steps);
  EpochPlan plan;
  plan.batches.reserve(g_total);
  for (size_t g = 0; g < g_total; ++g) {
    if (g < n_pivot) {
      size_t pivot = ranking[g % ranking.size()];
      plan.pivot_indices.push_back(pivot);
      switch (spec.fill_mode) {
        case FillMode::LookBack:
          plan.batches.push_back(block_back(pivot, b));
          break;
        case FillMode::LookForward:
          plan.batches.push_back(block_forward(pivot, b, buf_len));
          break;
        case FillMode::Uniform: {
          std::vector<size_t> batch{pivot};
          auto extra = sample_indices(rng, buf_len, b - 1);
          batch.insert(batch.end(), extra.begin(), extra.end());
          plan.batches.push_back(std::move(batch));
          break;
        }
      }
    } else {
      plan.batches.push_back(sample_indices(rng, buf_len, b));
    }
  }
  return plan;
}

EpochPlan plan_uer(size_t buf_len, const SamplerSpec& spec, Rng& rng) {
  spec.validate();
  if (buf_len == 0) throw std::invalid_argument("plan_uer: empty buffer");
  EpochPlan plan;
  plan.batches.reserve(static_cast<size_t>(spec.grad_steps));
  for (int g = 0; g < spec.grad_steps; ++g) {
    plan.batches.push_back(sample_indices(rng, buf_len, static_cast<size_t>(spec.batch_size)));
  }
  return plan;
}

EpochPlan plan_rer(RerCursor& cursor, size_t buf_len, const SamplerSpec& spec) {
  spec.validate();
  const auto b = static_cast<size_t>(spec.batch_size);
  if (buf_len < b) throw std::invalid_argument("plan_rer: buffer shorter than batch_size");
  if (cursor.pos > buf_len) {
    throw std::invalid_argument("plan_rer: cursor beyond buffer length");
  }
  EpochPlan plan;
  plan.batches.reserve(static_cast<size_t>(spec.grad_steps));
  for (int g = 0; g < spec.grad_steps; ++g) {
    if (cursor.pos < b) cursor.pos = buf_len;
    std::vector<size_t> batch;
    batch.reserve(b);
    for (size_t i = cursor.pos - b; i < cursor.pos; ++i) batch.push_back(i);
    plan.batches.push_back(std::move(batch));
    cursor.pos -= b;
  }
  return plan;
}

EpochPlan plan_oer(std::span<const double> scores, size_t buf_len,
                   const SamplerSpec& spec) {
  spec.validate();
  if (buf_len == 0) throw std::invalid_argument("plan_oer: empty buffer");
  if (scores.size() != buf_len) {
    throw std::invalid_argument("plan_oer: scores length must equal buffer length");
  }
  const auto b = static_cast<size_t>(spec.batch_size);
  const auto g_total = static_cast<size_t>(spec.grad_steps);
  const size_t take = std::min(b * g_total, buf_len);
  std::vector<size_t> ranked = top_indices(scores, take);

  EpochPlan plan;
  plan.batches.reserve(g_total);
  for (size_t g = 0; g < g_total; ++g) {
    size_t first = std::min(g * b, take);
    size_t last = std::min(first + b, take);
    plan.batches.emplace_back(ranked.begin() + static_cast<ptrdiff_t>(first),
                              ranked.begin() + static_cast<ptrdiff_t>(last));
  }
  return plan;
}

void per_update(SumTree& tree, size_t index, double td_abs, const SamplerSpec& spec) {
  spec.validate();
  tree.set(index, std::pow(td_abs + spec.per_epsilon, spec.per_alpha));
}

EpochPlan plan_per(const SumTree& tree, size_t buf_len, const SamplerSpec& spec,
                   Rng& rng) {
  spec.validate();
  if (buf_len == 0) throw std::invalid_argument("plan_per: empty buffer");
  const double total = tree.total();
  if (!(total > 0.0)) throw std::invalid_argument("plan_per: total priority mass is zero");
  const auto b = static_cast<size_t>(spec.batch_size);

  EpochPlan plan;
  plan.batches.reserve(static_cast<size_t>(spec.grad_steps));
  plan.weights.reserve(static_cast<size_t>(spec.grad_steps));
  for (int g = 0; g < spec.grad_steps; ++g) {
    std::vector<size_t> batch(b);
    std::vector<double> w(b);
    for (size_t j = 0; j < b; ++j) {
      // Stratified draw: one sample per equal-mass segment of the tree.
      double mass = (static_cast<double>(j) + rng.uniform01()) * total / static_cast<double>(b);
      if (mass >= total) mass = std::nextafter(total, 0.0);
      size_t idx = tree.find_prefix(mass);
      if (idx >= buf_len) idx = buf_len - 1;
      batch[j] = idx;
      double prob = tree.leaf(idx) / total;
      w[j] = std::pow(static_cast<double>(buf_len) * prob, -spec.per_beta);
    }
    double w_max = *std::max_element(w.begin(), w.end());
    for (double& x : w) x /= w_max;
    plan.batches.push_back(std::move(batch));
    plan.weights.push_back(std::move(w));
  }
  return plan;
}

}  // namespace replay
