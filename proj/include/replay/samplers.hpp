#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "replay/rng.hpp"
#include "replay/sum_tree.hpp"

namespace replay {

enum class Strategy { UER, RER, OER, PER, IER };

// How IER picks its pivot transitions: the top TD scores (canonical) or
// uniform draws (ablation).
enum class PivotMode { TdTop, Uniform };

// How a pivot's batch is filled: its temporal predecessors (canonical),
// its successors (the forward variant), or uniform draws around the pivot.
enum class FillMode { LookBack, LookForward, Uniform };

struct SamplerSpec {
  Strategy strategy = Strategy::UER;
  int batch_size = 64;
  int grad_steps = 1;
  double mixing_p = 0.0;
  PivotMode pivot_mode = PivotMode::TdTop;
  FillMode fill_mode = FillMode::LookBack;
  double per_alpha = 0.4;
  double per_beta = 0.6;
  double per_epsilon = 1e-6;

  // Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

// One epoch's worth of minibatch index lists. batches always has exactly
// grad_steps entries; an entry may be shorter than batch_size near buffer
// edges (or empty for a score-exhausted ordered plan) and the trainer skips
// empty ones. pivot_indices lists the anchor of each pivot-filled batch, in
// batch order; weights is parallel to batches and only populated by the
// proportional sampler.
struct EpochPlan {
  std::vector<std::vector<size_t>> batches;
  std::vector<size_t> pivot_indices;
  std::vector<std::vector<double>> weights;
};

// Reverse-walk position. pos counts transitions from the buffer front; the
// default 0 forces a reset to the newest block on first use, so a fresh
// cursor and an exhausted one behave identically.
struct RerCursor {
  size_t pos = 0;
};

// Indices of the k highest scores, descending score, ties broken toward the
// larger (more recent) index. k is clamped to scores.size().
std::vector<size_t> top_indices(std::span<const double> scores, size_t k);

// Number of pivot-anchored batches for a mixing fraction: ceil((1-p)*G),
// computed with a small guard so binary fractions of G land exactly.
size_t pivot_batch_count(double mixing_p, int grad_steps);

EpochPlan plan_ier(std::span<const double> scores, size_t buf_len,
                   const SamplerSpec& spec, Rng& rng);

EpochPlan plan_uer(size_t buf_len, const SamplerSpec& spec, Rng& rng);

// Advances cursor by grad_steps blocks; state persists across calls.
EpochPlan plan_rer(RerCursor& cursor, size_t buf_len, const SamplerSpec& spec);

EpochPlan plan_oer(std::span<const double> scores, size_t buf_len,
                   const SamplerSpec& spec);

// Leaf priority <- (td_abs + per_epsilon)^per_alpha.
void per_update(SumTree& tree, size_t index, double td_abs, const SamplerSpec& spec);

EpochPlan plan_per(const SumTree& tree, size_t buf_len, const SamplerSpec& spec,
                   Rng& rng);

}  // namespace replay
