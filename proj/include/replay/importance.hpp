#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "replay/buffer.hpp"
#include "replay/transition.hpp"

namespace replay {

// Read-only view over a learner's value estimates: the online head and the
// (possibly lagged) bootstrap head. Implementations must be safe to call
// concurrently from multiple threads.
class QFunction {
 public:
  virtual ~QFunction() = default;
  virtual int num_actions() const = 0;
  virtual void q_values_into(const Obs& state, std::span<double> out) const = 0;
  virtual void q_target_values_into(const Obs& state, std::span<double> out) const = 0;
};

// Per-buffer-index surprise scores, stamped with the episode whose agent
// snapshot produced them.
struct ScoreVector {
  std::vector<double> scores;
  int64_t computed_at_episode = 0;
};

// One-step Bellman residual magnitude |Q(s,a) - r - gamma * max_a' Qt(s',a')|;
// the bootstrap term is dropped for terminal transitions.
double td_error(const QFunction& q, const Transition& t, double gamma);

// scores[i] = td_error(buffer[i]) for every index, against a fixed parameter
// snapshot. Parallelized across indices; element writes are disjoint, so the
// result is bit-identical to score_buffer_serial.
ScoreVector score_buffer(const QFunction& q, const ReplayBuffer& buffer,
                         double gamma, int64_t episode = 0);

// Single-threaded reference the parallel kernel is tested against.
ScoreVector score_buffer_serial(const QFunction& q, const ReplayBuffer& buffer,
                                double gamma, int64_t episode = 0);

// Scatter-plot feed: one "td_error,reward" row per listed index.
void dump_td_reward_csv(std::ostream& os, const QFunction& q,
                        const ReplayBuffer& buffer,
                        std::span<const size_t> indices, double gamma);

}  // namespace replay
