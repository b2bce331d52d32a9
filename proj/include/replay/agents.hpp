#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "replay/importance.hpp"
#include "replay/mlp.hpp"
#include "replay/rng.hpp"
#include "replay/transition.hpp"

namespace replay {

// Thrown when training blows up (non-finite loss or runaway values); the
// harness converts it into a flagged RunRecord instead of crashing siblings.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Q-table learner over integer-labeled states (1-based, matching the
// gridworld). Acts as its own bootstrap target.
class TabularQ final : public QFunction {
 public:
  TabularQ(int num_states, int num_actions, double lr, double gamma);

  int num_actions() const override { return num_actions_; }
  void q_values_into(const Obs& state, std::span<double> out) const override;
  void q_target_values_into(const Obs& state, std::span<double> out) const override;

  double q(int state, int action) const;
  void set_q(int state, int action, double value);
  double gamma() const { return gamma_; }

  // One Q-learning sweep over the batch, most recent transition first
  // (descending buffer index; reversed row order if indices are absent).
  // Later updates within the batch see earlier ones. Returns the mean
  // squared residual measured as each row was visited.
  double update(const Batch& batch);

  // Ties resolve to the lowest action index.
  int greedy_action(int state) const;

  void save_csv(std::ostream& os) const;

 private:
  int num_states_, num_actions_;
  double lr_, gamma_;
  std::vector<double> table_;

  int state_label(const Obs& state) const;
  double& cell(int state, int action);
  double cell(int state, int action) const;
};

struct DqnHyper {
  std::vector<int> hidden = {8, 5};
  double gamma = 0.9;
  double lr = 5e-5;
  int target_update_every = 30;
  double max_epsilon = 1.0;
  double min_epsilon = 0.01;
  double decay_ratio = 0.4;
  // Length of the exploration schedule in whatever unit the caller feeds to
  // act(); epsilon reaches min after decay_ratio * schedule_horizon.
  int64_t schedule_horizon = 1000;

  void validate() const;
};

// DQN: online MLP trained by Adam on squared TD error against a lagged
// target copy, epsilon-greedy behavior policy.
class DqnLearner final : public QFunction {
 public:
  DqnLearner(int obs_dim, int num_actions, DqnHyper hyper, Rng& init_rng);

  int num_actions() const override { return target_.output_size(); }
  void q_values_into(const Obs& state, std::span<double> out) const override;
  void q_target_values_into(const Obs& state, std::span<double> out) const override;

  double epsilon(int64_t schedule_pos) const;
  int act(const Obs& state, Rng& rng, int64_t schedule_pos) const;

  // One gradient step on the batch; returns the loss. Copies online->target
  // every hyper.target_update_every steps. Throws DivergenceError when the
  // loss stops being finite or value magnitudes pass 1e6.
  double train_step(const Batch& batch);

  int64_t train_steps() const { return steps_; }
  const DqnHyper& hyper() const { return hyper_; }
  const MlpQNet& online_net() const { return online_; }
  const MlpQNet& target_net() const { return target_; }
  MlpQNet& online_net() { return online_; }
  void sync_target();

  void save_params(std::ostream& os) const;

 private:
  DqnHyper hyper_;
  MlpQNet online_;
  MlpQNet target_;
  AdamState adam_;
  int64_t steps_ = 0;
  std::vector<double> grad_;
  std::vector<double> scratch_;
};

}  // namespace replay
