#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "replay/agents.hpp"
#include "replay/samplers.hpp"

namespace replay {

// Unit of the epsilon schedule position fed to DqnLearner::act. Episode
// units are the default: with env-step units, short early episodes starve
// the schedule and exploration never anneals on desk-scale budgets.
enum class ScheduleUnit { Episodes, EnvSteps };

// Per-purpose RNG stream tags. Each harness run derives independent streams
// as Rng::stream(seed, tag); the values are part of the determinism contract
// (a manifest re-run must consume randomness identically).
inline constexpr uint64_t kTagEnv = 1;
inline constexpr uint64_t kTagAction = 2;
inline constexpr uint64_t kTagPlan = 3;
inline constexpr uint64_t kTagInit = 4;
inline constexpr uint64_t kTagFill = 5;
inline constexpr uint64_t kTagEval = 6;

struct ExperimentConfig {
  std::string env_id = "cartpole";
  std::string agent_id = "dqn";  // "dqn" (cartpole) or "tabular" (gridworld)
  SamplerSpec sampler;

  int64_t episodes = 1000;
  uint64_t seed = 1;
  size_t buffer_capacity = 1000000;
  int ma_window = 50;
  // Every eval_every episodes run one greedy episode on the side (0 = off).
  int64_t eval_every = 0;
  bool log_sampled_indices = false;

  DqnHyper dqn;  // dqn.schedule_horizon == 0 means derive from episodes
  ScheduleUnit schedule_unit = ScheduleUnit::Episodes;

  double tabular_lr = 0.1;
  double tabular_gamma = 0.99;
  double tabular_epsilon = 0.3;  // behavior-policy exploration, online runs only

  int64_t toy_buffer_size = 30000;
  int64_t toy_epochs = 100;
  double toy_eval_epsilon = 0.0;

  void validate() const;
};

// Packaged per-task presets; CLI flags and config files override fields.
ExperimentConfig default_config(const std::string& env_id);

struct RunRecord {
  uint64_t seed = 0;
  std::vector<double> episode_return;
  std::vector<double> loss_mean;  // 0 for episodes with no learner steps
  std::vector<double> wall_ms;
  std::vector<int64_t> eval_episode;
  std::vector<double> eval_return;
  std::vector<uint64_t> sampled_index_log;  // filled when log_sampled_indices
  int64_t total_learner_steps = 0;
  bool diverged = false;
  std::string divergence_reason;
};

struct ToyRecord {
  uint64_t seed = 0;
  std::vector<int64_t> absolute_frequency;  // index s-1 counts samples of state s
  std::vector<double> q_table;              // row-major (state-1) * num_actions + action
  int64_t total_sampled = 0;
  bool reached_goal = false;
  int64_t rollout_steps = 0;
  double rollout_return = 0.0;
};

// One seeded online run: per episode, roll out with the behavior policy,
// push every transition, score the buffer (strategies that need it), build
// one epoch plan, take its gradient steps. Divergence flags the record and
// stops the run.
RunRecord run_online(const ExperimentConfig& config);

// Offline protocol: fill a random-walk buffer once, then train against the
// frozen buffer for toy_epochs plan+update rounds, tallying every sampled
// transition's state; ends with a greedy rollout from the start state.
ToyRecord run_offline_toy(const ExperimentConfig& config);

// Independent runs, one per seed, in seed order. Per-run failures are
// flagged on their own records and never abort siblings.
std::vector<RunRecord> run_multi_seed(const ExperimentConfig& config,
                                      std::span<const uint64_t> seeds);

}  // namespace replay
