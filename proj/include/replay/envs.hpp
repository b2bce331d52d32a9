#pragma once

#include <memory>
#include <string>

#include "replay/buffer.hpp"
#include "replay/rng.hpp"
#include "replay/transition.hpp"

namespace replay {

struct StepResult {
  Obs next_state;
  double reward = 0.0;
  bool done = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual int num_actions() const = 0;
  virtual int obs_dim() const = 0;
  virtual int max_steps() const = 0;
  virtual Obs reset(Rng& rng) = 0;
  // Throws std::logic_error("episode terminated") if called after done.
  virtual StepResult step(int action) = 0;
};

// Chain of 40 states labeled 1..40. Start at 6; 40 is the goal (+1,
// terminal); 3 is a trap (-2 on entry, the walk continues); moving left at
// 1 stays at 1. Episodes also cut off at 1000 steps. Observations carry the
// 1-based state label as a single double; onehot() is provided for
// function-approximation agents.
class GridWorld1D final : public Env {
 public:
  static constexpr int kSize = 40;
  static constexpr int kStart = 6;
  static constexpr int kGoal = 40;
  static constexpr int kTrap = 3;
  static constexpr int kMaxSteps = 1000;
  static constexpr int kLeft = 0;
  static constexpr int kRight = 1;

  int num_actions() const override { return 2; }
  int obs_dim() const override { return 1; }
  int max_steps() const override { return kMaxSteps; }
  Obs reset(Rng& rng) override;
  StepResult step(int action) override;

  int position() const { return position_; }
  static Obs onehot(int state);

 private:
  int position_ = kStart;
  int steps_ = 0;
  bool done_ = false;
};

// Classic cart-pole balancing task: Euler integration at 0.02 s, push force
// 10 N, termination when the cart leaves +-2.4 or the pole passes 12
// degrees, capped at 200 steps, +1 reward every step.
class CartPole final : public Env {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kXLimit = 2.4;
  static constexpr double kThetaLimit = 0.20943951023931953;  // 12 degrees
  static constexpr int kMaxSteps = 200;

  int num_actions() const override { return 2; }
  int obs_dim() const override { return 4; }
  int max_steps() const override { return kMaxSteps; }
  Obs reset(Rng& rng) override;
  StepResult step(int action) override;

 private:
  double x_ = 0.0, x_dot_ = 0.0, theta_ = 0.0, theta_dot_ = 0.0;
  int steps_ = 0;
  bool done_ = false;
};

// Runs uniform-random episodes back to back until exactly n transitions are
// stored; the last episode may be cut mid-way.
ReplayBuffer collect_random_buffer(Env& env, size_t n, Rng& rng);

// "gridworld" or "cartpole".
std::unique_ptr<Env> make_env(const std::string& id);

}  // namespace replay
