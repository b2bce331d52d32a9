#include "replay/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace replay {

Obs GridWorld1D::reset(Rng&) {
  position_ = kStart;
  steps_ = 0;
  done_ = false;
  return {static_cast<double>(position_)};
}

StepResult GridWorld1D::step(int action) {
  if (done_) throw std::logic_error("episode terminated");
  if (action != kLeft && action != kRight) {
    throw std::invalid_argument("GridWorld1D: action must be 0 or 1");
  }
  position_ += action == kRight ? 1 : -1;
  if (position_ < 1) position_ = 1;
  ++steps_;

  StepResult r;
  r.next_state = {static_cast<double>(position_)};
  if (position_ == kGoal) {
    r.reward = 1.0;
    done_ = true;
  } else if (position_ == kTrap) {
    r.reward = -2.0;
  }
  if (steps_ >= kMaxSteps) done_ = true;
  r.done = done_;
  return r;
}

Obs GridWorld1D::onehot(int state) {
  if (state < 1 || state > kSize) throw std::out_of_range("GridWorld1D: state outside 1..40");
  Obs v(kSize, 0.0);
  v[static_cast<size_t>(state - 1)] = 1.0;
  return v;
}

Obs CartPole::reset(Rng& rng) {
  x_ = rng.uniform01() * 0.1 - 0.05;
  x_dot_ = rng.uniform01() * 0.1 - 0.05;
  theta_ = rng.uniform01() * 0.1 - 0.05;
  theta_dot_ = rng.uniform01() * 0.1 - 0.05;
  steps_ = 0;
  done_ = false;
  return {x_, x_dot_, theta_, theta_dot_};
}

StepResult CartPole::step(int action) {
  if (done_) throw std::logic_error("episode terminated");
  if (action != 0 && action != 1) {
    throw std::invalid_argument("CartPole: action must be 0 or 1");
  }
  const double force = action == 1 ? kForceMag : -kForceMag;
  const double cos_t = std::cos(theta_);
  const double sin_t = std::sin(theta_);
  const double total_mass = kMassCart + kMassPole;
  const double pole_mass_length = kMassPole * kHalfLength;

  const double temp = (force + pole_mass_length * theta_dot_ * theta_dot_ * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  // Semi-explicit Euler: positions advance with the old velocities.
  x_ += kTau * x_dot_;
  x_dot_ += kTau * x_acc;
  theta_ += kTau * theta_dot_;
  theta_dot_ += kTau * theta_acc;
  ++steps_;

  done_ = std::fabs(x_) > kXLimit || std::fabs(theta_) > kThetaLimit || steps_ >= kMaxSteps;
  StepResult r;
  r.next_state = {x_, x_dot_, theta_, theta_dot_};
  r.reward = 1.0;
  r.done = done_;
  return r;
}

ReplayBuffer collect_random_buffer(Env& env, size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("collect_random_buffer: n must be positive");
  ReplayBuffer buf(n);
  int64_t episode = 0;
  while (buf.size() < n) {
    Obs state = env.reset(rng);
    int64_t step = 0;
    bool done = false;
    while (!done && buf.size() < n) {
      int action = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(env.num_actions())));
      StepResult r = env.step(action);
      buf.push({state, action, r.reward, r.next_state, r.done, episode, step});
      state = r.next_state;
      done = r.done;
      ++step;
    }
    ++episode;
  }
  return buf;
}

std::unique_ptr<Env> make_env(const std::string& id) {
  if (id == "gridworld") return std::make_unique<GridWorld1D>();
  if (id == "cartpole") return std::make_unique<CartPole>();
  throw std::invalid_argument("make_env: unknown env '" + id + "' (expected gridworld or cartpole)");
}

}  // namespace replay
