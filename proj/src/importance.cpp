#include "replay/importance.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "replay/format.hpp"

namespace replay {

namespace {

// Core residual; vals is caller scratch of length num_actions. Assumes the
// action index was validated.
double td_residual(const QFunction& q, const Transition& t, double gamma,
                   std::span<double> vals) {
  q.q_values_into(t.state, vals);
  double q_sa = vals[static_cast<size_t>(t.action)];
  double target = t.reward;
  if (!t.done) {
    q.q_target_values_into(t.next_state, vals);
    target += gamma * *std::max_element(vals.begin(), vals.end());
  }
  return std::fabs(q_sa - target);
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("td_error: gamma must lie in [0,1)");
  }
}

void check_action(const Transition& t, size_t na) {
  if (t.action < 0 || static_cast<size_t>(t.action) >= na) {
    throw std::invalid_argument("td_error: action out of range");
  }
}

}  // namespace

double td_error(const QFunction& q, const Transition& t, double gamma) {
  check_gamma(gamma);
  const auto na = static_cast<size_t>(q.num_actions());
  check_action(t, na);
  double small[8];
  std::vector<double> big;
  std::span<double> vals;
  if (na <= 8) {
    vals = std::span<double>(small, na);
  } else {
    big.resize(na);
    vals = big;
  }
  return td_residual(q, t, gamma, vals);
}

namespace {

ScoreVector score_impl(const QFunction& q, const ReplayBuffer& buffer,
                       double gamma, int64_t episode, bool parallel) {
  check_gamma(gamma);
  if (buffer.size() == 0) throw std::invalid_argument("score_buffer: empty buffer");
  const auto n = static_cast<ptrdiff_t>(buffer.size());
  const auto na = static_cast<size_t>(q.num_actions());
  // Throwing out of a parallel region is fatal, so validate rows up front:
  // actions in range and observation shapes homogeneous with row 0, whose
  // own shape the serial td_error call below vets against the agent.
  const size_t state_dim = buffer[0].state.size();
  const size_t next_dim = buffer[0].next_state.size();
  for (ptrdiff_t i = 0; i < n; ++i) {
    const Transition& t = buffer[static_cast<size_t>(i)];
    check_action(t, na);
    if (t.state.size() != state_dim || t.next_state.size() != next_dim) {
      throw std::invalid_argument("score_buffer: ragged observation shapes");
    }
  }
  Transition probe = buffer[0];
  probe.done = false;
  (void)td_error(q, probe, gamma);

  ScoreVector sv;
  sv.computed_at_episode = episode;
  sv.scores.resize(buffer.size());
#pragma omp parallel if (parallel)
  {
    std::vector<double> vals(na);
#pragma omp for schedule(static)
    for (ptrdiff_t i = 0; i < n; ++i) {
      sv.scores[static_cast<size_t>(i)] =
          td_residual(q, buffer[static_cast<size_t>(i)], gamma, vals);
    }
  }
  for (double s : sv.scores) {
    if (!std::isfinite(s)) throw std::runtime_error("score_buffer: non-finite TD error");
  }
  return sv;
}

}  // namespace

ScoreVector score_buffer(const QFunction& q, const ReplayBuffer& buffer,
                         double gamma, int64_t episode) {
  return score_impl(q, buffer, gamma, episode, true);
}

ScoreVector score_buffer_serial(const QFunction& q, const ReplayBuffer& buffer,
                                double gamma, int64_t episode) {
  return score_impl(q, buffer, gamma, episode, false);
}

void dump_td_reward_csv(std::ostream& os, const QFunction& q,
                        const ReplayBuffer& buffer,
                        std::span<const size_t> indices, double gamma) {
  os << "td_error,reward\n";
  for (size_t i : indices) {
    const Transition& t = buffer[i];
    os << format_double(td_error(q, t, gamma)) << ',' << format_double(t.reward) << '\n';
  }
}

}  // namespace replay
