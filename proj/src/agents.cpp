#include "replay/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "replay/format.hpp"

namespace replay {

TabularQ::TabularQ(int num_states, int num_actions, double lr, double gamma)
    : num_states_(num_states), num_actions_(num_actions), lr_(lr), gamma_(gamma) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("TabularQ: state/action counts must be positive");
  }
  if (!(lr > 0.0) || !(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("TabularQ: need lr > 0 and gamma in [0,1)");
  }
  table_.assign(static_cast<size_t>(num_states) * static_cast<size_t>(num_actions), 0.0);
}

int TabularQ::state_label(const Obs& state) const {
  if (state.size() != 1) throw std::invalid_argument("TabularQ: expected a single-label observation");
  int s = static_cast<int>(std::llround(state[0]));
  if (s < 1 || s > num_states_) throw std::out_of_range("TabularQ: state label out of range");
  return s;
}

double& TabularQ::cell(int state, int action) {
  if (state < 1 || state > num_states_ || action < 0 || action >= num_actions_) {
    throw std::out_of_range("TabularQ: cell out of range");
  }
  return table_[static_cast<size_t>(state - 1) * static_cast<size_t>(num_actions_) +
                static_cast<size_t>(action)];
}

double TabularQ::cell(int state, int action) const {
  return const_cast<TabularQ*>(this)->cell(state, action);
}

double TabularQ::q(int state, int action) const { return cell(state, action); }

void TabularQ::set_q(int state, int action, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("TabularQ: non-finite value");
  cell(state, action) = value;
}

void TabularQ::q_values_into(const Obs& state, std::span<double> out) const {
  int s = state_label(state);
  if (out.size() != static_cast<size_t>(num_actions_)) {
    throw std::invalid_argument("TabularQ: output span size mismatch");
  }
  for (int a = 0; a < num_actions_; ++a) out[static_cast<size_t>(a)] = cell(s, a);
}

void TabularQ::q_target_values_into(const Obs& state, std::span<double> out) const {
  q_values_into(state, out);
}

double TabularQ::update(const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("TabularQ: empty batch");
  std::vector<size_t> order(batch.size());
  std::iota(order.begin(), order.end(), size_t{0});
  if (batch.indices.size() == batch.size()) {
    std::sort(order.begin(), order.end(), [&batch](size_t a, size_t b) {
      if (batch.indices[a] != batch.indices[b]) return batch.indices[a] > batch.indices[b];
      return a < b;
    });
  } else {
    std::reverse(order.begin(), order.end());
  }

  double loss = 0.0;
  for (size_t pos : order) {
    const Transition& t = batch.transitions[pos];
    int s = state_label(t.state);
    double y = t.reward;
    if (!t.done) {
      int s2 = state_label(t.next_state);
      double best = cell(s2, 0);
      for (int a = 1; a < num_actions_; ++a) best = std::max(best, cell(s2, a));
      y += gamma_ * best;
    }
    double& q_sa = cell(s, t.action);
    double err = y - q_sa;
    loss += err * err;
    q_sa += lr_ * err;
    if (!std::isfinite(q_sa)) throw DivergenceError("TabularQ: non-finite entry");
  }
  return loss / static_cast<double>(batch.size());
}

int TabularQ::greedy_action(int state) const {
  int best = 0;
  double best_q = cell(state, 0);
  for (int a = 1; a < num_actions_; ++a) {
    if (cell(state, a) > best_q) {
      best_q = cell(state, a);
      best = a;
    }
  }
  return best;
}

void TabularQ::save_csv(std::ostream& os) const {
  os << "state";
  for (int a = 0; a < num_actions_; ++a) os << ",q" << a;
  os << '\n';
  for (int s = 1; s <= num_states_; ++s) {
    os << s;
    for (int a = 0; a < num_actions_; ++a) os << ',' << format_double(cell(s, a));
    os << '\n';
  }
}

void DqnHyper::validate() const {
  if (hidden.empty()) throw std::invalid_argument("DqnHyper: need at least one hidden layer");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("DqnHyper: hidden sizes must be positive");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("DqnHyper: gamma must lie in [0,1)");
  if (!(lr > 0.0)) throw std::invalid_argument("DqnHyper: lr must be positive");
  if (target_update_every < 1) throw std::invalid_argument("DqnHyper: target_update_every must be >= 1");
  if (!(min_epsilon >= 0.0 && min_epsilon <= max_epsilon && max_epsilon <= 1.0)) {
    throw std::invalid_argument("DqnHyper: need 0 <= min_epsilon <= max_epsilon <= 1");
  }
  if (!(decay_ratio >= 0.0 && decay_ratio <= 1.0)) {
    throw std::invalid_argument("DqnHyper: decay_ratio must lie in [0,1]");
  }
  if (schedule_horizon < 1) throw std::invalid_argument("DqnHyper: schedule_horizon must be >= 1");
}

namespace {

std::vector<int> full_sizes(int obs_dim, const std::vector<int>& hidden, int num_actions) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(num_actions);
  return sizes;
}

}  // namespace

DqnLearner::DqnLearner(int obs_dim, int num_actions, DqnHyper hyper, Rng& init_rng)
    : hyper_(std::move(hyper)),
      online_(full_sizes(obs_dim, hyper_.hidden, num_actions)),
      target_(online_.sizes()),
      adam_(online_.param_count()),
      grad_(online_.param_count(), 0.0),
      scratch_(static_cast<size_t>(num_actions), 0.0) {
  hyper_.validate();
  online_.init_uniform_fanin(init_rng);
  sync_target();
}

void DqnLearner::q_values_into(const Obs& state, std::span<double> out) const {
  online_.forward(state, out);
}

void DqnLearner::q_target_values_into(const Obs& state, std::span<double> out) const {
  target_.forward(state, out);
}

double DqnLearner::epsilon(int64_t schedule_pos) const {
  const double span = hyper_.decay_ratio * static_cast<double>(hyper_.schedule_horizon);
  if (schedule_pos <= 0) return hyper_.max_epsilon;
  if (span <= 0.0 || static_cast<double>(schedule_pos) >= span) return hyper_.min_epsilon;
  double frac = static_cast<double>(schedule_pos) / span;
  return hyper_.max_epsilon + (hyper_.min_epsilon - hyper_.max_epsilon) * frac;
}

int DqnLearner::act(const Obs& state, Rng& rng, int64_t schedule_pos) const {
  const int na = num_actions();
  if (rng.uniform01() < epsilon(schedule_pos)) {
    return static_cast<int>(rng.uniform_below(static_cast<uint64_t>(na)));
  }
  std::vector<double> out(static_cast<size_t>(na));
  online_.forward(state, out);
  int best = 0;
  for (int a = 1; a < na; ++a) {
    if (out[static_cast<size_t>(a)] > out[static_cast<size_t>(best)]) best = a;
  }
  return best;
}

double DqnLearner::train_step(const Batch& batch) {
  const size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("DqnLearner: empty batch");
  const auto dim = static_cast<size_t>(online_.input_size());

  QBatch qb;
  qb.state_dim = dim;
  qb.states.resize(n * dim);
  qb.actions.resize(n);
  qb.targets.resize(n);
  qb.weights = batch.weights;
  for (size_t i = 0; i < n; ++i) {
    const Transition& t = batch.transitions[i];
    if (t.state.size() != dim) throw std::invalid_argument("DqnLearner: state size mismatch");
    std::copy(t.state.begin(), t.state.end(), qb.states.begin() + static_cast<ptrdiff_t>(i * dim));
    qb.actions[i] = t.action;
    double y = t.reward;
    if (!t.done) {
      target_.forward(t.next_state, scratch_);
      y += hyper_.gamma * *std::max_element(scratch_.begin(), scratch_.end());
    }
    if (!std::isfinite(y) || std::fabs(y) > 1e6) {
      throw DivergenceError("DqnLearner: target value diverged");
    }
    qb.targets[i] = y;
  }

  double loss = q_regression_loss_grad(online_, qb, grad_);
  if (!std::isfinite(loss) || loss > 1e12) {
    throw DivergenceError("DqnLearner: loss diverged");
  }
  adam_.apply(online_.params(), grad_, hyper_.lr);
  ++steps_;
  if (steps_ % hyper_.target_update_every == 0) sync_target();
  return loss;
}

void DqnLearner::sync_target() {
  std::copy(online_.params().begin(), online_.params().end(), target_.params().begin());
}

void DqnLearner::save_params(std::ostream& os) const {
  online_.save_params(os);
}

}  // namespace replay
