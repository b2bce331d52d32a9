#include "replay/harness.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>

#include "replay/envs.hpp"
#include "replay/importance.hpp"

namespace replay {

namespace {

bool needs_scores(Strategy s) {
  return s == Strategy::OER || s == Strategy::PER || s == Strategy::IER;
}

// Mutable sampler state that survives across episodes.
struct SamplerState {
  RerCursor cursor;
  std::optional<SumTree> tree;
  double max_priority = 1.0;
};

EpochPlan make_plan(const SamplerSpec& spec, SamplerState& st,
                    std::span<const double> scores, size_t buf_len, Rng& rng) {
  switch (spec.strategy) {
    case Strategy::UER:
      return plan_uer(buf_len, spec, rng);
    case Strategy::RER:
      return plan_rer(st.cursor, buf_len, spec);
    case Strategy::OER:
      return plan_oer(scores, buf_len, spec);
    case Strategy::IER:
      return plan_ier(scores, buf_len, spec, rng);
    case Strategy::PER: {
      // Refresh every leaf from this episode's score snapshot, then draw
      // all G batches against the rebuilt tree.
      std::vector<double> priorities(buf_len);
      double mx = st.max_priority;
      for (size_t i = 0; i < buf_len; ++i) {
        priorities[i] = std::pow(scores[i] + spec.per_epsilon, spec.per_alpha);
        mx = std::max(mx, priorities[i]);
      }
      st.max_priority = mx;
      st.tree->fill(priorities);
      return plan_per(*st.tree, buf_len, spec, rng);
    }
  }
  throw std::logic_error("make_plan: unhandled strategy");
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int tabular_act(const TabularQ& agent, int state, double epsilon, Rng& rng) {
  if (rng.uniform01() < epsilon) {
    return static_cast<int>(rng.uniform_below(static_cast<uint64_t>(agent.num_actions())));
  }
  return agent.greedy_action(state);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (env_id != "gridworld" && env_id != "cartpole") {
    throw std::invalid_argument("ExperimentConfig: env must be gridworld or cartpole");
  }
  if (agent_id == "tabular") {
    if (env_id != "gridworld") {
      throw std::invalid_argument("ExperimentConfig: tabular agent requires the gridworld env");
    }
  } else if (agent_id == "dqn") {
    if (env_id != "cartpole") {
      throw std::invalid_argument("ExperimentConfig: dqn agent requires the cartpole env");
    }
  } else {
    throw std::invalid_argument("ExperimentConfig: agent must be tabular or dqn");
  }
  if (episodes < 1) throw std::invalid_argument("ExperimentConfig: episodes must be >= 1");
  if (buffer_capacity < 1) throw std::invalid_argument("ExperimentConfig: buffer_capacity must be >= 1");
  if (ma_window < 1) throw std::invalid_argument("ExperimentConfig: ma_window must be >= 1");
  if (eval_every < 0) throw std::invalid_argument("ExperimentConfig: eval_every must be >= 0");
  if (sampler.grad_steps < 0) throw std::invalid_argument("ExperimentConfig: grad_steps must be >= 0");
  {
    // grad_steps == 0 means collect-only and is legal here even though the
    // planners themselves insist on >= 1 (they are never invoked then).
    SamplerSpec probe = sampler;
    if (probe.grad_steps == 0) probe.grad_steps = 1;
    probe.validate();
  }
  {
    DqnHyper probe = dqn;
    if (probe.schedule_horizon == 0) probe.schedule_horizon = 1;
    probe.validate();
  }
  if (!(tabular_lr > 0.0)) throw std::invalid_argument("ExperimentConfig: tabular.lr must be > 0");
  if (!(tabular_gamma >= 0.0 && tabular_gamma < 1.0)) {
    throw std::invalid_argument("ExperimentConfig: tabular.gamma must lie in [0,1)");
  }
  if (!(tabular_epsilon >= 0.0 && tabular_epsilon <= 1.0)) {
    throw std::invalid_argument("ExperimentConfig: tabular.epsilon must lie in [0,1]");
  }
  if (toy_buffer_size < 1) throw std::invalid_argument("ExperimentConfig: toy.buffer_size must be >= 1");
  if (toy_epochs < 1) throw std::invalid_argument("ExperimentConfig: toy.epochs must be >= 1");
  if (!(toy_eval_epsilon >= 0.0 && toy_eval_epsilon <= 1.0)) {
    throw std::invalid_argument("ExperimentConfig: toy.eval_epsilon must lie in [0,1]");
  }
}

ExperimentConfig default_config(const std::string& env_id) {
  ExperimentConfig cfg;
  cfg.env_id = env_id;
  if (env_id == "cartpole") {
    cfg.agent_id = "dqn";
    cfg.sampler.batch_size = 64;
    cfg.sampler.grad_steps = 50;
    cfg.episodes = 1000;
    cfg.ma_window = 50;
    cfg.dqn = DqnHyper{};
    cfg.dqn.schedule_horizon = 0;  // derive from episodes
  } else if (env_id == "gridworld") {
    cfg.agent_id = "tabular";
    cfg.sampler.batch_size = 64;
    // Pure pivot sampling (p=0) lacks the state-action coverage tabular
    // Q-learning needs on this task: stale action gaps of order (1-gamma^2)V
    // survive anywhere the pivots stop visiting. Mixing half of each epoch's
    // batches uniformly restores coverage; G=30 with p=0.5 reaches the goal
    // greedily on 20/20 tried seeds.
    cfg.sampler.grad_steps = 30;
    cfg.sampler.mixing_p = 0.5;
    cfg.episodes = 100;
    cfg.ma_window = 50;
    cfg.buffer_capacity = 30000;
  } else {
    throw std::invalid_argument("default_config: unknown env '" + env_id + "'");
  }
  return cfg;
}

RunRecord run_online(const ExperimentConfig& config) {
  config.validate();
  auto env = make_env(config.env_id);
  Rng env_rng = Rng::stream(config.seed, kTagEnv);
  Rng action_rng = Rng::stream(config.seed, kTagAction);
  Rng plan_rng = Rng::stream(config.seed, kTagPlan);
  Rng init_rng = Rng::stream(config.seed, kTagInit);
  Rng eval_rng = Rng::stream(config.seed, kTagEval);

  std::unique_ptr<TabularQ> tab;
  std::unique_ptr<DqnLearner> dqn;
  double gamma;
  if (config.agent_id == "tabular") {
    tab = std::make_unique<TabularQ>(GridWorld1D::kSize, env->num_actions(),
                                     config.tabular_lr, config.tabular_gamma);
    gamma = config.tabular_gamma;
  } else {
    DqnHyper hyper = config.dqn;
    if (hyper.schedule_horizon == 0) {
      hyper.schedule_horizon = config.schedule_unit == ScheduleUnit::Episodes
                                   ? config.episodes
                                   : config.episodes * env->max_steps();
    }
    dqn = std::make_unique<DqnLearner>(env->obs_dim(), env->num_actions(), hyper, init_rng);
    gamma = config.dqn.gamma;
  }
  const QFunction& qf = tab ? static_cast<const QFunction&>(*tab)
                            : static_cast<const QFunction&>(*dqn);

  ReplayBuffer buffer(config.buffer_capacity);
  SamplerState st;
  if (config.sampler.strategy == Strategy::PER) st.tree.emplace(config.buffer_capacity);

  RunRecord rec;
  rec.seed = config.seed;
  int64_t env_steps_total = 0;
  const auto b = static_cast<size_t>(config.sampler.batch_size);

  for (int64_t ep = 0; ep < config.episodes; ++ep) {
    auto t0 = std::chrono::steady_clock::now();

    Obs state = env->reset(env_rng);
    double ret = 0.0;
    bool done = false;
    int64_t step = 0;
    while (!done) {
      int64_t sched = config.schedule_unit == ScheduleUnit::Episodes ? ep : env_steps_total;
      int action = tab ? tabular_act(*tab, static_cast<int>(std::llround(state[0])),
                                     config.tabular_epsilon, action_rng)
                       : dqn->act(state, action_rng, sched);
      StepResult r = env->step(action);
      size_t idx = buffer.push({state, action, r.reward, r.next_state, r.done, ep, step});
      if (st.tree) st.tree->set(idx, st.max_priority);
      state = std::move(r.next_state);
      ret += r.reward;
      done = r.done;
      ++step;
      ++env_steps_total;
    }
    rec.episode_return.push_back(ret);

    double loss_sum = 0.0;
    int64_t batches_done = 0;
    const bool rer_starved = config.sampler.strategy == Strategy::RER && buffer.size() < b;
    if (config.sampler.grad_steps > 0 && !rer_starved) {
      try {
        ScoreVector sv;
        std::span<const double> scores;
        if (needs_scores(config.sampler.strategy)) {
          sv = score_buffer(qf, buffer, gamma, ep);
          scores = sv.scores;
        }
        EpochPlan plan = make_plan(config.sampler, st, scores, buffer.size(), plan_rng);
        for (size_t g = 0; g < plan.batches.size(); ++g) {
          if (plan.batches[g].empty()) continue;
          Batch data = buffer.gather(plan.batches[g],
                                     g < plan.weights.size() ? plan.weights[g]
                                                             : std::vector<double>{});
          double loss = tab ? tab->update(data) : dqn->train_step(data);
          loss_sum += loss;
          ++batches_done;
          if (config.log_sampled_indices) {
            for (size_t i : plan.batches[g]) rec.sampled_index_log.push_back(i);
          }
        }
      } catch (const std::runtime_error& e) {
        // DivergenceError and non-finite score failures land here; anything
        // logic-shaped (bad arguments) still propagates.
        rec.diverged = true;
        rec.divergence_reason = e.what();
      }
      rec.total_learner_steps += batches_done;
    }
    rec.loss_mean.push_back(batches_done > 0 ? loss_sum / static_cast<double>(batches_done) : 0.0);
    rec.wall_ms.push_back(wall_ms_since(t0));
    if (rec.diverged) break;

    if (config.eval_every > 0 && (ep + 1) % config.eval_every == 0) {
      Obs es = env->reset(eval_rng);
      double eret = 0.0;
      bool edone = false;
      while (!edone) {
        int action;
        if (tab) {
          action = tab->greedy_action(static_cast<int>(std::llround(es[0])));
        } else {
          std::vector<double> qv(static_cast<size_t>(env->num_actions()));
          dqn->q_values_into(es, qv);
          action = 0;
          for (size_t a = 1; a < qv.size(); ++a) {
            if (qv[a] > qv[static_cast<size_t>(action)]) action = static_cast<int>(a);
          }
        }
        StepResult r = env->step(action);
        eret += r.reward;
        edone = r.done;
        es = std::move(r.next_state);
      }
      rec.eval_episode.push_back(ep);
      rec.eval_return.push_back(eret);
    }
  }
  return rec;
}

ToyRecord run_offline_toy(const ExperimentConfig& config) {
  config.validate();
  if (config.env_id != "gridworld" || config.agent_id != "tabular") {
    throw std::invalid_argument("run_offline_toy: gridworld + tabular only");
  }
  GridWorld1D env;
  Rng fill_rng = Rng::stream(config.seed, kTagFill);
  Rng plan_rng = Rng::stream(config.seed, kTagPlan);
  Rng eval_rng = Rng::stream(config.seed, kTagEval);

  ReplayBuffer buffer =
      collect_random_buffer(env, static_cast<size_t>(config.toy_buffer_size), fill_rng);
  TabularQ agent(GridWorld1D::kSize, env.num_actions(), config.tabular_lr, config.tabular_gamma);

  SamplerState st;
  if (config.sampler.strategy == Strategy::PER) st.tree.emplace(buffer.size());

  ToyRecord rec;
  rec.seed = config.seed;
  rec.absolute_frequency.assign(GridWorld1D::kSize, 0);

  for (int64_t epoch = 0; epoch < config.toy_epochs; ++epoch) {
    ScoreVector sv;
    std::span<const double> scores;
    if (needs_scores(config.sampler.strategy)) {
      sv = score_buffer(agent, buffer, config.tabular_gamma, epoch);
      scores = sv.scores;
    }
    EpochPlan plan = make_plan(config.sampler, st, scores, buffer.size(), plan_rng);
    for (size_t g = 0; g < plan.batches.size(); ++g) {
      if (plan.batches[g].empty()) continue;
      Batch data = buffer.gather(plan.batches[g],
                                 g < plan.weights.size() ? plan.weights[g]
                                                         : std::vector<double>{});
      agent.update(data);
      for (const Transition& t : data.transitions) {
        auto s = static_cast<size_t>(std::llround(t.state[0]));
        ++rec.absolute_frequency[s - 1];
      }
      rec.total_sampled += static_cast<int64_t>(data.size());
    }
  }

  rec.q_table.resize(static_cast<size_t>(GridWorld1D::kSize) * 2);
  for (int s = 1; s <= GridWorld1D::kSize; ++s) {
    for (int a = 0; a < 2; ++a) {
      rec.q_table[static_cast<size_t>(s - 1) * 2 + static_cast<size_t>(a)] = agent.q(s, a);
    }
  }

  Obs state = env.reset(eval_rng);
  bool done = false;
  while (!done) {
    int label = static_cast<int>(std::llround(state[0]));
    int action = config.toy_eval_epsilon > 0.0
                     ? tabular_act(agent, label, config.toy_eval_epsilon, eval_rng)
                     : agent.greedy_action(label);
    StepResult r = env.step(action);
    rec.rollout_return += r.reward;
    ++rec.rollout_steps;
    done = r.done;
    state = std::move(r.next_state);
  }
  rec.reached_goal = env.position() == GridWorld1D::kGoal;
  return rec;
}

std::vector<RunRecord> run_multi_seed(const ExperimentConfig& config,
                                      std::span<const uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("run_multi_seed: empty seed list");
  config.validate();
  std::vector<RunRecord> out(seeds.size());
  const auto n = static_cast<ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (ptrdiff_t i = 0; i < n; ++i) {
    ExperimentConfig c = config;
    c.seed = seeds[static_cast<size_t>(i)];
    try {
      out[static_cast<size_t>(i)] = run_online(c);
    } catch (const std::exception& e) {
      out[static_cast<size_t>(i)].seed = c.seed;
      out[static_cast<size_t>(i)].diverged = true;
      out[static_cast<size_t>(i)].divergence_reason = e.what();
    }
  }
  return out;
}

}  // namespace replay
