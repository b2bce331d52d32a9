#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "replay/config.hpp"
#include "replay/harness.hpp"

using namespace replay;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("enum string round trips") {
  for (Strategy s : {Strategy::UER, Strategy::RER, Strategy::OER, Strategy::PER,
                     Strategy::IER}) {
    CHECK(strategy_from_string(to_string(s)) == s);
  }
  for (PivotMode m : {PivotMode::TdTop, PivotMode::Uniform}) {
    CHECK(pivot_mode_from_string(to_string(m)) == m);
  }
  for (FillMode m : {FillMode::LookBack, FillMode::LookForward, FillMode::Uniform}) {
    CHECK(fill_mode_from_string(to_string(m)) == m);
  }
  for (ScheduleUnit u : {ScheduleUnit::Episodes, ScheduleUnit::EnvSteps}) {
    CHECK(schedule_unit_from_string(to_string(u)) == u);
  }
  CHECK_THROWS_AS(strategy_from_string("her"), ConfigError);
  CHECK_THROWS_AS(pivot_mode_from_string(""), ConfigError);
  CHECK_THROWS_AS(fill_mode_from_string("lookback"), ConfigError);
  CHECK_THROWS_AS(schedule_unit_from_string("steps"), ConfigError);
}

TEST_CASE("default presets") {
  ExperimentConfig cart = default_config("cartpole");
  CHECK(cart.env_id == "cartpole");
  CHECK(cart.agent_id == "dqn");
  CHECK_NOTHROW(cart.validate());

  ExperimentConfig grid = default_config("gridworld");
  CHECK(grid.env_id == "gridworld");
  CHECK(grid.agent_id == "tabular");
  CHECK(grid.sampler.batch_size == 64);
  CHECK_NOTHROW(grid.validate());

  CHECK_THROWS(default_config("pong"));
}

TEST_CASE("apply_override handles canonical keys and short aliases") {
  ExperimentConfig cfg = default_config("cartpole");
  apply_override(cfg, "sampler.strategy", "ier");
  CHECK(cfg.sampler.strategy == Strategy::IER);
  apply_override(cfg, "sampler.B", "17");
  CHECK(cfg.sampler.batch_size == 17);
  apply_override(cfg, "sampler.batch_size", "21");
  CHECK(cfg.sampler.batch_size == 21);
  apply_override(cfg, "sampler.G", "9");
  CHECK(cfg.sampler.grad_steps == 9);
  apply_override(cfg, "sampler.p", "0.3");
  CHECK(cfg.sampler.mixing_p == 0.3);
  apply_override(cfg, "sampler.mixing_p", "0.75");
  CHECK(cfg.sampler.mixing_p == 0.75);
  apply_override(cfg, "sampler.pivot_mode", "uniform");
  CHECK(cfg.sampler.pivot_mode == PivotMode::Uniform);
  apply_override(cfg, "sampler.fill_mode", "look_forward");
  CHECK(cfg.sampler.fill_mode == FillMode::LookForward);
  apply_override(cfg, "seed", "99");
  CHECK(cfg.seed == 99);
  apply_override(cfg, "episodes", "123");
  CHECK(cfg.episodes == 123);
  apply_override(cfg, "log_sampled_indices", "true");
  CHECK(cfg.log_sampled_indices);
  apply_override(cfg, "dqn.hidden", "16,8,4");
  CHECK(cfg.dqn.hidden == std::vector<int>{16, 8, 4});
  apply_override(cfg, "dqn.lr", "5e-5");
  CHECK(cfg.dqn.lr == 5e-5);
  apply_override(cfg, "toy.eval_epsilon", "0.05");
  CHECK(cfg.toy_eval_epsilon == 0.05);
}

TEST_CASE("apply_override rejects unknown keys, bad values and env switches") {
  ExperimentConfig cfg = default_config("cartpole");
  CHECK_THROWS_AS(apply_override(cfg, "sampler.batchsize", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "episodes", "ten"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "seed", "-1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "sampler.mixing_p", "half"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "log_sampled_indices", "maybe"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "dqn.hidden", ""), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "buffer_capacity", "0"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "env", "gridworld"), ConfigError);
  CHECK_NOTHROW(apply_override(cfg, "env", "cartpole"));  // confirming is fine
}

TEST_CASE("parse_config_text applies the preset then file overrides in order") {
  // The env key is pre-scanned, so overrides placed before it still land on
  // top of the right preset.
  std::string text =
      "sampler.G = 9\n"
      "\n"
      "# a comment line\n"
      "sampler.strategy = ier   # trailing comment\n"
      "env = gridworld\n"
      "sampler.G = 11\n";
  ExperimentConfig cfg = parse_config_text(text, "test.cfg");
  CHECK(cfg.env_id == "gridworld");
  CHECK(cfg.agent_id == "tabular");
  CHECK(cfg.sampler.strategy == Strategy::IER);
  CHECK(cfg.sampler.grad_steps == 11);       // later line wins
  CHECK(cfg.sampler.mixing_p == 0.5);        // untouched preset value
  CHECK(cfg.buffer_capacity == 30000);
}

TEST_CASE("parse_config_text defaults to cartpole when env is absent") {
  ExperimentConfig cfg = parse_config_text("sampler.strategy = uer\n", "x");
  CHECK(cfg.env_id == "cartpole");
  CHECK(cfg.agent_id == "dqn");
}

TEST_CASE("parse_config_text reports origin and line on errors") {
  std::string msg = message_of([] {
    parse_config_text("env = cartpole\nsampler.G = 4\nthis is not a pair\n", "test.cfg");
  });
  CHECK(contains(msg, "test.cfg:3"));

  msg = message_of([] { parse_config_text("= 4\n", "bad.cfg"); });
  CHECK(contains(msg, "bad.cfg:1"));

  msg = message_of([] { parse_config_text("sampler.G =\n", "bad.cfg"); });
  CHECK(contains(msg, "bad.cfg:1"));

  msg = message_of([] { parse_config_text("env = cartpole\nnope = 1\n", "k.cfg"); });
  CHECK(contains(msg, "k.cfg:2"));
  CHECK(contains(msg, "unknown config key"));

  msg = message_of([] { parse_config_text("env = mars\n", "m.cfg"); });
  CHECK(contains(msg, "m.cfg"));
}

TEST_CASE("env hints must agree with the file") {
  ExperimentConfig cfg = parse_config_text("sampler.G = 3\n", "t", "gridworld");
  CHECK(cfg.env_id == "gridworld");

  CHECK_NOTHROW(parse_config_text("env = gridworld\n", "t", "gridworld"));
  CHECK_THROWS_AS(parse_config_text("env = gridworld\n", "t", "cartpole"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("env = cartpole\nenv = gridworld\n", "t"), ConfigError);
}

TEST_CASE("parse_config_file reads from disk and fails loudly otherwise") {
  const char* path = "test_config_tmp.cfg";
  {
    std::ofstream out(path);
    out << "env = gridworld\nsampler.strategy = oer\nseed = 12\n";
  }
  ExperimentConfig cfg = parse_config_file(path);
  CHECK(cfg.env_id == "gridworld");
  CHECK(cfg.sampler.strategy == Strategy::OER);
  CHECK(cfg.seed == 12);
  std::remove(path);

  CHECK_THROWS_AS(parse_config_file("no_such_file.cfg"), ConfigError);
}

TEST_CASE("config_to_kv round trips exactly through config_from_kv") {
  ExperimentConfig cfg = default_config("cartpole");
  cfg.sampler.strategy = Strategy::IER;
  cfg.sampler.mixing_p = 1.0 / 3.0;  // needs full double round-trip
  cfg.sampler.per_epsilon = 1e-6;
  cfg.dqn.lr = 5e-5;
  cfg.dqn.hidden = {8, 5};
  cfg.seed = 0xdeadbeefcafe;
  cfg.log_sampled_indices = true;
  cfg.eval_every = 10;

  auto kv = config_to_kv(cfg);
  ExperimentConfig back = config_from_kv(kv);
  CHECK(config_to_kv(back) == kv);
  CHECK(back.sampler.mixing_p == cfg.sampler.mixing_p);
  CHECK(back.seed == cfg.seed);
  CHECK(back.dqn.hidden == cfg.dqn.hidden);

  ExperimentConfig grid = default_config("gridworld");
  CHECK(config_to_kv(config_from_kv(config_to_kv(grid))) == config_to_kv(grid));
}

TEST_CASE("config_from_kv requires an env entry") {
  CHECK_THROWS_AS(config_from_kv({{"seed", "1"}}), ConfigError);
}

TEST_CASE("ExperimentConfig validation rejects inconsistent setups") {
  ExperimentConfig cfg = default_config("cartpole");
  cfg.agent_id = "tabular";  // tabular needs gridworld
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_config("cartpole");
  cfg.episodes = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_config("cartpole");
  cfg.ma_window = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_config("cartpole");
  cfg.eval_every = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_config("cartpole");
  cfg.sampler.grad_steps = 0;  // collect-only is allowed at the config level
  CHECK_NOTHROW(cfg.validate());
  cfg.sampler.grad_steps = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_config("gridworld");
  cfg.tabular_gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_config("gridworld");
  cfg.toy_epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
