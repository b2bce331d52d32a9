#include "replay/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "replay/format.hpp"

namespace replay {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::UER: return "uer";
    case Strategy::RER: return "rer";
    case Strategy::OER: return "oer";
    case Strategy::PER: return "per";
    case Strategy::IER: return "ier";
  }
  throw std::logic_error("to_string: bad Strategy");
}

std::string to_string(PivotMode m) {
  return m == PivotMode::TdTop ? "td_top" : "uniform";
}

std::string to_string(FillMode m) {
  switch (m) {
    case FillMode::LookBack: return "look_back";
    case FillMode::LookForward: return "look_forward";
    case FillMode::Uniform: return "uniform";
  }
  throw std::logic_error("to_string: bad FillMode");
}

std::string to_string(ScheduleUnit u) {
  return u == ScheduleUnit::Episodes ? "episodes" : "env_steps";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "uer") return Strategy::UER;
  if (s == "rer") return Strategy::RER;
  if (s == "oer") return Strategy::OER;
  if (s == "per") return Strategy::PER;
  if (s == "ier") return Strategy::IER;
  throw ConfigError("unknown sampler strategy '" + s + "' (expected uer|rer|oer|per|ier)");
}

PivotMode pivot_mode_from_string(const std::string& s) {
  if (s == "td_top") return PivotMode::TdTop;
  if (s == "uniform") return PivotMode::Uniform;
  throw ConfigError("unknown pivot mode '" + s + "' (expected td_top|uniform)");
}

FillMode fill_mode_from_string(const std::string& s) {
  if (s == "look_back") return FillMode::LookBack;
  if (s == "look_forward") return FillMode::LookForward;
  if (s == "uniform") return FillMode::Uniform;
  throw ConfigError("unknown fill mode '" + s + "' (expected look_back|look_forward|uniform)");
}

ScheduleUnit schedule_unit_from_string(const std::string& s) {
  if (s == "episodes") return ScheduleUnit::Episodes;
  if (s == "env_steps") return ScheduleUnit::EnvSteps;
  throw ConfigError("unknown schedule unit '" + s + "' (expected episodes|env_steps)");
}

namespace {

double to_real(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a real number, got '" + v + "'");
  }
}

int64_t to_int(const std::string& key, const std::string& v) {
  try {
    return parse_int(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

uint64_t to_uint(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(to_int(key, item)));
  }
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated integer list");
  return out;
}

std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "env") {
    if (value != cfg.env_id) {
      throw ConfigError("env '" + value + "' conflicts with the active preset '" +
                        cfg.env_id + "'");
    }
  } else if (key == "agent") {
    cfg.agent_id = value;
  } else if (key == "seed") {
    cfg.seed = to_uint(key, value);
  } else if (key == "episodes") {
    cfg.episodes = to_int(key, value);
  } else if (key == "buffer_capacity") {
    int64_t v = to_int(key, value);
    if (v < 1) throw ConfigError("buffer_capacity: must be >= 1");
    cfg.buffer_capacity = static_cast<size_t>(v);
  } else if (key == "ma_window") {
    cfg.ma_window = static_cast<int>(to_int(key, value));
  } else if (key == "eval_every") {
    cfg.eval_every = to_int(key, value);
  } else if (key == "log_sampled_indices") {
    cfg.log_sampled_indices = to_bool(key, value);
  } else if (key == "sampler.strategy") {
    cfg.sampler.strategy = strategy_from_string(value);
  } else if (key == "sampler.batch_size" || key == "sampler.B") {
    cfg.sampler.batch_size = static_cast<int>(to_int(key, value));
  } else if (key == "sampler.grad_steps" || key == "sampler.G") {
    cfg.sampler.grad_steps = static_cast<int>(to_int(key, value));
  } else if (key == "sampler.mixing_p" || key == "sampler.p") {
    cfg.sampler.mixing_p = to_real(key, value);
  } else if (key == "sampler.pivot_mode") {
    cfg.sampler.pivot_mode = pivot_mode_from_string(value);
  } else if (key == "sampler.fill_mode") {
    cfg.sampler.fill_mode = fill_mode_from_string(value);
  } else if (key == "sampler.per_alpha") {
    cfg.sampler.per_alpha = to_real(key, value);
  } else if (key == "sampler.per_beta") {
    cfg.sampler.per_beta = to_real(key, value);
  } else if (key == "sampler.per_epsilon") {
    cfg.sampler.per_epsilon = to_real(key, value);
  } else if (key == "dqn.gamma") {
    cfg.dqn.gamma = to_real(key, value);
  } else if (key == "dqn.lr") {
    cfg.dqn.lr = to_real(key, value);
  } else if (key == "dqn.hidden") {
    cfg.dqn.hidden = to_int_list(key, value);
  } else if (key == "dqn.target_update_every") {
    cfg.dqn.target_update_every = static_cast<int>(to_int(key, value));
  } else if (key == "dqn.max_epsilon") {
    cfg.dqn.max_epsilon = to_real(key, value);
  } else if (key == "dqn.min_epsilon") {
    cfg.dqn.min_epsilon = to_real(key, value);
  } else if (key == "dqn.decay_ratio") {
    cfg.dqn.decay_ratio = to_real(key, value);
  } else if (key == "dqn.schedule_horizon") {
    cfg.dqn.schedule_horizon = to_int(key, value);
  } else if (key == "dqn.schedule_unit") {
    cfg.schedule_unit = schedule_unit_from_string(value);
  } else if (key == "tabular.lr") {
    cfg.tabular_lr = to_real(key, value);
  } else if (key == "tabular.gamma") {
    cfg.tabular_gamma = to_real(key, value);
  } else if (key == "tabular.epsilon") {
    cfg.tabular_epsilon = to_real(key, value);
  } else if (key == "toy.buffer_size") {
    cfg.toy_buffer_size = to_int(key, value);
  } else if (key == "toy.epochs") {
    cfg.toy_epochs = to_int(key, value);
  } else if (key == "toy.eval_epsilon") {
    cfg.toy_eval_epsilon = to_real(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

namespace {

struct KvLine {
  std::string key, value;
  int line;
};

std::vector<KvLine> tokenize(const std::string& text, const std::string& origin) {
  std::vector<KvLine> out;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string t = trim(raw);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": empty key or value");
    }
    out.push_back({std::move(key), std::move(value), line});
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin,
                                   const std::string& env_hint) {
  auto pairs = tokenize(text, origin);
  std::string env = env_hint;
  for (const auto& kv : pairs) {
    if (kv.key != "env") continue;
    if (env.empty()) {
      env = kv.value;
    } else if (env != kv.value) {
      throw ConfigError(origin + ":" + std::to_string(kv.line) + ": env '" + kv.value +
                        "' conflicts with '" + env + "'");
    }
  }
  if (env.empty()) env = "cartpole";

  ExperimentConfig cfg;
  try {
    cfg = default_config(env);
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  for (const auto& kv : pairs) {
    try {
      apply_override(cfg, kv.key, kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path, const std::string& env_hint) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path, env_hint);
}

std::vector<std::pair<std::string, std::string>> config_to_kv(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&kv](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  add("env", cfg.env_id);
  add("agent", cfg.agent_id);
  add("seed", std::to_string(cfg.seed));
  add("episodes", std::to_string(cfg.episodes));
  add("buffer_capacity", std::to_string(cfg.buffer_capacity));
  add("ma_window", std::to_string(cfg.ma_window));
  add("eval_every", std::to_string(cfg.eval_every));
  add("log_sampled_indices", cfg.log_sampled_indices ? "true" : "false");
  add("sampler.strategy", to_string(cfg.sampler.strategy));
  add("sampler.batch_size", std::to_string(cfg.sampler.batch_size));
  add("sampler.grad_steps", std::to_string(cfg.sampler.grad_steps));
  add("sampler.mixing_p", format_double(cfg.sampler.mixing_p));
  add("sampler.pivot_mode", to_string(cfg.sampler.pivot_mode));
  add("sampler.fill_mode", to_string(cfg.sampler.fill_mode));
  add("sampler.per_alpha", format_double(cfg.sampler.per_alpha));
  add("sampler.per_beta", format_double(cfg.sampler.per_beta));
  add("sampler.per_epsilon", format_double(cfg.sampler.per_epsilon));
  add("dqn.gamma", format_double(cfg.dqn.gamma));
  add("dqn.lr", format_double(cfg.dqn.lr));
  {
    std::string h;
    for (size_t i = 0; i < cfg.dqn.hidden.size(); ++i) {
      if (i) h += ',';
      h += std::to_string(cfg.dqn.hidden[i]);
    }
    add("dqn.hidden", h);
  }
  add("dqn.target_update_every", std::to_string(cfg.dqn.target_update_every));
  add("dqn.max_epsilon", format_double(cfg.dqn.max_epsilon));
  add("dqn.min_epsilon", format_double(cfg.dqn.min_epsilon));
  add("dqn.decay_ratio", format_double(cfg.dqn.decay_ratio));
  add("dqn.schedule_horizon", std::to_string(cfg.dqn.schedule_horizon));
  add("dqn.schedule_unit", to_string(cfg.schedule_unit));
  add("tabular.lr", format_double(cfg.tabular_lr));
  add("tabular.gamma", format_double(cfg.tabular_gamma));
  add("tabular.epsilon", format_double(cfg.tabular_epsilon));
  add("toy.buffer_size", std::to_string(cfg.toy_buffer_size));
  add("toy.epochs", std::to_string(cfg.toy_epochs));
  add("toy.eval_epsilon", format_double(cfg.toy_eval_epsilon));
  return kv;
}

ExperimentConfig config_from_kv(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string env;
  for (const auto& [k, v] : kv) {
    if (k == "env") env = v;
  }
  if (env.empty()) throw ConfigError("config_from_kv: missing env key");
  ExperimentConfig cfg = default_config(env);
  for (const auto& [k, v] : kv) apply_override(cfg, k, v);
  return cfg;
}

}  // namespace replay
