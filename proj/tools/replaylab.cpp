#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "replay/config.hpp"
#include "replay/format.hpp"
#include "replay/harness.hpp"
#include "replay/metrics.hpp"
#include "replay/run_io.hpp"

namespace fs = std::filesystem;

namespace {

using namespace replay;

std::string default_out_root() {
  const char* env = std::getenv("REPLAYLAB_OUT");
  return env != nullptr && *env != '\0' ? env : "out";
}

fs::path unique_dir(const fs::path& base) {
  if (!fs::exists(base)) return base;
  for (int i = 2;; ++i) {
    fs::path candidate = base;
    candidate += "_" + std::to_string(i);
    if (!fs::exists(candidate)) return candidate;
  }
}

template <typename Writer>
void write_file(const fs::path& p, Writer&& writer) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  writer(os);
  if (!os) throw std::runtime_error("write failed for '" + p.string() + "'");
}

std::vector<uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    seeds.push_back(static_cast<uint64_t>(std::stoull(item)));
  }
  if (seeds.empty()) throw std::runtime_error("--seed-list: no seeds given");
  return seeds;
}

// Flags that map straight onto config keys; only flags the user actually
// passed are applied.
struct OverrideFlags {
  CLI::Option* opt = nullptr;
  std::string key;
  const std::string* value = nullptr;
};

struct CommonRunFlags {
  std::string sampler, pivot_mode, fill_mode;
  std::string batch_size, grad_steps, mixing_p, per_alpha, per_beta;
  std::vector<OverrideFlags> bound;

  void bind(CLI::App* cmd) {
    auto tie = [this, cmd](const char* flag, std::string& slot, const char* key,
                           const char* help) {
      auto* opt = cmd->add_option(flag, slot, help);
      bound.push_back({opt, key, &slot});
    };
    tie("--sampler", sampler, "sampler.strategy", "replay strategy: uer|rer|oer|per|ier");
    tie("--pivot-mode", pivot_mode, "sampler.pivot_mode", "td_top|uniform (pivot ablation)");
    tie("--fill-mode", fill_mode, "sampler.fill_mode",
        "look_back|look_forward|uniform (forward variant / looking-back ablation)");
    tie("--B,--batch-size", batch_size, "sampler.batch_size", "minibatch size B");
    tie("--G,--grad-steps", grad_steps, "sampler.grad_steps", "gradient steps per episode G");
    tie("--p,--mixing-p", mixing_p, "sampler.mixing_p", "uniform mixing fraction p");
    tie("--per-alpha", per_alpha, "sampler.per_alpha", "proportional priority exponent");
    tie("--per-beta", per_beta, "sampler.per_beta", "importance-weight exponent");
  }

  void apply(ExperimentConfig& cfg) const {
    for (const auto& b : bound) {
      if (b.opt->count() > 0) apply_override(cfg, b.key, *b.value);
    }
  }
};

void report_divergences(const std::vector<RunRecord>& records) {
  for (const auto& rec : records) {
    if (rec.diverged) {
      std::cerr << "seed " << rec.seed << " diverged: " << rec.divergence_reason << "\n";
    }
  }
}

int do_run(const std::string& config_path, const std::string& env_flag,
           const CommonRunFlags& common, const std::string& episodes_flag,
           const std::string& eval_every_flag, bool log_indices, bool seed_given,
           uint64_t base_seed, int seed_count, const std::string& seed_list,
           const std::string& from_manifest, const std::string& out_root,
           std::string label) {
  ExperimentConfig cfg;
  std::vector<uint64_t> seeds;

  if (!from_manifest.empty()) {
    Manifest m = read_manifest(from_manifest);
    cfg = config_from_kv(m.config_kv);
    seeds = m.seeds;
  } else {
    cfg = config_path.empty() ? default_config(env_flag.empty() ? "cartpole" : env_flag)
                              : parse_config_file(config_path, env_flag);
    common.apply(cfg);
    if (!episodes_flag.empty()) apply_override(cfg, "episodes", episodes_flag);
    if (!eval_every_flag.empty()) apply_override(cfg, "eval_every", eval_every_flag);
    if (log_indices) cfg.log_sampled_indices = true;
    if (!seed_list.empty()) {
      seeds = parse_seed_list(seed_list);
    } else {
      uint64_t base = seed_given ? base_seed : cfg.seed;
      for (int i = 0; i < seed_count; ++i) seeds.push_back(base + static_cast<uint64_t>(i));
    }
  }
  cfg.seed = seeds.front();
  cfg.validate();

  if (label.empty()) label = cfg.env_id + "_" + to_string(cfg.sampler.strategy);
  fs::path dir = unique_dir(fs::path(out_root) / label);
  fs::create_directories(dir);

  Manifest m;
  m.command = "run";
  m.config_kv = config_to_kv(cfg);
  m.seeds = seeds;
  m.started_utc = utc_now_iso8601();
  for (uint64_t s : seeds) {
    std::string stem = "seed_" + std::to_string(s);
    m.outputs.push_back(stem + ".csv");
    m.outputs.push_back(stem + "_timing.csv");
    if (cfg.eval_every > 0) m.outputs.push_back(stem + "_eval.csv");
    if (cfg.log_sampled_indices) m.outputs.push_back(stem + "_indices.csv");
  }
  write_manifest(dir / "manifest.json", m);

  std::vector<RunRecord> records = run_multi_seed(cfg, seeds);

  std::vector<double> finals;
  for (const RunRecord& rec : records) {
    std::string stem = "seed_" + std::to_string(rec.seed);
    write_file(dir / (stem + ".csv"),
               [&rec, &cfg](std::ostream& os) { write_run_csv(os, rec, cfg.ma_window); });
    write_file(dir / (stem + "_timing.csv"),
               [&rec](std::ostream& os) { write_timing_csv(os, rec); });
    if (cfg.eval_every > 0) {
      write_file(dir / (stem + "_eval.csv"),
                 [&rec](std::ostream& os) { write_eval_csv(os, rec); });
    }
    if (cfg.log_sampled_indices) {
      write_file(dir / (stem + "_indices.csv"),
                 [&rec](std::ostream& os) { write_indices_csv(os, rec); });
    }
    if (!rec.episode_return.empty()) {
      finals.push_back(moving_average(rec.episode_return, cfg.ma_window).back());
    }
  }
  m.finished_utc = utc_now_iso8601();
  write_manifest(dir / "manifest.json", m);

  report_divergences(records);
  std::cout << "wrote " << dir.string() << "\n";
  for (size_t i = 0; i < records.size(); ++i) {
    std::cout << "  seed " << records[i].seed << ": final_ma="
              << (i < finals.size() ? format_double(finals[i]) : "n/a") << "\n";
  }
  if (finals.size() >= 3) {
    std::cout << "  top-3 mean: " << format_double(topk_final(finals, 3)) << "\n";
  }
  for (const RunRecord& rec : records) {
    if (rec.diverged) return 2;
  }
  return 0;
}

int do_toy(const CommonRunFlags& common, const std::string& epochs_flag,
           const std::string& buffer_flag, const std::string& eval_eps_flag,
           uint64_t base_seed, int seed_count, const std::string& out_root,
           std::string label) {
  ExperimentConfig cfg = default_config("gridworld");
  common.apply(cfg);
  if (!epochs_flag.empty()) apply_override(cfg, "toy.epochs", epochs_flag);
  if (!buffer_flag.empty()) apply_override(cfg, "toy.buffer_size", buffer_flag);
  if (!eval_eps_flag.empty()) apply_override(cfg, "toy.eval_epsilon", eval_eps_flag);
  cfg.validate();

  if (label.empty()) {
    label = "toy_" + to_string(cfg.sampler.strategy);
    if (cfg.sampler.strategy == Strategy::IER) {
      if (cfg.sampler.pivot_mode != PivotMode::TdTop) {
        label += "_pivot_" + to_string(cfg.sampler.pivot_mode);
      }
      if (cfg.sampler.fill_mode != FillMode::LookBack) {
        label += "_fill_" + to_string(cfg.sampler.fill_mode);
      }
    }
  }
  fs::path dir = unique_dir(fs::path(out_root) / label);
  fs::create_directories(dir);

  std::vector<uint64_t> seeds;
  for (int i = 0; i < seed_count; ++i) seeds.push_back(base_seed + static_cast<uint64_t>(i));

  Manifest m;
  m.command = "toy";
  m.config_kv = config_to_kv(cfg);
  m.seeds = seeds;
  m.started_utc = utc_now_iso8601();
  for (uint64_t s : seeds) {
    m.outputs.push_back("freq_seed_" + std::to_string(s) + ".csv");
    m.outputs.push_back("qtable_seed_" + std::to_string(s) + ".csv");
  }
  m.outputs.push_back("rollouts.csv");
  write_manifest(dir / "manifest.json", m);

  std::vector<ToyRecord> recs;
  for (uint64_t s : seeds) {
    ExperimentConfig c = cfg;
    c.seed = s;
    recs.push_back(run_offline_toy(c));
  }
  for (const ToyRecord& rec : recs) {
    write_file(dir / ("freq_seed_" + std::to_string(rec.seed) + ".csv"),
               [&rec](std::ostream& os) { write_toy_frequency_csv(os, rec); });
    write_file(dir / ("qtable_seed_" + std::to_string(rec.seed) + ".csv"),
               [&rec](std::ostream& os) { write_toy_qtable_csv(os, rec); });
  }
  write_file(dir / "rollouts.csv", [&recs](std::ostream& os) {
    os << "seed,reached_goal,steps,return,total_sampled\n";
    for (const ToyRecord& rec : recs) {
      os << rec.seed << ',' << (rec.reached_goal ? 1 : 0) << ',' << rec.rollout_steps << ','
         << format_double(rec.rollout_return) << ',' << rec.total_sampled << '\n';
    }
  });
  m.finished_utc = utc_now_iso8601();
  write_manifest(dir / "manifest.json", m);

  std::cout << "wrote " << dir.string() << "\n";
  for (const ToyRecord& rec : recs) {
    std::cout << "  seed " << rec.seed << ": greedy rollout "
              << (rec.reached_goal ? "reached the goal" : "did not reach the goal") << " in "
              << rec.rollout_steps << " steps\n";
  }
  return 0;
}

int do_faultsim(int trials, int envs, int seeds_per_env, int k, double sigma,
                uint64_t seed, const std::string& out_path, const std::string& out_root) {
  FaultModel model;
  model.trials = trials;
  model.environments = envs;
  model.seeds_per_env = seeds_per_env;
  model.top_k = k;
  model.gaussian_sigma = sigma;
  model.validate();

  FaultAccuracy acc = fault_sim(model, seed);
  std::cout << "topk_accuracy=" << format_double(acc.topk) << "\n"
            << "avg_accuracy=" << format_double(acc.avg) << "\n";

  fs::path out = out_path.empty() ? fs::path(out_root) / "faultsim.csv" : fs::path(out_path);
  fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
  write_file(out, [&acc](std::ostream& os) {
    os << "metric,accuracy\n";
    os << "topk," << format_double(acc.topk) << '\n';
    os << "avg," << format_double(acc.avg) << '\n';
  });
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int do_report(const std::vector<std::string>& dirs, int k, const std::string& out_path) {
  std::vector<RunDirSummary> rows;
  for (const std::string& d : dirs) rows.push_back(summarize_run_dir(d, k));
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].ma_window != rows[0].ma_window) {
      throw std::runtime_error("mixed moving-average windows: '" + rows[0].dir + "' uses " +
                               std::to_string(rows[0].ma_window) + " but '" + rows[i].dir +
                               "' uses " + std::to_string(rows[i].ma_window));
    }
  }
  print_report(std::cout, rows);
  if (!out_path.empty()) {
    write_file(out_path, [&rows](std::ostream& os) { write_report_csv(os, rows); });
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"experience-replay sampling workbench"};
  app.require_subcommand(1);
  std::string out_root = default_out_root();

  // run
  auto* run = app.add_subcommand("run", "online training with a replay sampler");
  std::string r_config, r_env, r_episodes, r_eval_every, r_seed_list, r_manifest, r_label;
  std::string r_out = out_root;
  CommonRunFlags r_common;
  uint64_t r_seed = 0;
  int r_seed_count = 1;
  bool r_log_indices = false;
  run->add_option("--config", r_config, "flat key=value config file");
  run->add_option("--env", r_env, "gridworld|cartpole (preset)");
  r_common.bind(run);
  run->add_option("--episodes", r_episodes, "episodes to run");
  run->add_option("--eval-every", r_eval_every, "greedy eval cadence (0 = off)");
  run->add_flag("--log-indices", r_log_indices, "record every sampled buffer index");
  auto* r_seed_opt = run->add_option("--seed", r_seed, "base seed (consecutive seeds follow)");
  run->add_option("--seeds", r_seed_count, "number of seeds")->check(CLI::PositiveNumber);
  run->add_option("--seed-list", r_seed_list, "explicit comma-separated seed list");
  run->add_option("--from-manifest", r_manifest, "re-run the config+seeds of an existing manifest");
  run->add_option("--out", r_out, "output root directory (default $REPLAYLAB_OUT or ./out)");
  run->add_option("--label", r_label, "run directory name (default <env>_<sampler>)");

  // toy
  auto* toy = app.add_subcommand("toy", "offline gridworld study with a frozen random buffer");
  std::string t_epochs, t_buffer, t_eval_eps, t_label;
  std::string t_out = out_root;
  CommonRunFlags t_common;
  uint64_t t_seed = 1;
  int t_seed_count = 5;
  t_common.bind(toy);
  toy->add_option("--epochs", t_epochs, "offline training epochs");
  toy->add_option("--buffer-size", t_buffer, "random-walk buffer size");
  toy->add_option("--eval-epsilon", t_eval_eps, "noise for the final rollout (default 0 = greedy)");
  toy->add_option("--seed", t_seed, "base seed");
  toy->add_option("--seeds", t_seed_count, "number of seeds")->check(CLI::PositiveNumber);
  toy->add_option("--out", t_out, "output root directory");
  toy->add_option("--label", t_label, "run directory name");

  // faultsim
  auto* fault = app.add_subcommand("faultsim", "Monte-Carlo fault-tolerance metric study");
  int f_trials = 500, f_envs = 20, f_seeds = 10, f_k = 3;
  double f_sigma = 0.0;
  uint64_t f_seed = 1;
  std::string f_out;
  fault->add_option("--trials", f_trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
  fault->add_option("--envs", f_envs, "environments per trial")->check(CLI::PositiveNumber);
  fault->add_option("--seeds", f_seeds, "seeded runs per environment")->check(CLI::PositiveNumber);
  fault->add_option("--k", f_k, "top-k parameter")->check(CLI::PositiveNumber);
  fault->add_option("--sigma", f_sigma, "Gaussian noise on every outcome");
  fault->add_option("--seed", f_seed, "simulation seed");
  fault->add_option("--out", f_out, "accuracy CSV path (default <out-root>/faultsim.csv)");

  // report
  auto* report = app.add_subcommand("report", "aggregate run directories into a top-k table");
  std::vector<std::string> p_dirs;
  int p_k = 3;
  std::string p_out;
  report->add_option("dirs", p_dirs, "run directories (each holding manifest.json)")->required();
  report->add_option("--k", p_k, "top-k seeds to average")->check(CLI::PositiveNumber);
  report->add_option("--out", p_out, "also write the summary as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return do_run(r_config, r_env, r_common, r_episodes, r_eval_every, r_log_indices,
                    r_seed_opt->count() > 0, r_seed, r_seed_count, r_seed_list, r_manifest,
                    r_out, r_label);
    }
    if (toy->parsed()) {
      return do_toy(t_common, t_epochs, t_buffer, t_eval_eps, t_seed, t_seed_count, t_out,
                    t_label);
    }
    if (fault->parsed()) {
      return do_faultsim(f_trials, f_envs, f_seeds, f_k, f_sigma, f_seed, f_out, out_root);
    }
    if (report->parsed()) {
      return do_report(p_dirs, p_k, p_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
