#include "replay/run_io.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "replay/config.hpp"
#include "replay/format.hpp"
#include "replay/metrics.hpp"

namespace replay {

void write_run_csv(std::ostream& os, const RunRecord& rec, int ma_window) {
  os << "episode,return,moving_avg,loss\n";
  if (rec.episode_return.empty()) return;
  std::vector<double> ma = moving_average(rec.episode_return, ma_window);
  for (size_t i = 0; i < rec.episode_return.size(); ++i) {
    os << i << ',' << format_double(rec.episode_return[i]) << ',' << format_double(ma[i])
       << ',' << format_double(rec.loss_mean[i]) << '\n';
  }
}

void write_timing_csv(std::ostream& os, const RunRecord& rec) {
  os << "episode,wall_ms\n";
  for (size_t i = 0; i < rec.wall_ms.size(); ++i) {
    os << i << ',' << format_double(rec.wall_ms[i]) << '\n';
  }
}

void write_eval_csv(std::ostream& os, const RunRecord& rec) {
  os << "episode,eval_return\n";
  for (size_t i = 0; i < rec.eval_episode.size(); ++i) {
    os << rec.eval_episode[i] << ',' << format_double(rec.eval_return[i]) << '\n';
  }
}

void write_indices_csv(std::ostream& os, const RunRecord& rec) {
  os << "sampled_index\n";
  for (uint64_t i : rec.sampled_index_log) os << i << '\n';
}

void write_toy_frequency_csv(std::ostream& os, const ToyRecord& rec) {
  os << "state,count\n";
  for (size_t s = 0; s < rec.absolute_frequency.size(); ++s) {
    os << (s + 1) << ',' << rec.absolute_frequency[s] << '\n';
  }
}

void write_toy_qtable_csv(std::ostream& os, const ToyRecord& rec) {
  const size_t num_actions = rec.q_table.size() / rec.absolute_frequency.size();
  os << "state";
  for (size_t a = 0; a < num_actions; ++a) os << ",q" << a;
  os << '\n';
  for (size_t s = 0; s < rec.absolute_frequency.size(); ++s) {
    os << (s + 1);
    for (size_t a = 0; a < num_actions; ++a) {
      os << ',' << format_double(rec.q_table[s * num_actions + a]);
    }
    os << '\n';
  }
}

std::string utc_now_iso8601() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["command"] = m.command;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : m.config_kv) cfg[k] = v;
  j["config"] = cfg;
  j["seeds"] = m.seeds;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  j["outputs"] = m.outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("bad manifest '" + path.string() + "': " + e.what());
  }
  Manifest m;
  m.version = j.at("version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  for (const auto& [k, v] : j.at("config").items()) {
    m.config_kv.emplace_back(k, v.get<std::string>());
  }
  m.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  m.started_utc = j.value("started_utc", "");
  m.finished_utc = j.value("finished_utc", "");
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

double final_moving_avg_of_csv(const std::filesystem::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open run CSV '" + csv.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty run CSV '" + csv.string() + "'");
  if (line != "episode,return,moving_avg,loss") {
    throw std::runtime_error("unexpected schema in '" + csv.string() + "': " + line);
  }
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw std::runtime_error("no data rows in '" + csv.string() + "'");
  auto cells = split_csv_line(last);
  if (cells.size() != 4) throw std::runtime_error("malformed row in '" + csv.string() + "'");
  return parse_double(cells[2]);
}

RunDirSummary summarize_run_dir(const std::filesystem::path& dir, int k) {
  Manifest m = read_manifest(dir / "manifest.json");
  ExperimentConfig cfg = config_from_kv(m.config_kv);

  RunDirSummary s;
  s.dir = dir.string();
  s.env = cfg.env_id;
  s.sampler = to_string(cfg.sampler.strategy);
  s.ma_window = cfg.ma_window;
  s.k = k;
  if (m.seeds.empty()) throw std::runtime_error("manifest in '" + dir.string() + "' lists no seeds");
  if (k < 1 || static_cast<size_t>(k) > m.seeds.size()) {
    throw std::runtime_error("k=" + std::to_string(k) + " out of range for " +
                             std::to_string(m.seeds.size()) + " seeds in '" + dir.string() + "'");
  }
  for (uint64_t seed : m.seeds) {
    s.finals.push_back(final_moving_avg_of_csv(dir / ("seed_" + std::to_string(seed) + ".csv")));
  }
  s.topk = topk_final(s.finals, k);

  std::vector<double> sorted(s.finals);
  std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(), std::greater<>());
  double var = 0.0;
  for (int i = 0; i < k; ++i) {
    double d = sorted[static_cast<size_t>(i)] - s.topk;
    var += d * d;
  }
  s.topk_std = k > 1 ? std::sqrt(var / static_cast<double>(k - 1)) : 0.0;
  return s;
}

void write_report_csv(std::ostream& os, std::span<const RunDirSummary> rows) {
  os << "dir,env,sampler,n_seeds,k,topk_mean,topk_std\n";
  for (const auto& r : rows) {
    os << r.dir << ',' << r.env << ',' << r.sampler << ',' << r.finals.size() << ',' << r.k
       << ',' << format_double(r.topk) << ',' << format_double(r.topk_std) << '\n';
  }
}

void print_report(std::ostream& os, std::span<const RunDirSummary> rows) {
  os << std::left << std::setw(36) << "dir" << std::setw(11) << "env" << std::setw(9)
     << "sampler" << std::setw(7) << "seeds" << std::setw(4) << "k"
     << std::setw(12) << "topk_mean" << "topk_std\n";
  for (const auto& r : rows) {
    std::ostringstream mean, sd;
    mean << std::fixed << std::setprecision(2) << r.topk;
    sd << std::fixed << std::setprecision(2) << r.topk_std;
    os << std::left << std::setw(36) << r.dir << std::setw(11) << r.env << std::setw(9)
       << r.sampler << std::setw(7) << r.finals.size() << std::setw(4) << r.k
       << std::setw(12) << mean.str() << sd.str() << '\n';
  }
}

}  // namespace replay
