#include "orgmarl/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace orgmarl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << x;
  return os.str();
}

int worker_cap() {
  if (const char* env = std::getenv("ORGMARL_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

json record_to_json(const EpisodeRecord& rec) {
  json j;
  j["episode"] = rec.episode;
  j["returns"] = rec.returns;
  j["critic_loss"] = rec.critic_loss;
  j["entropy"] = rec.entropy;
  j["pred_accuracy"] = rec.pred_accuracy;
  j["greedy"] = rec.greedy;
  return j;
}

void write_checkpoint(const std::string& dir, int episode,
                      const std::vector<Learner>& learners) {
  for (std::size_t i = 0; i < learners.size(); ++i) {
    const std::string stem =
        dir + "/checkpoint_ep" + std::to_string(episode) + "_agent" + std::to_string(i);
    {
      std::ofstream os(stem + "_actor.txt");
      save_net(learners[i].actor(), os);
    }
    {
      std::ofstream os(stem + "_critic.txt");
      save_net(learners[i].critic(), os);
    }
    if (learners[i].uses_belief()) {
      std::ofstream os(stem + "_belief.txt");
      os.precision(std::numeric_limits<double>::max_digits10);
      for (const ModelBelief& b : learners[i].beliefs()) {
        for (std::size_t m = 0; m < b.weights.size(); ++m)
          os << b.weights[m] << (m + 1 == b.weights.size() ? '\n' : ' ');
      }
    }
  }
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = fs::path(cfg.out_dir) / cfg.name;
  fs::create_directories(dir);

  {
    std::ofstream os(dir / "config.txt");
    os << serialize(cfg);
  }

  TrainConfig tc = cfg.to_train_config();
  CheckpointFn checkpoint;
  if (cfg.checkpoint_every > 0) {
    const std::string dir_str = dir.string();
    const int every = cfg.checkpoint_every;
    checkpoint = [dir_str, every](int episode, const std::vector<Learner>& learners) {
      if ((episode + 1) % every == 0) write_checkpoint(dir_str, episode + 1, learners);
    };
  }
  const TrainResult tr = train(tc, checkpoint);

  {
    std::ofstream os(dir / "runlog.jsonl");
    json header;
    header["version"] = kVersionString;
    header["config"] = serialize(cfg);
    os << header.dump() << '\n';
    for (const EpisodeRecord& rec : tr.records) os << record_to_json(rec).dump() << '\n';
  }

  RunOutcome out;
  out.run_dir = dir.string();
  out.diverged = tr.diverged;
  out.converged = tr.converged;
  out.episodes_run = tr.episodes_run;
  out.episodes_to_convergence = tr.episodes_to_convergence;
  out.late_prediction_accuracy = tr.late_prediction_accuracy;
  if (!tr.diverged) {
    out.certification = certify(tr.greedy_policies, cfg.domain, cfg.horizon,
                                cfg.domain.gamma,
                                OrgState{cfg.domain.start_level, 0.0});
  }

  {
    std::ofstream os(dir / "certification.json");
    json j;
    j["version"] = kVersionString;
    j["diverged"] = tr.diverged;
    j["optimal"] = out.certification.optimal;
    j["gap"] = out.certification.gap;
    j["policy_value"] = out.certification.policy_value;
    j["best_value"] = out.certification.best_value;
    j["episodes_run"] = out.episodes_run;
    j["episodes_to_convergence"] = out.episodes_to_convergence;
    j["late_prediction_accuracy"] = out.late_prediction_accuracy;
    os << j.dump(2) << '\n';
  }
  return out;
}

SweepResult sweep_noise(const RunConfig& base, const std::vector<double>& levels,
                        int runs_per_level, const std::string& out_dir) {
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw std::invalid_argument("noise levels must be strictly increasing");
  for (double lv : levels)
    if (lv < 0.0 || lv > 2.0 / 3.0)
      throw std::invalid_argument("noise levels must lie in [0, 2/3]");

  struct Job {
    std::size_t level_idx;
    int run_idx;
  };
  std::vector<Job> jobs;
  for (std::size_t li = 0; li < levels.size(); ++li)
    for (int ri = 0; ri < runs_per_level; ++ri) jobs.push_back(Job{li, ri});

  std::vector<SweepRun> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      RunConfig cfg = base;
      cfg.domain.eta_private = levels[job.level_idx];
      cfg.seed = base.seed + 1000 * job.level_idx + static_cast<uint64_t>(job.run_idx);
      cfg.out_dir = out_dir;
      std::ostringstream name;
      name << base.name << "_noise" << fmt(levels[job.level_idx]) << "_run" << job.run_idx;
      cfg.name = name.str();
      const RunOutcome oc = run(cfg);
      SweepRun sr;
      sr.level = levels[job.level_idx];
      sr.seed = cfg.seed;
      sr.gap = oc.certification.gap;
      sr.success = !oc.diverged && oc.certification.optimal;
      sr.episodes_to_convergence = oc.episodes_to_convergence;
      sr.late_prediction_accuracy = oc.late_prediction_accuracy;
      results[idx] = sr;
    }
  };

  const int workers = std::min<int>(worker_cap(), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();

  SweepResult res;
  res.levels = levels;
  res.runs_per_level = runs_per_level;
  res.successes.assign(levels.size(), 0);
  res.runs = results;  // jobs were built in (level, seed) order
  for (std::size_t idx = 0; idx < jobs.size(); ++idx)
    if (results[idx].success) res.successes[jobs[idx].level_idx] += 1;

  fs::create_directories(out_dir);
  std::ofstream os(fs::path(out_dir) / "sweep.csv");
  os << "level,successes,runs,mean_gap\n";
  for (std::size_t li = 0; li < levels.size(); ++li) {
    double gap_sum = 0.0;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx)
      if (jobs[idx].level_idx == li) gap_sum += results[idx].gap;
    os << fmt(levels[li]) << ',' << res.successes[li] << ',' << runs_per_level << ','
       << fmt(gap_sum / runs_per_level) << '\n';
  }
  return res;
}

namespace {

struct LoadedLog {
  std::vector<double> mean_return;   // per episode, mean over agents
  std::vector<double> mean_loss;
  std::vector<double> mean_accuracy;
};

bool load_runlog(const fs::path& path, LoadedLog& out) {
  std::ifstream is(path);
  if (!is) return false;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) return false;
    if (first) {  // header
      first = false;
      if (j.contains("version")) continue;
    }
    if (!j.contains("returns")) continue;
    auto mean_of = [&](const char* key) {
      double sum = 0.0;
      int n = 0;
      for (const auto& v : j[key]) {
        const double x = v.is_null() ? std::nan("") : v.get<double>();
        if (std::isfinite(x)) { sum += x; ++n; }
      }
      return n > 0 ? sum / n : std::nan("");
    };
    out.mean_return.push_back(mean_of("returns"));
    out.mean_loss.push_back(mean_of("critic_loss"));
    out.mean_accuracy.push_back(mean_of("pred_accuracy"));
  }
  return !out.mean_return.empty();
}

std::vector<double> smooth(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size(), std::nan(""));
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::isfinite(xs[i])) { sum += xs[i]; ++count; }
    if (i >= static_cast<std::size_t>(window)) {
      const double old = xs[i - static_cast<std::size_t>(window)];
      if (std::isfinite(old)) { sum -= old; --count; }
    }
    if (count > 0) out[i] = sum / count;
  }
  return out;
}

void write_series_csv(const fs::path& path, const std::string& value_name,
                      const std::vector<std::vector<double>>& per_seed) {
  std::size_t longest = 0;
  for (const auto& s : per_seed) longest = std::max(longest, s.size());
  std::ofstream os(path);
  os << "episode,mean_" << value_name << ",std_" << value_name << ",seeds\n";
  for (std::size_t ep = 0; ep < longest; ++ep) {
    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (const auto& s : per_seed) {
      if (ep < s.size() && std::isfinite(s[ep])) {
        sum += s[ep];
        sq += s[ep] * s[ep];
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    os << ep << ',' << fmt(mean) << ',' << fmt(std::sqrt(var)) << ',' << n << '\n';
  }
}

}  // namespace

void emit_plot_data(const std::vector<std::string>& run_dirs,
                    const std::string& out_dir) {
  fs::create_directories(out_dir);

  std::vector<std::vector<double>> returns, losses, accuracies;
  std::vector<std::string> sweep_files;
  for (const std::string& dir : run_dirs) {
    const fs::path log = fs::path(dir) / "runlog.jsonl";
    LoadedLog loaded;
    if (fs::exists(log)) {
      if (load_runlog(log, loaded)) {
        returns.push_back(smooth(loaded.mean_return, 200));
        losses.push_back(smooth(loaded.mean_loss, 200));
        accuracies.push_back(smooth(loaded.mean_accuracy, 200));
      } else {
        std::fprintf(stderr, "warning: skipping unparseable log %s\n", log.c_str());
      }
    }
    const fs::path sweep = fs::path(dir) / "sweep.csv";
    if (fs::exists(sweep)) sweep_files.push_back(sweep.string());
  }

  write_series_csv(fs::path(out_dir) / "reward_vs_episode.csv", "return", returns);
  write_series_csv(fs::path(out_dir) / "loss_vs_episode.csv", "critic_loss", losses);
  write_series_csv(fs::path(out_dir) / "accuracy_vs_episode.csv", "pred_accuracy",
                   accuracies);

  {
    std::ofstream os(fs::path(out_dir) / "success_vs_noise.csv");
    os << "level,successes,runs,mean_gap\n";
    for (const std::string& file : sweep_files) {
      std::ifstream is(file);
      std::string line;
      std::getline(is, line);  // header
      while (std::getline(is, line))
        if (!line.empty()) os << line << '\n';
    }
  }

  // Crossover surfaces for the pi0/pi1 comparison at horizons 4 and 8.
  for (int horizon : {4, 8}) {
    std::vector<double> betas, phis;
    for (double b = 2.5; b <= 6.0 + 1e-9; b += 0.125) betas.push_back(b);
    for (double p = 0.05; p <= 0.95 + 1e-9; p += 0.05) phis.push_back(p);
    const CrossoverGrid grid = policy_crossover(betas, phis, 9.0 / 4.0, horizon);
    std::ofstream os(fs::path(out_dir) /
                     ("crossover_h" + std::to_string(horizon) + ".csv"));
    os << "beta,phi,horizon,winner,diff\n";
    for (const CrossoverCell& cell : grid.cells) {
      os << fmt(cell.beta) << ',' << fmt(cell.phi) << ',' << cell.horizon << ','
         << (cell.diff > 0 ? "pi0" : (cell.diff < 0 ? "pi1" : "tie")) << ','
         << fmt(cell.diff) << '\n';
    }
  }
}

}  // namespace orgmarl
