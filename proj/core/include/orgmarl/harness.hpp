#pragma once

#include <string>
#include <vector>

#include "orgmarl/config.hpp"

namespace orgmarl {

struct RunOutcome {
  Certification certification;
  bool diverged = false;
  bool converged = false;
  int episodes_run = 0;
  int episodes_to_convergence = -1;
  double late_prediction_accuracy = 0.0;
  std::string run_dir;
};

// Executes one training run: writes config.txt, runlog.jsonl, checkpoints and
// certification.json under <out_dir>/<name>. Deterministic given the seed.
RunOutcome run(const RunConfig& cfg);

struct SweepRun {
  double level = 0.0;
  uint64_t seed = 0;
  double gap = 0.0;
  bool success = false;
  int episodes_to_convergence = -1;
  double late_prediction_accuracy = 0.0;
};

struct SweepResult {
  std::vector<double> levels;
  std::vector<int> successes;       // per level
  int runs_per_level = 0;
  std::vector<SweepRun> runs;       // ordered by (level, seed)
};

// Noise sweep over eta_private. Parallelism is capped by ORGMARL_WORKERS;
// results are merged in (level, seed) order so worker count never changes
// the output. Writes sweep.csv in out_dir.
SweepResult sweep_noise(const RunConfig& base, const std::vector<double>& levels,
                        int runs_per_level, const std::string& out_dir);

// Per-figure CSV exports from run logs (and sweep.csv files found in the given
// directories). Smoothing (trailing window 200, mean/std over seeds) happens
// only here, never in the logs. Re-running is byte-idempotent.
void emit_plot_data(const std::vector<std::string>& run_dirs,
                    const std::string& out_dir);

}  // namespace orgmarl
