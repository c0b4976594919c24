#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "orgmarl/harness.hpp"

namespace {

using namespace orgmarl;

// Shared flag plumbing: every value set on the command line overrides the
// config file; unset flags leave the file/default value alone.
struct CommonFlags {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key=value config file");
    auto opt = [this, app](const std::string& flag, const std::string& key,
                           const std::string& help) {
      app->add_option_function<std::string>(
          flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
    };
    opt("--agents", "agents", "number of agents");
    opt("--algo", "algo", "agent kind(s): ia2c+|iac|ia2c-, comma list per seat");
    opt("--episodes", "episodes", "training episode budget");
    opt("--horizon", "horizon", "episode horizon");
    opt("--phi", "phi", "history-dependence proportion");
    opt("--beta", "beta", "self reward multiplier");
    opt("--alpha", "alpha", "balance reward divisor");
    opt("--c", "c", "balance split fraction");
    opt("--r", "r", "base group reward");
    opt("--penalty", "penalty", "per-agent penalty at the lowest level");
    opt("--gamma", "gamma", "discount factor");
    opt("--private-noise", "private_noise", "private observation noise");
    opt("--public-noise", "public_noise", "public observation noise");
    opt("--seed", "seed", "master seed");
    opt("--out", "out", "output directory");
    opt("--name", "name", "experiment name");
    opt("--start", "start", "start level: vl|l|m|h|vh|uniform");
    opt("--batch", "batch", "episodes per update batch");
    opt("--updates-per-batch", "updates_per_batch", "optimizer steps per batch");
    opt("--hidden", "hidden", "hidden layer width");
    opt("--lr-actor", "lr_actor", "actor learning rate");
    opt("--lr-critic", "lr_critic", "critic learning rate");
    opt("--entropy", "entropy", "initial entropy coefficient");
  }

  RunConfig build() const {
    RunConfig cfg;
    if (!config_file.empty())
      cfg = parse_config(read_key_value_file(config_file), cfg);
    cfg = parse_config(overrides, cfg);
    return cfg;
  }
};

void print_full(std::ostream& os) {
  os.precision(std::numeric_limits<double>::max_digits10);
}

int cmd_run(const CommonFlags& flags) {
  RunConfig cfg = flags.build();
  cfg.validate();
  const RunOutcome oc = run(cfg);
  print_full(std::cout);
  std::cout << "run_dir=" << oc.run_dir << "\n"
            << "diverged=" << (oc.diverged ? 1 : 0) << "\n"
            << "optimal=" << (oc.certification.optimal ? 1 : 0) << "\n"
            << "gap=" << oc.certification.gap << "\n"
            << "policy_value=" << oc.certification.policy_value << "\n"
            << "best_value=" << oc.certification.best_value << "\n"
            << "episodes_to_convergence=" << oc.episodes_to_convergence << "\n"
            << "late_prediction_accuracy=" << oc.late_prediction_accuracy << "\n";
  if (oc.diverged) return 2;
  return oc.certification.optimal ? 0 : 1;
}

int cmd_sweep(const CommonFlags& flags, double lo, double hi, double step, int runs) {
  RunConfig cfg = flags.build();
  cfg.validate();
  std::vector<double> levels;
  for (double lv = lo; lv <= hi + 1e-12; lv += step) levels.push_back(lv);
  const SweepResult res = sweep_noise(cfg, levels, runs, cfg.out_dir);
  print_full(std::cout);
  for (std::size_t i = 0; i < res.levels.size(); ++i)
    std::cout << "level " << res.levels[i] << ": " << res.successes[i] << "/"
              << res.runs_per_level << "\n";
  return 0;
}

int cmd_oracle(const CommonFlags& flags, const std::string& mode,
               const std::string& gap_policy) {
  RunConfig cfg = flags.build();
  const DomainParams& dp = cfg.domain;
  const int horizon = cfg.horizon;
  print_full(std::cout);
  if (mode == "models") {
    dump_model_tables(std::cout);
    return 0;
  }
  if (mode == "crossover") {
    std::vector<double> betas, phis;
    for (double b = 2.5; b <= 6.0 + 1e-9; b += 0.125) betas.push_back(b);
    for (double p = 0.05; p <= 0.95 + 1e-9; p += 0.05) phis.push_back(p);
    const CrossoverGrid grid = policy_crossover(betas, phis, 9.0 / 4.0, horizon);
    std::cout << "beta,phi,horizon,winner,diff\n";
    for (const CrossoverCell& cell : grid.cells)
      std::cout << cell.beta << ',' << cell.phi << ',' << cell.horizon << ','
                << (cell.diff > 0 ? "pi0" : (cell.diff < 0 ? "pi1" : "tie")) << ','
                << cell.diff << '\n';
    return 0;
  }
  if (mode == "values") {
    const OrgState start{dp.start_level, 0.0};
    const BestResult best = enumerate_best(dp, horizon, dp.gamma, start);
    SymbolPolicy all_group, all_balance;
    all_group.by_symbol.fill(Action::Group);
    all_balance.by_symbol.fill(Action::Balance);
    const auto v_group = evaluate_joint(
        std::vector<SymbolPolicy>(dp.n_agents, all_group), dp, horizon, dp.gamma, start);
    const auto v_balance = evaluate_joint(
        std::vector<SymbolPolicy>(dp.n_agents, all_balance), dp, horizon, dp.gamma, start);
    std::cout << "policy,team_value\n";
    std::cout << "optimal," << best.team_value << "\n";
    std::cout << "only_group," << v_group.team << "\n";
    std::cout << "only_balance," << v_balance.team << "\n";
    for (std::size_t i = 0; i < best.policies.size(); ++i)
      std::cout << "# best agent" << i << ": " << to_string(best.policies[i]) << "\n";
    return 0;
  }
  if (mode == "certify") {
    // gap_policy: one 3-char policy (self<balance<group chars) per agent,
    // comma-separated, symbol order meager,several,many.
    std::vector<SymbolPolicy> policies;
    std::string token;
    std::stringstream ss(gap_policy);
    while (std::getline(ss, token, ',')) {
      if (token.size() != 3) throw std::invalid_argument("policy must be 3 chars (e.g. gbs)");
      SymbolPolicy p;
      for (int s = 0; s < 3; ++s)
        p.by_symbol[static_cast<std::size_t>(s)] = action_from_char(token[static_cast<std::size_t>(s)]);
      policies.push_back(p);
    }
    if (static_cast<int>(policies.size()) == 1)
      policies.assign(static_cast<std::size_t>(dp.n_agents), policies.front());
    const Certification cert =
        certify(policies, dp, horizon, dp.gamma, OrgState{dp.start_level, 0.0});
    std::cout << "{\n  \"optimal\": " << (cert.optimal ? "true" : "false")
              << ",\n  \"gap\": " << cert.gap
              << ",\n  \"policy_value\": " << cert.policy_value
              << ",\n  \"best_value\": " << cert.best_value << "\n}\n";
    return cert.optimal ? 0 : 1;
  }
  std::cerr << "unknown oracle mode: " << mode
            << " (expected crossover|values|certify|models)\n";
  return 2;
}

int cmd_export(const std::vector<std::string>& dirs, const std::string& out) {
  emit_plot_data(dirs, out);
  std::cout << "wrote plot data to " << out << "\n";
  return 0;
}

int cmd_gradcheck(uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    for (int out_dim : {3, 9}) {
      DenseNet net = DenseNet::init(kFeatureDim, 32, out_dim, rng);
      std::vector<double> x(kFeatureDim);
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      for (double& v : x) v = unif(rng);
      const int target = static_cast<int>(rng() % static_cast<uint64_t>(out_dim));
      auto loss = [&x, target](const DenseNet& n) {
        const ForwardCache fc = forward(n, x);
        const std::vector<double> p = softmax(fc.z);
        return -std::log(p[static_cast<std::size_t>(target)]);
      };
      const ForwardCache fc = forward(net, x);
      const std::vector<double> p = softmax(fc.z);
      std::vector<double> upstream(p.size());
      for (std::size_t k = 0; k < p.size(); ++k)
        upstream[k] = p[k] - (static_cast<int>(k) == target ? 1.0 : 0.0);
      const Gradients g = backward(net, fc, upstream);
      const GradCheckReport rep = grad_check(net, loss, g, 1e-4);
      worst = std::max(worst, rep.max_rel_error);
      if (!rep.pass) {
        std::cout << "FAIL trial " << trial << " out=" << out_dim
                  << " max_rel_error=" << rep.max_rel_error << " at "
                  << rep.worst_param << "\n";
        return 1;
      }
    }
  }
  print_full(std::cout);
  std::cout << "PASS max_rel_error=" << worst << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Organization-domain multi-agent RL workbench"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, oracle_flags;

  auto* sub_run = app.add_subcommand("run", "train agents and certify the result");
  run_flags.attach(sub_run);

  auto* sub_sweep = app.add_subcommand("sweep", "private-observation noise sweep");
  sweep_flags.attach(sub_sweep);
  double lo = 0.0, hi = 0.5, step = 0.05;
  int runs = 5;
  sub_sweep->add_option("--from", lo, "lowest noise level");
  sub_sweep->add_option("--to", hi, "highest noise level");
  sub_sweep->add_option("--step", step, "noise level step");
  sub_sweep->add_option("--runs", runs, "runs per level");

  auto* sub_oracle = app.add_subcommand("oracle", "exact evaluation utilities");
  oracle_flags.attach(sub_oracle);
  std::string mode = "values", gap_policy;
  sub_oracle->add_option("--mode", mode, "crossover|values|certify|models");
  sub_oracle->add_option("--policy", gap_policy,
                         "per-agent 3-char policy for certify (e.g. gbs)");

  auto* sub_export = app.add_subcommand("export", "emit per-figure CSVs from run logs");
  std::vector<std::string> dirs;
  std::string export_out = "plots";
  sub_export->add_option("--runs", dirs, "run directories")->required();
  sub_export->add_option("--out", export_out, "output directory");

  auto* sub_gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  uint64_t gc_seed = 7;
  sub_gradcheck->add_option("--seed", gc_seed, "seed for random instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_run->parsed()) return cmd_run(run_flags);
    if (sub_sweep->parsed()) return cmd_sweep(sweep_flags, lo, hi, step, runs);
    if (sub_oracle->parsed()) return cmd_oracle(oracle_flags, mode, gap_policy);
    if (sub_export->parsed()) return cmd_export(dirs, export_out);
    if (sub_gradcheck->parsed()) return cmd_gradcheck(gc_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
