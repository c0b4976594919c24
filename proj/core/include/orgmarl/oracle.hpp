#pragma once

#include <array>
#include <optional>
#include <vector>

#include "orgmarl/models.hpp"

namespace orgmarl {

// Stationary policy over the three public symbols.
struct SymbolPolicy {
  std::array<Action, kNumSymbols> by_symbol{Action::Balance, Action::Balance,
                                            Action::Balance};
  Action operator()(PublicSymbol s) const {
    return by_symbol[static_cast<std::size_t>(s)];
  }
  bool operator==(const SymbolPolicy&) const = default;
};
inline constexpr int kNumSymbolPolicies = 27;  // 3^3
SymbolPolicy symbol_policy_from_index(int idx);
int symbol_policy_index(const SymbolPolicy& p);
std::string to_string(const SymbolPolicy& p);

// Stationary policy over the nine two-step windows (the learners' index set).
struct WindowPolicy {
  std::array<Action, kNumWindows> by_window{};
  Action operator()(ObsWindow w) const {
    return by_window[static_cast<std::size_t>(w.index())];
  }
};

// Majority vote over the three windows sharing each current symbol;
// ties broken by fixed action order (self < balance < group).
SymbolPolicy coarsen(const WindowPolicy& p);

struct BonusResult {
  double total = 0.0;
  std::vector<double> bonuses;  // b_t, with b_1 = 0
};

// b_t = phi * (x_{t-1} + b_{t-1}); total = sum_t (x_t + b_t).
BonusResult bonus_accumulate(const std::vector<double>& base_rewards, double phi);

// Reference reward sequences behind the pi0/pi1 comparison:
// pi0 repeats the period-3 pattern {beta r, beta r, r};
// pi1 plays {beta r, beta r} then d r forever.
std::vector<double> pi0_base_sequence(int horizon, double beta, double r);
std::vector<double> pi1_base_sequence(int horizon, double beta, double d, double r);

struct CrossoverCell {
  double beta = 0.0, phi = 0.0;
  int horizon = 0;
  double diff = 0.0;  // total(pi0) - total(pi1)
};

struct CrossoverGrid {
  std::vector<CrossoverCell> cells;
  // True if some beta in the grid has both signs of diff across the phi range.
  bool phi_flips_winner = false;
};

CrossoverGrid policy_crossover(const std::vector<double>& betas,
                               const std::vector<double>& phis, double d, int horizon,
                               double r = 1.0);

struct TrajPoint {
  Level level = Level::Medium;
  Action category = Action::Balance;
  double base_total = 0.0;
  double bonus = 0.0;
};

struct EvalResult {
  std::vector<double> per_agent;  // discounted per-agent totals incl. bonuses
  double team = 0.0;              // sum of per-agent values
  std::vector<TrajPoint> trajectory;  // deterministic case only
};

// Exact finite-horizon evaluation of fixed per-symbol policies. Deterministic
// rollout when eta_public == 0; otherwise exact expectation by enumerating
// public-symbol branches (refused beyond horizon 12).
EvalResult evaluate_joint(const std::vector<SymbolPolicy>& policies,
                          const DomainParams& params, int horizon, double gamma,
                          const OrgState& start);

struct BestResult {
  std::vector<SymbolPolicy> policies;
  double team_value = 0.0;
  // Best team-value gain available to each agent by unilaterally changing its
  // own policy (documentation only, not an equilibrium claim).
  std::vector<double> deviation_gain;
};

// Exhaustive 27^n joint enumeration for n == 2; symmetric restriction plus
// best-response sweeps for n in {3,4}. Ties broken lexicographically.
BestResult enumerate_best(const DomainParams& params, int horizon, double gamma,
                          const OrgState& start);

struct Certification {
  bool optimal = false;
  double gap = 0.0;
  double policy_value = 0.0;
  double best_value = 0.0;
};

inline constexpr double kCertifyGapThreshold = 0.05;

Certification certify(const std::vector<WindowPolicy>& greedy,
                      const DomainParams& params, int horizon, double gamma,
                      const OrgState& start);
Certification certify(const std::vector<SymbolPolicy>& policies,
                      const DomainParams& params, int horizon, double gamma,
                      const OrgState& start);

}  // namespace orgmarl
