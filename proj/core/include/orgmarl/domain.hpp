#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace orgmarl {

using Rng = std::mt19937_64;

enum class Action : int { Self = 0, Balance = 1, Group = 2 };
inline constexpr int kNumActions = 3;

// Private observation symbols mirror the action set: saw_self / saw_balance / saw_group.
using PrivateSymbol = Action;

enum class PublicSymbol : int { Meager = 0, Several = 1, Many = 2 };
inline constexpr int kNumSymbols = 3;

enum class Level : int { VeryLow = 0, Low = 1, Medium = 2, High = 3, VeryHigh = 4 };
inline constexpr int kNumLevels = 5;

const char* to_string(Action a);
const char* to_string(PublicSymbol s);
const char* to_string(Level l);
char action_char(Action a);   // 's', 'b', 'g'
Action action_from_char(char c);

// Organization health level plus the reward-memory feature s_r.
struct OrgState {
  Level level = Level::Medium;
  double s_r = 0.0;
};

struct JointOutcome {
  Action category = Action::Balance;
  bool unanimous_group = false;
};

struct RewardBreakdown {
  double group_reward = 0.0;            // R0, received by every agent
  std::vector<double> individual;       // Ri, one per agent
  double bonus = 0.0;                   // phi * s_r of the pre-step state
  double team_total() const;            // sum(Ri) + R0, bonus excluded
  double agent_total(int i) const;      // R0 + Ri[i] + bonus
};

struct DomainParams {
  double r = 1.0;
  double beta = 4.0;
  double alpha = 20.0 / 9.0;            // d = (1+beta)/alpha = 9/4
  double c = 0.5;
  double phi = 0.8;
  double penalty = -10.0;               // applied per agent at s_vl
  double gamma = 0.95;
  int n_agents = 2;
  double eta_private = 0.2;
  double eta_public = 0.0;
  Level start_level = Level::Medium;
  bool uniform_start = false;

  double d() const { return (1.0 + beta) / alpha; }
  // Largest |team-total base reward| over levels and joint actions.
  double max_step_reward() const;
  // Bound on |s_r|: max_step_reward / (1 - phi).
  double reward_bound() const { return max_step_reward() / (1.0 - phi); }
  void validate() const;                // throws std::invalid_argument
};

// Majority vote over individual actions. Ties between self and group counts give balance.
JointOutcome resolve_joint(const std::vector<Action>& actions);

// self: -1, balance: 0, group: +1, unanimous group: +2; clamped to [0,4].
Level transition_level(Level level, const JointOutcome& outcome);

// Deterministic level -> order-volume symbol map: {vl,l} -> meager, {m,h} -> several, {vh} -> many.
PublicSymbol level_symbol(Level level);

// Additive per-agent contributions; penalty applied at s_vl. Bonus field left at 0.
RewardBreakdown base_rewards(Level level, const std::vector<Action>& actions,
                             const DomainParams& params);

// Noisy emission: correct symbol with probability 1-eta, each wrong one with eta/2.
PublicSymbol sample_public_symbol(Level level, double eta, Rng& rng);
PrivateSymbol sample_private_symbol(Action actual, double eta, Rng& rng);

struct StepResult {
  OrgState state;                       // post-step state
  JointOutcome outcome;
  RewardBreakdown rewards;              // bonus populated
  PublicSymbol public_symbol;           // shared by all agents
  double o_r = 0.0;                     // readout of the new s_r, exact
  // private_obs[i][k]: agent i's noisy view of the k-th other agent's action
  // (others listed in increasing agent index, skipping i).
  std::vector<std::vector<PrivateSymbol>> private_obs;
  std::vector<double> totals;           // per-agent total reward incl. bonus
};

// One environment instance per worker; all randomness flows through the rng argument.
class Environment {
 public:
  explicit Environment(DomainParams params);

  OrgState reset(Rng& rng);
  // Symbol emitted for the current state, with public noise. Used at episode start.
  PublicSymbol initial_symbol(Rng& rng) const;

  StepResult step(const std::vector<Action>& actions, Rng& rng);

  const OrgState& state() const { return state_; }
  const DomainParams& params() const { return params_; }

 private:
  DomainParams params_;
  OrgState state_;
};

}  // namespace orgmarl
