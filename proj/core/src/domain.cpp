#include "orgmarl/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace orgmarl {

const char* to_string(Action a) {
  switch (a) {
    case Action::Self: return "self";
    case Action::Balance: return "balance";
    case Action::Group: return "group";
  }
  return "?";
}

const char* to_string(PublicSymbol s) {
  switch (s) {
    case PublicSymbol::Meager: return "meager";
    case PublicSymbol::Several: return "several";
    case PublicSymbol::Many: return "many";
  }
  return "?";
}

const char* to_string(Level l) {
  switch (l) {
    case Level::VeryLow: return "vl";
    case Level::Low: return "l";
    case Level::Medium: return "m";
    case Level::High: return "h";
    case Level::VeryHigh: return "vh";
  }
  return "?";
}

char action_char(Action a) {
  switch (a) {
    case Action::Self: return 's';
    case Action::Balance: return 'b';
    case Action::Group: return 'g';
  }
  return '?';
}

Action action_from_char(char c) {
  switch (c) {
    case 's': return Action::Self;
    case 'b': return Action::Balance;
    case 'g': return Action::Group;
  }
  throw std::invalid_argument(std::string("unknown action char: ") + c);
}

double RewardBreakdown::team_total() const {
  double sum = group_reward;
  for (double ri : individual) sum += ri;
  return sum;
}

double RewardBreakdown::agent_total(int i) const {
  return group_reward + individual.at(static_cast<std::size_t>(i)) + bonus;
}

void DomainParams::validate() const {
  if (r <= 0.0) throw std::invalid_argument("r must be > 0");
  if (beta <= 1.0) throw std::invalid_argument("beta must be > 1");
  const double dv = d();
  if (!(dv > 1.0 && dv < beta))
    throw std::invalid_argument("(1+beta)/alpha must lie in (1, beta)");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must be in (0,1)");
  if (!(phi >= 0.0 && phi < 1.0)) throw std::invalid_argument("phi must be in [0,1)");
  if (penalty >= 0.0) throw std::invalid_argument("penalty must be < 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
  if (n_agents < 2) throw std::invalid_argument("n_agents must be >= 2");
  if (eta_private < 0.0 || eta_private > 2.0 / 3.0)
    throw std::invalid_argument("eta_private must be in [0, 2/3]");
  if (eta_public < 0.0 || eta_public > 2.0 / 3.0)
    throw std::invalid_argument("eta_public must be in [0, 2/3]");
}

double DomainParams::max_step_reward() const {
  double best = 0.0;
  std::vector<Action> actions(static_cast<std::size_t>(n_agents));
  const long combos = static_cast<long>(std::pow(3.0, n_agents) + 0.5);
  for (int lv = 0; lv < kNumLevels; ++lv) {
    for (long code = 0; code < combos; ++code) {
      long rem = code;
      for (int i = 0; i < n_agents; ++i) {
        actions[static_cast<std::size_t>(i)] = static_cast<Action>(rem % 3);
        rem /= 3;
      }
      const RewardBreakdown rb = base_rewards(static_cast<Level>(lv), actions, *this);
      best = std::max(best, std::abs(rb.team_total()));
    }
  }
  return best;
}

JointOutcome resolve_joint(const std::vector<Action>& actions) {
  if (actions.empty()) throw std::invalid_argument("empty action vector");
  int n_self = 0, n_group = 0;
  for (Action a : actions) {
    if (a == Action::Self) ++n_self;
    if (a == Action::Group) ++n_group;
  }
  JointOutcome out;
  if (n_self > n_group) {
    out.category = Action::Self;
  } else if (n_self < n_group) {
    out.category = Action::Group;
    out.unanimous_group = (n_group == static_cast<int>(actions.size()));
  } else {
    out.category = Action::Balance;
  }
  return out;
}

Level transition_level(Level level, const JointOutcome& outcome) {
  int lv = static_cast<int>(level);
  switch (outcome.category) {
    case Action::Self: lv -= 1; break;
    case Action::Balance: break;
    case Action::Group: lv += outcome.unanimous_group ? 2 : 1; break;
  }
  lv = std::clamp(lv, 0, kNumLevels - 1);
  return static_cast<Level>(lv);
}

PublicSymbol level_symbol(Level level) {
  switch (level) {
    case Level::VeryLow:
    case Level::Low: return PublicSymbol::Meager;
    case Level::Medium:
    case Level::High: return PublicSymbol::Several;
    case Level::VeryHigh: return PublicSymbol::Many;
  }
  return PublicSymbol::Several;
}

RewardBreakdown base_rewards(Level level, const std::vector<Action>& actions,
                             const DomainParams& params) {
  if (actions.empty()) throw std::invalid_argument("empty action vector");
  RewardBreakdown rb;
  rb.individual.assign(actions.size(), 0.0);
  const double dr = params.d() * params.r;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    switch (actions[i]) {
      case Action::Self:
        rb.individual[i] += params.beta * params.r;
        break;
      case Action::Balance:
        rb.individual[i] += params.c * dr;
        rb.group_reward += (1.0 - params.c) * dr;
        break;
      case Action::Group:
        rb.group_reward += params.r;
        break;
    }
    if (level == Level::VeryLow) rb.individual[i] += params.penalty;
  }
  return rb;
}

namespace {

// Draw from {0,1,2} where `correct` has probability 1-eta and the others eta/2 each.
int noisy_symbol(int correct, double eta, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  if (u < 1.0 - eta) return correct;
  const int wrong = (u < 1.0 - eta / 2.0) ? 1 : 2;
  return (correct + wrong) % 3;
}

}  // namespace

PublicSymbol sample_public_symbol(Level level, double eta, Rng& rng) {
  return static_cast<PublicSymbol>(
      noisy_symbol(static_cast<int>(level_symbol(level)), eta, rng));
}

PrivateSymbol sample_private_symbol(Action actual, double eta, Rng& rng) {
  return static_cast<PrivateSymbol>(noisy_symbol(static_cast<int>(actual), eta, rng));
}

Environment::Environment(DomainParams params) : params_(std::move(params)) {
  params_.validate();
  state_ = OrgState{params_.start_level, 0.0};
}

OrgState Environment::reset(Rng& rng) {
  Level start = params_.start_level;
  if (params_.uniform_start) {
    std::uniform_int_distribution<int> pick(0, kNumLevels - 1);
    start = static_cast<Level>(pick(rng));
  }
  state_ = OrgState{start, 0.0};
  return state_;
}

PublicSymbol Environment::initial_symbol(Rng& rng) const {
  return sample_public_symbol(state_.level, params_.eta_public, rng);
}

StepResult Environment::step(const std::vector<Action>& actions, Rng& rng) {
  if (static_cast<int>(actions.size()) != params_.n_agents)
    throw std::invalid_argument("action vector length must equal n_agents");

  StepResult res;
  res.outcome = resolve_joint(actions);
  res.rewards = base_rewards(state_.level, actions, params_);
  res.rewards.bonus = params_.phi * state_.s_r;

  const double team_base = res.rewards.team_total();
  res.state.level = transition_level(state_.level, res.outcome);
  res.state.s_r = team_base + params_.phi * state_.s_r;
  res.o_r = res.state.s_r;
  res.public_symbol = sample_public_symbol(res.state.level, params_.eta_public, rng);

  res.totals.resize(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i)
    res.totals[i] = res.rewards.agent_total(static_cast<int>(i));

  res.private_obs.resize(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    for (std::size_t j = 0; j < actions.size(); ++j) {
      if (j == i) continue;
      res.private_obs[i].push_back(
          sample_private_symbol(actions[j], params_.eta_private, rng));
    }
  }

  state_ = res.state;
  return res;
}

}  // namespace orgmarl
