#include "orgmarl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace orgmarl {

SymbolPolicy symbol_policy_from_index(int idx) {
  if (idx < 0 || idx >= kNumSymbolPolicies)
    throw std::invalid_argument("symbol policy index out of range");
  SymbolPolicy p;
  for (int s = 0; s < kNumSymbols; ++s) {
    p.by_symbol[static_cast<std::size_t>(s)] = static_cast<Action>(idx % 3);
    idx /= 3;
  }
  return p;
}

int symbol_policy_index(const SymbolPolicy& p) {
  int idx = 0;
  for (int s = kNumSymbols - 1; s >= 0; --s)
    idx = idx * 3 + static_cast<int>(p.by_symbol[static_cast<std::size_t>(s)]);
  return idx;
}

std::string to_string(const SymbolPolicy& p) {
  std::string out;
  for (int s = 0; s < kNumSymbols; ++s) {
    out += to_string(static_cast<PublicSymbol>(s));
    out += ':';
    out += to_string(p.by_symbol[static_cast<std::size_t>(s)]);
    if (s + 1 < kNumSymbols) out += ' ';
  }
  return out;
}

SymbolPolicy coarsen(const WindowPolicy& p) {
  SymbolPolicy out;
  for (int cur = 0; cur < kNumSymbols; ++cur) {
    std::array<int, kNumActions> votes{};
    for (int prev = 0; prev < kNumSymbols; ++prev) {
      const ObsWindow w{static_cast<PublicSymbol>(prev), static_cast<PublicSymbol>(cur)};
      votes[static_cast<std::size_t>(p(w))] += 1;
    }
    int best = 0;
    for (int a = 1; a < kNumActions; ++a)
      if (votes[static_cast<std::size_t>(a)] > votes[static_cast<std::size_t>(best)])
        best = a;
    out.by_symbol[static_cast<std::size_t>(cur)] = static_cast<Action>(best);
  }
  return out;
}

BonusResult bonus_accumulate(const std::vector<double>& base_rewards, double phi) {
  if (phi < 0.0 || phi >= 1.0) throw std::invalid_argument("phi must be in [0,1)");
  BonusResult res;
  res.bonuses.resize(base_rewards.size(), 0.0);
  double prev_total = 0.0;
  for (std::size_t t = 0; t < base_rewards.size(); ++t) {
    res.bonuses[t] = phi * prev_total;
    prev_total = base_rewards[t] + res.bonuses[t];
    res.total += prev_total;
  }
  return res;
}

std::vector<double> pi0_base_sequence(int horizon, double beta, double r) {
  std::vector<double> seq(static_cast<std::size_t>(horizon));
  const double pattern[3] = {beta * r, beta * r, r};
  for (int t = 0; t < horizon; ++t) seq[static_cast<std::size_t>(t)] = pattern[t % 3];
  return seq;
}

std::vector<double> pi1_base_sequence(int horizon, double beta, double d, double r) {
  std::vector<double> seq(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t)
    seq[static_cast<std::size_t>(t)] = (t < 2) ? beta * r : d * r;
  return seq;
}

CrossoverGrid policy_crossover(const std::vector<double>& betas,
                               const std::vector<double>& phis, double d, int horizon,
                               double r) {
  if (horizon < 4) throw std::invalid_argument("horizon must be >= 4");
  CrossoverGrid grid;
  for (double beta : betas) {
    bool pi0_wins = false, pi1_wins = false;
    for (double phi : phis) {
      const double t0 = bonus_accumulate(pi0_base_sequence(horizon, beta, r), phi).total;
      const double t1 = bonus_accumulate(pi1_base_sequence(horizon, beta, d, r), phi).total;
      grid.cells.push_back(CrossoverCell{beta, phi, horizon, t0 - t1});
      if (t0 > t1) pi0_wins = true;
      if (t1 > t0) pi1_wins = true;
    }
    if (pi0_wins && pi1_wins) grid.phi_flips_winner = true;
  }
  return grid;
}

namespace {

struct Branch {
  OrgState state;
  // Each agent's currently observed symbol (drives its policy).
  std::array<PublicSymbol, 8> symbols;
  double prob = 1.0;
};

EvalResult evaluate_deterministic(const std::vector<SymbolPolicy>& policies,
                                  const DomainParams& params, int horizon, double gamma,
                                  const OrgState& start) {
  const int n = static_cast<int>(policies.size());
  EvalResult res;
  res.per_agent.assign(static_cast<std::size_t>(n), 0.0);
  OrgState state = start;
  PublicSymbol symbol = level_symbol(state.level);
  double discount = 1.0;
  std::vector<Action> actions(static_cast<std::size_t>(n));
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i)
      actions[static_cast<std::size_t>(i)] = policies[static_cast<std::size_t>(i)](symbol);
    const JointOutcome outcome = resolve_joint(actions);
    RewardBreakdown rb = base_rewards(state.level, actions, params);
    rb.bonus = params.phi * state.s_r;
    const double team_base = rb.team_total();
    for (int i = 0; i < n; ++i)
      res.per_agent[static_cast<std::size_t>(i)] += discount * rb.agent_total(i);
    res.trajectory.push_back(TrajPoint{state.level, outcome.category, team_base, rb.bonus});
    state.level = transition_level(state.level, outcome);
    state.s_r = team_base + params.phi * state.s_r;
    symbol = level_symbol(state.level);
    discount *= gamma;
  }
  for (double v : res.per_agent) res.team += v;
  return res;
}

EvalResult evaluate_noisy(const std::vector<SymbolPolicy>& policies,
                          const DomainParams& params, int horizon, double gamma,
                          const OrgState& start) {
  if (horizon > 12)
    throw std::invalid_argument("noisy evaluation refused beyond horizon 12");
  const int n = static_cast<int>(policies.size());
  EvalResult res;
  res.per_agent.assign(static_cast<std::size_t>(n), 0.0);

  // The public symbol is shared, so all agents branch together.
  std::vector<Branch> branches;
  {
    const PublicSymbol true_sym = level_symbol(start.level);
    for (int s = 0; s < kNumSymbols; ++s) {
      const double p = (s == static_cast<int>(true_sym)) ? 1.0 - params.eta_public
                                                         : params.eta_public / 2.0;
      if (p <= 0.0) continue;
      Branch b;
      b.state = start;
      b.symbols.fill(static_cast<PublicSymbol>(s));
      b.prob = p;
      branches.push_back(b);
    }
  }

  double discount = 1.0;
  std::vector<Action> actions(static_cast<std::size_t>(n));
  for (int t = 0; t < horizon; ++t) {
    std::vector<Branch> next;
    next.reserve(branches.size() * kNumSymbols);
    for (const Branch& b : branches) {
      for (int i = 0; i < n; ++i)
        actions[static_cast<std::size_t>(i)] =
            policies[static_cast<std::size_t>(i)](b.symbols[static_cast<std::size_t>(i)]);
      const JointOutcome outcome = resolve_joint(actions);
      RewardBreakdown rb = base_rewards(b.state.level, actions, params);
      rb.bonus = params.phi * b.state.s_r;
      for (int i = 0; i < n; ++i)
        res.per_agent[static_cast<std::size_t>(i)] += b.prob * discount * rb.agent_total(i);
      OrgState s2;
      s2.level = transition_level(b.state.level, outcome);
      s2.s_r = rb.team_total() + params.phi * b.state.s_r;
      const PublicSymbol true_sym = level_symbol(s2.level);
      for (int s = 0; s < kNumSymbols; ++s) {
        const double p = (s == static_cast<int>(true_sym)) ? 1.0 - params.eta_public
                                                           : params.eta_public / 2.0;
        if (p <= 0.0) continue;
        Branch nb;
        nb.state = s2;
        nb.symbols.fill(static_cast<PublicSymbol>(s));
        nb.prob = b.prob * p;
        next.push_back(nb);
      }
    }
    branches = std::move(next);
    discount *= gamma;
  }
  for (double v : res.per_agent) res.team += v;
  return res;
}

}  // namespace

EvalResult evaluate_joint(const std::vector<SymbolPolicy>& policies,
                          const DomainParams& params, int horizon, double gamma,
                          const OrgState& start) {
  if (static_cast<int>(policies.size()) != params.n_agents)
    throw std::invalid_argument("one policy per agent required");
  if (params.eta_public == 0.0)
    return evaluate_deterministic(policies, params, horizon, gamma, start);
  return evaluate_noisy(policies, params, horizon, gamma, start);
}

BestResult enumerate_best(const DomainParams& params, int horizon, double gamma,
                          const OrgState& start) {
  const int n = params.n_agents;
  if (n > 4) throw std::invalid_argument("enumeration refused beyond 4 agents");
  BestResult best;
  best.team_value = -std::numeric_limits<double>::infinity();

  auto consider = [&](const std::vector<SymbolPolicy>& joint) {
    const EvalResult ev = evaluate_joint(joint, params, horizon, gamma, start);
    if (ev.team > best.team_value) {
      best.team_value = ev.team;
      best.policies = joint;
    }
  };

  if (n == 2) {
    for (int i = 0; i < kNumSymbolPolicies; ++i) {
      for (int j = 0; j < kNumSymbolPolicies; ++j) {
        consider({symbol_policy_from_index(i), symbol_policy_from_index(j)});
      }
    }
  } else {
    // Symmetric seed, then best-response sweeps on team value to a fixed point.
    for (int i = 0; i < kNumSymbolPolicies; ++i)
      consider(std::vector<SymbolPolicy>(static_cast<std::size_t>(n),
                                         symbol_policy_from_index(i)));
    bool improved = true;
    int rounds = 0;
    while (improved && rounds < 20) {
      improved = false;
      ++rounds;
      for (int agent = 0; agent < n; ++agent) {
        std::vector<SymbolPolicy> joint = best.policies;
        for (int i = 0; i < kNumSymbolPolicies; ++i) {
          joint[static_cast<std::size_t>(agent)] = symbol_policy_from_index(i);
          const EvalResult ev = evaluate_joint(joint, params, horizon, gamma, start);
          if (ev.team > best.team_value) {
            best.team_value = ev.team;
            best.policies = joint;
            improved = true;
          }
        }
      }
    }
  }

  // Individual incentive to deviate, measured on each agent's own value.
  best.deviation_gain.assign(static_cast<std::size_t>(n), 0.0);
  const EvalResult at_best = evaluate_joint(best.policies, params, horizon, gamma, start);
  for (int agent = 0; agent < n; ++agent) {
    double top = at_best.per_agent[static_cast<std::size_t>(agent)];
    std::vector<SymbolPolicy> joint = best.policies;
    for (int i = 0; i < kNumSymbolPolicies; ++i) {
      joint[static_cast<std::size_t>(agent)] = symbol_policy_from_index(i);
      const EvalResult ev = evaluate_joint(joint, params, horizon, gamma, start);
      top = std::max(top, ev.per_agent[static_cast<std::size_t>(agent)]);
    }
    best.deviation_gain[static_cast<std::size_t>(agent)] =
        top - at_best.per_agent[static_cast<std::size_t>(agent)];
  }
  return best;
}

Certification certify(const std::vector<SymbolPolicy>& policies,
                      const DomainParams& params, int horizon, double gamma,
                      const OrgState& start) {
  const BestResult best = enumerate_best(params, horizon, gamma, start);
  const EvalResult ev = evaluate_joint(policies, params, horizon, gamma, start);
  Certification cert;
  cert.policy_value = ev.team;
  cert.best_value = best.team_value;
  cert.gap = (best.team_value - ev.team) / std::abs(best.team_value);
  cert.optimal = cert.gap <= kCertifyGapThreshold;
  return cert;
}

Certification certify(const std::vector<WindowPolicy>& greedy,
                      const DomainParams& params, int horizon, double gamma,
                      const OrgState& start) {
  std::vector<SymbolPolicy> coarse;
  coarse.reserve(greedy.size());
  for (const WindowPolicy& p : greedy) coarse.push_back(coarsen(p));
  return certify(coarse, params, horizon, gamma, start);
}

}  // namespace orgmarl
