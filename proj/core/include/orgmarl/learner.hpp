#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orgmarl/belief.hpp"
#include "orgmarl/net.hpp"
#include "orgmarl/oracle.hpp"

namespace orgmarl {

enum class AgentKind { IA2CPlus, IAC, IA2CMinus };
const char* to_string(AgentKind k);
AgentKind agent_kind_from_string(const std::string& s);

// one-hot previous o_f, one-hot current o_f, normalized o_r readout
inline constexpr int kFeatureDim = 7;
using Features = std::array<double, kFeatureDim>;

// o_r is scaled by (1-phi)/R_maxstep and clipped to [-1,1]; IA2C- zeroes it.
Features encode_features(ObsWindow window, double o_r, double max_step_reward,
                         double phi, bool zero_o_r);

struct TransitionSample {
  Features x{}, x_next{};
  int a_i = 0, a_i_next = 0;
  int a_j_hat = -1, a_j_hat_next = -1;  // absent (-1) for IAC
  double reward = 0.0;                  // scaled per-agent total incl. bonus
  // True only for genuine termination. Episodes here end by horizon
  // truncation, so run_episode bootstraps through the final step instead of
  // marking it done; a terminal target at recurring features would otherwise
  // conflict with the bootstrapped ones and leave an irreducible residual.
  bool done = false;
};

struct LearnerConfig {
  AgentKind kind = AgentKind::IA2CPlus;
  int hidden = 32;
  double lr_actor = 2e-3;
  double lr_critic = 5e-3;
  bool argmax_prediction = false;  // sample by default
};

class Learner {
 public:
  Learner(const LearnerConfig& cfg, const DomainParams& params, int agent_index,
          Rng& rng);

  AgentKind kind() const { return cfg_.kind; }
  int agent_index() const { return agent_index_; }
  bool uses_belief() const { return cfg_.kind != AgentKind::IAC; }
  int critic_outputs() const { return uses_belief() ? 9 : 3; }

  void begin_episode(PublicSymbol initial);
  Features features() const;
  Action sample_action(Rng& rng);
  // Predicted opponent actions from the current (pre-step) beliefs; for n > 2
  // the critic index uses the majority category of the predictions.
  std::vector<Action> predict_opponents(Rng& rng);
  // Belief correction with this step's private observations, then advance by
  // the shared public symbol and o_r readout.
  void observe(const std::vector<PrivateSymbol>& private_obs, PublicSymbol next,
               double o_r);

  // Deterministic greedy policy; each window evaluated at its running-mean o_r.
  WindowPolicy greedy_policy() const;
  std::string greedy_fingerprint() const;

  double policy_entropy() const;  // at current features

  DenseNet& actor() { return actor_; }
  DenseNet& critic() { return critic_; }
  const DenseNet& actor() const { return actor_; }
  const DenseNet& critic() const { return critic_; }
  AdamState& actor_opt() { return opt_actor_; }
  AdamState& critic_opt() { return opt_critic_; }
  const std::vector<ModelBelief>& beliefs() const { return beliefs_; }
  int belief_resets() const;

  const LearnerConfig& config() const { return cfg_; }

 private:
  LearnerConfig cfg_;
  int agent_index_ = 0;
  int n_agents_ = 2;
  double max_step_reward_ = 1.0;
  double phi_ = 0.0;
  double reward_bound_ = 1.0;
  double eta_private_cache_ = 0.0;
  DenseNet actor_, critic_;
  AdamState opt_actor_, opt_critic_;
  std::vector<ModelBelief> beliefs_;  // one per opponent; weights persist
  ObsWindow window_;
  double o_r_ = 0.0;
  // Running mean of the o_r feature per window, for greedy extraction.
  std::array<double, kNumWindows> o_r_sum_{};
  std::array<long, kNumWindows> o_r_count_{};
};

// Joint critic index for (own action, predicted opponent category).
int critic_index(AgentKind kind, int a_i, int a_j_hat);

std::vector<double> advantages(const std::vector<TransitionSample>& batch,
                               const DenseNet& critic, double gamma, AgentKind kind);

// One adaptive-moment step on mean squared advantage; targets are constants.
// Returns the pre-step loss.
double critic_update(const std::vector<TransitionSample>& batch, DenseNet& critic,
                     AdamState& opt, double gamma, AgentKind kind);

// One ascent step on avg[log pi(a_i|x) A] + entropy_coeff * H(pi).
void actor_update(const std::vector<TransitionSample>& batch, DenseNet& actor,
                  AdamState& opt, const std::vector<double>& adv,
                  double entropy_coeff);

struct EpisodeResult {
  std::vector<std::vector<TransitionSample>> samples;  // per agent
  std::vector<double> returns;                         // raw undiscounted
  std::vector<double> prediction_accuracy;             // per agent; NaN for IAC
  std::vector<std::vector<std::pair<Action, Action>>> prediction_log;  // (sample, truth)
};

EpisodeResult run_episode(Environment& env, std::vector<Learner>& learners,
                          int horizon, Rng& rng);

struct TrainConfig {
  DomainParams domain;
  std::vector<AgentKind> kinds;  // one per seat
  int episodes = 20000;
  int horizon = 20;
  int batch_episodes = 8;
  int updates_per_batch = 1;
  int hidden = 32;
  double lr_actor = 2e-3;
  double lr_critic = 5e-3;
  double entropy_coeff = 0.01;   // decayed linearly to 0 over the budget
  uint64_t seed = 1;
  // Convergence: critic loss below threshold and stable greedy policies for
  // this many consecutive episodes.
  double converge_loss = 1e-2;
  int converge_window = 500;
  bool stop_on_convergence = false;
};

struct EpisodeRecord {
  int episode = 0;
  std::vector<double> returns;
  std::vector<double> critic_loss;
  std::vector<double> entropy;
  std::vector<double> pred_accuracy;
  std::vector<std::string> greedy;
};

struct TrainResult {
  std::vector<EpisodeRecord> records;
  std::vector<WindowPolicy> greedy_policies;
  bool diverged = false;
  bool converged = false;
  int episodes_run = 0;
  int episodes_to_convergence = -1;
  double late_prediction_accuracy = 0.0;  // mean over the final 1000 episodes
};

using CheckpointFn = std::function<void(int episode, const std::vector<Learner>&)>;

TrainResult train(const TrainConfig& cfg, const CheckpointFn& checkpoint = nullptr);

}  // namespace orgmarl
