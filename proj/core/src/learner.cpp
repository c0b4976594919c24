#include "orgmarl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace orgmarl {

const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::IA2CPlus: return "ia2c+";
    case AgentKind::IAC: return "iac";
    case AgentKind::IA2CMinus: return "ia2c-";
  }
  return "?";
}

AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "ia2c+" || s == "ia2cplus") return AgentKind::IA2CPlus;
  if (s == "iac") return AgentKind::IAC;
  if (s == "ia2c-" || s == "ia2cminus") return AgentKind::IA2CMinus;
  throw std::invalid_argument("unknown agent kind: " + s);
}

Features encode_features(ObsWindow window, double o_r, double max_step_reward,
                         double phi, bool zero_o_r) {
  Features x{};
  x[static_cast<std::size_t>(window.previous)] = 1.0;
  x[3 + static_cast<std::size_t>(window.current)] = 1.0;
  if (!zero_o_r) {
    const double scaled = o_r * (1.0 - phi) / max_step_reward;
    x[6] = std::clamp(scaled, -1.0, 1.0);
  }
  return x;
}

Learner::Learner(const LearnerConfig& cfg, const DomainParams& params,
                 int agent_index, Rng& rng)
    : cfg_(cfg),
      agent_index_(agent_index),
      n_agents_(params.n_agents),
      max_step_reward_(params.max_step_reward()),
      phi_(params.phi),
      reward_bound_(params.reward_bound()),
      eta_private_cache_(params.eta_private) {
  actor_ = DenseNet::init(kFeatureDim, cfg.hidden, kNumActions, rng);
  critic_ = DenseNet::init(kFeatureDim, cfg.hidden, critic_outputs(), rng);
  opt_actor_ = AdamState::make(actor_, cfg.lr_actor);
  opt_critic_ = AdamState::make(critic_, cfg.lr_critic);
  if (uses_belief()) {
    beliefs_.assign(static_cast<std::size_t>(n_agents_ - 1),
                    make_uniform_belief(level_symbol(params.start_level)));
  }
}

void Learner::begin_episode(PublicSymbol initial) {
  window_ = ObsWindow{initial, initial};
  o_r_ = 0.0;
  // Belief weights persist across episodes; the shared window restarts.
  for (ModelBelief& b : beliefs_) b.window = window_;
}

Features Learner::features() const {
  return encode_features(window_, o_r_, max_step_reward_, phi_,
                         cfg_.kind == AgentKind::IA2CMinus);
}

Action Learner::sample_action(Rng& rng) {
  const Features x = features();
  const ForwardCache fc = forward(actor_, {x.begin(), x.end()});
  const std::vector<double> p = softmax(fc.z);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  int pick = kNumActions - 1;
  for (int a = 0; a < kNumActions; ++a) {
    u -= p[static_cast<std::size_t>(a)];
    if (u < 0.0) { pick = a; break; }
  }
  return static_cast<Action>(pick);
}

std::vector<Action> Learner::predict_opponents(Rng& rng) {
  std::vector<Action> out;
  out.reserve(beliefs_.size());
  for (ModelBelief& b : beliefs_) {
    out.push_back(cfg_.argmax_prediction ? predict_argmax(b) : predict(b, rng).sample);
  }
  return out;
}

void Learner::observe(const std::vector<PrivateSymbol>& private_obs, PublicSymbol next,
                      double o_r) {
  if (uses_belief()) {
    if (private_obs.size() != beliefs_.size())
      throw std::invalid_argument("private observation count mismatch");
    for (std::size_t k = 0; k < beliefs_.size(); ++k) {
      beliefs_[k] = correct(beliefs_[k], private_obs[k], /*eta=*/eta_private_cache_);
      beliefs_[k] = advance(beliefs_[k], next, o_r, reward_bound_);
    }
  }
  window_ = window_.advanced(next);
  o_r_ = o_r;
  const int w = window_.index();
  const Features x = features();
  o_r_sum_[static_cast<std::size_t>(w)] += x[6];
  o_r_count_[static_cast<std::size_t>(w)] += 1;
}

WindowPolicy Learner::greedy_policy() const {
  WindowPolicy p;
  for (int w = 0; w < kNumWindows; ++w) {
    const ObsWindow win = window_from_index(w);
    const double mean_feat = o_r_count_[static_cast<std::size_t>(w)] > 0
        ? o_r_sum_[static_cast<std::size_t>(w)] /
              static_cast<double>(o_r_count_[static_cast<std::size_t>(w)])
        : 0.0;
    Features x{};
    x[static_cast<std::size_t>(win.previous)] = 1.0;
    x[3 + static_cast<std::size_t>(win.current)] = 1.0;
    x[6] = (cfg_.kind == AgentKind::IA2CMinus) ? 0.0 : mean_feat;
    const ForwardCache fc = forward(actor_, {x.begin(), x.end()});
    const std::vector<double> probs = softmax(fc.z);
    int best = 0;
    for (int a = 1; a < kNumActions; ++a)
      if (probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(best)])
        best = a;
    p.by_window[static_cast<std::size_t>(w)] = static_cast<Action>(best);
  }
  return p;
}

std::string Learner::greedy_fingerprint() const {
  const WindowPolicy p = greedy_policy();
  std::string s;
  for (Action a : p.by_window) s += action_char(a);
  return s;
}

double Learner::policy_entropy() const {
  const Features x = features();
  const ForwardCache fc = forward(actor_, {x.begin(), x.end()});
  const std::vector<double> p = softmax(fc.z);
  double h = 0.0;
  for (double pi : p) h -= pi * std::log(pi);
  return h;
}

int Learner::belief_resets() const {
  int n = 0;
  for (const ModelBelief& b : beliefs_) n += b.reset_events;
  return n;
}

int critic_index(AgentKind kind, int a_i, int a_j_hat) {
  if (kind == AgentKind::IAC) return a_i;
  return a_i * kNumActions + a_j_hat;
}

std::vector<double> advantages(const std::vector<TransitionSample>& batch,
                               const DenseNet& critic, double gamma, AgentKind kind) {
  std::vector<double> adv(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TransitionSample& s = batch[i];
    const ForwardCache fc = forward(critic, {s.x.begin(), s.x.end()});
    const double q = fc.z[static_cast<std::size_t>(critic_index(kind, s.a_i, s.a_j_hat))];
    double target = s.reward;
    if (!s.done) {
      const ForwardCache fn = forward(critic, {s.x_next.begin(), s.x_next.end()});
      target += gamma * fn.z[static_cast<std::size_t>(
                            critic_index(kind, s.a_i_next, s.a_j_hat_next))];
    }
    adv[i] = target - q;
  }
  return adv;
}

double critic_update(const std::vector<TransitionSample>& batch, DenseNet& critic,
                     AdamState& opt, double gamma, AgentKind kind) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const std::vector<double> adv = advantages(batch, critic, gamma, kind);
  double loss = 0.0;
  Gradients total = Gradients::zeros_like(critic);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TransitionSample& s = batch[i];
    loss += adv[i] * adv[i] * inv_n;
    const ForwardCache fc = forward(critic, {s.x.begin(), s.x.end()});
    std::vector<double> upstream(static_cast<std::size_t>(critic.out), 0.0);
    // d/dq of (target - q)^2 with the target held constant.
    upstream[static_cast<std::size_t>(critic_index(kind, s.a_i, s.a_j_hat))] =
        -2.0 * adv[i] * inv_n;
    total.accumulate(backward(critic, fc, upstream));
  }
  if (!std::isfinite(loss)) throw std::runtime_error("non-finite critic loss");
  adam_step(critic, total, opt);
  return loss;
}

void actor_update(const std::vector<TransitionSample>& batch, DenseNet& actor,
                  AdamState& opt, const std::vector<double>& adv,
                  double entropy_coeff) {
  if (batch.size() != adv.size()) throw std::invalid_argument("batch/advantage mismatch");
  Gradients total = Gradients::zeros_like(actor);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TransitionSample& s = batch[i];
    const ForwardCache fc = forward(actor, {s.x.begin(), s.x.end()});
    const std::vector<double> p = softmax(fc.z);
    double entropy = 0.0;
    for (double pk : p) entropy -= pk * std::log(pk);
    std::vector<double> upstream(static_cast<std::size_t>(actor.out));
    for (int k = 0; k < actor.out; ++k) {
      const double pk = p[static_cast<std::size_t>(k)];
      const double dlogp = (k == s.a_i ? 1.0 : 0.0) - pk;
      const double dentropy = -pk * (std::log(pk) + entropy);
      // Ascent on logp * A + entropy bonus, expressed as descent upstream.
      upstream[static_cast<std::size_t>(k)] =
          -(adv[i] * dlogp + entropy_coeff * dentropy) * inv_n;
    }
    total.accumulate(backward(actor, fc, upstream));
  }
  adam_step(actor, total, opt);
}

EpisodeResult run_episode(Environment& env, std::vector<Learner>& learners,
                          int horizon, Rng& rng) {
  const int n = static_cast<int>(learners.size());
  if (n != env.params().n_agents)
    throw std::invalid_argument("one learner per agent required");

  env.reset(rng);
  const PublicSymbol initial = env.initial_symbol(rng);
  for (Learner& l : learners) l.begin_episode(initial);

  struct StepTrace {
    std::vector<Features> x;
    std::vector<int> a;
    std::vector<int> a_j_hat;
    std::vector<double> reward;
  };
  std::vector<StepTrace> trace;
  trace.reserve(static_cast<std::size_t>(horizon));

  EpisodeResult result;
  result.returns.assign(static_cast<std::size_t>(n), 0.0);
  result.prediction_log.resize(static_cast<std::size_t>(n));

  const double scale = 1.0 / env.params().reward_bound();

  for (int t = 0; t < horizon; ++t) {
    StepTrace st;
    st.x.resize(static_cast<std::size_t>(n));
    st.a.resize(static_cast<std::size_t>(n));
    st.a_j_hat.assign(static_cast<std::size_t>(n), -1);
    st.reward.resize(static_cast<std::size_t>(n));

    std::vector<std::vector<Action>> predicted(static_cast<std::size_t>(n));
    std::vector<Action> actions(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Learner& l = learners[static_cast<std::size_t>(i)];
      st.x[static_cast<std::size_t>(i)] = l.features();
      if (l.uses_belief()) {
        predicted[static_cast<std::size_t>(i)] = l.predict_opponents(rng);
        st.a_j_hat[static_cast<std::size_t>(i)] = static_cast<int>(
            resolve_joint(predicted[static_cast<std::size_t>(i)]).category);
      }
      actions[static_cast<std::size_t>(i)] = l.sample_action(rng);
      st.a[static_cast<std::size_t>(i)] = static_cast<int>(actions[static_cast<std::size_t>(i)]);
    }

    const StepResult sr = env.step(actions, rng);

    for (int i = 0; i < n; ++i) {
      Learner& l = learners[static_cast<std::size_t>(i)];
      st.reward[static_cast<std::size_t>(i)] = sr.totals[static_cast<std::size_t>(i)] * scale;
      result.returns[static_cast<std::size_t>(i)] += sr.totals[static_cast<std::size_t>(i)];
      if (l.uses_belief()) {
        // Log predictions against the true actions before updating beliefs.
        int k = 0;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          result.prediction_log[static_cast<std::size_t>(i)].push_back(
              {predicted[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)],
               actions[static_cast<std::size_t>(j)]});
          ++k;
        }
      }
      l.observe(sr.private_obs[static_cast<std::size_t>(i)], sr.public_symbol, sr.o_r);
    }
    trace.push_back(std::move(st));
  }

  // The episode ends by horizon truncation, not by reaching a terminal state,
  // so the final step bootstraps through the post-episode state with a
  // hypothetical on-policy action (and prediction). These draws are not acted
  // on and are not logged against any ground truth.
  StepTrace tail;
  tail.x.resize(static_cast<std::size_t>(n));
  tail.a.resize(static_cast<std::size_t>(n));
  tail.a_j_hat.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    Learner& l = learners[static_cast<std::size_t>(i)];
    tail.x[static_cast<std::size_t>(i)] = l.features();
    if (l.uses_belief()) {
      tail.a_j_hat[static_cast<std::size_t>(i)] =
          static_cast<int>(resolve_joint(l.predict_opponents(rng)).category);
    }
    tail.a[static_cast<std::size_t>(i)] = static_cast<int>(l.sample_action(rng));
  }
  trace.push_back(std::move(tail));

  // Assemble SARSA-style samples; the bootstrap uses the next step's on-policy
  // action and post-advance prediction.
  result.samples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& out = result.samples[static_cast<std::size_t>(i)];
    out.reserve(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      TransitionSample s;
      s.x = trace[static_cast<std::size_t>(t)].x[static_cast<std::size_t>(i)];
      s.a_i = trace[static_cast<std::size_t>(t)].a[static_cast<std::size_t>(i)];
      s.a_j_hat = trace[static_cast<std::size_t>(t)].a_j_hat[static_cast<std::size_t>(i)];
      s.reward = trace[static_cast<std::size_t>(t)].reward[static_cast<std::size_t>(i)];
      s.x_next = trace[static_cast<std::size_t>(t + 1)].x[static_cast<std::size_t>(i)];
      s.a_i_next = trace[static_cast<std::size_t>(t + 1)].a[static_cast<std::size_t>(i)];
      s.a_j_hat_next =
          trace[static_cast<std::size_t>(t + 1)].a_j_hat[static_cast<std::size_t>(i)];
      out.push_back(s);
    }
  }

  result.prediction_accuracy.assign(static_cast<std::size_t>(n),
                                    std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < n; ++i) {
    const auto& log = result.prediction_log[static_cast<std::size_t>(i)];
    if (!log.empty())
      result.prediction_accuracy[static_cast<std::size_t>(i)] = prediction_accuracy(log);
  }
  return result;
}

TrainResult train(const TrainConfig& cfg, const CheckpointFn& checkpoint) {
  DomainParams params = cfg.domain;
  params.validate();
  if (static_cast<int>(cfg.kinds.size()) != params.n_agents)
    throw std::invalid_argument("one agent kind per seat required");

  Rng rng(cfg.seed);
  Environment env(params);
  std::vector<Learner> learners;
  learners.reserve(cfg.kinds.size());
  for (int i = 0; i < params.n_agents; ++i) {
    LearnerConfig lc;
    lc.kind = cfg.kinds[static_cast<std::size_t>(i)];
    lc.hidden = cfg.hidden;
    lc.lr_actor = cfg.lr_actor;
    lc.lr_critic = cfg.lr_critic;
    learners.emplace_back(lc, params, i, rng);
  }

  TrainResult result;
  std::vector<std::vector<TransitionSample>> batch(learners.size());
  std::vector<double> last_loss(learners.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> last_greedy(learners.size());
  int stable_episodes = 0;
  double pred_acc_sum = 0.0;
  long pred_acc_count = 0;
  std::vector<double> late_acc;  // per-episode mean accuracy, rolling last 1000
  const int late_window = 1000;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    EpisodeResult er = run_episode(env, learners, cfg.horizon, rng);

    EpisodeRecord rec;
    rec.episode = ep;
    rec.returns = er.returns;
    rec.pred_accuracy = er.prediction_accuracy;

    double ep_acc = 0.0;
    int ep_acc_n = 0;
    for (std::size_t i = 0; i < learners.size(); ++i) {
      batch[i].insert(batch[i].end(), er.samples[i].begin(), er.samples[i].end());
      if (!std::isnan(er.prediction_accuracy[i])) {
        ep_acc += er.prediction_accuracy[i];
        ++ep_acc_n;
      }
    }
    if (ep_acc_n > 0) {
      late_acc.push_back(ep_acc / ep_acc_n);
      if (static_cast<int>(late_acc.size()) > late_window)
        late_acc.erase(late_acc.begin());
    }

    const bool flush = ((ep + 1) % cfg.batch_episodes == 0) || (ep + 1 == cfg.episodes);
    if (flush && !batch[0].empty()) {
      const double progress = static_cast<double>(ep) / std::max(1, cfg.episodes - 1);
      // Entropy decays linearly over the whole budget: sustained exploration
      // is what keeps joint play out of the absorbing all-balance trap, which
      // no unilateral deviation can escape. Learning rates stay constant;
      // annealing the critic was tried and made mid-training advantages stale
      // enough to cascade runs into that trap.
      const double ent_coeff = cfg.entropy_coeff * (1.0 - progress);
      for (std::size_t i = 0; i < learners.size(); ++i) {
        Learner& l = learners[i];
        for (int u = 0; u < cfg.updates_per_batch; ++u) {
          const std::vector<double> adv =
              advantages(batch[i], l.critic(), params.gamma, l.kind());
          last_loss[i] = critic_update(batch[i], l.critic(), l.critic_opt(),
                                       params.gamma, l.kind());
          actor_update(batch[i], l.actor(), l.actor_opt(), adv, ent_coeff);
        }
        if (last_loss[i] > 1e6) {
          result.diverged = true;
        }
        batch[i].clear();
      }
    }

    for (std::size_t i = 0; i < learners.size(); ++i) {
      rec.critic_loss.push_back(last_loss[i]);
      rec.entropy.push_back(learners[i].policy_entropy());
      rec.greedy.push_back(learners[i].greedy_fingerprint());
    }
    result.records.push_back(rec);
    result.episodes_run = ep + 1;

    if (checkpoint) checkpoint(ep, learners);
    if (result.diverged) break;

    // Convergence bookkeeping: loss below threshold and greedy policies stable.
    bool loss_ok = true;
    for (std::size_t i = 0; i < learners.size(); ++i)
      if (!(last_loss[i] < cfg.converge_loss)) loss_ok = false;
    bool stable = loss_ok;
    for (std::size_t i = 0; i < learners.size() && stable; ++i) {
      if (!last_greedy[i].empty() && last_greedy[i] != rec.greedy[i]) stable = false;
    }
    for (std::size_t i = 0; i < learners.size(); ++i) last_greedy[i] = rec.greedy[i];
    stable_episodes = stable ? stable_episodes + 1 : 0;
    if (stable_episodes >= cfg.converge_window && !result.converged) {
      result.converged = true;
      result.episodes_to_convergence = ep + 1;
      if (cfg.stop_on_convergence) break;
    }
  }

  for (const Learner& l : learners) result.greedy_policies.push_back(l.greedy_policy());
  if (!late_acc.empty()) {
    for (double a : late_acc) pred_acc_sum += a;
    pred_acc_count = static_cast<long>(late_acc.size());
    result.late_prediction_accuracy = pred_acc_sum / static_cast<double>(pred_acc_count);
  }
  return result;
}

}  // namespace orgmarl
