#include "orgmarl/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace orgmarl {

namespace {

void normalize(std::array<double, kNumModels>& w) {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= sum;
}

}  // namespace

ModelBelief make_uniform_belief(PublicSymbol initial) {
  ModelBelief b;
  b.weights.fill(1.0 / kNumModels);
  b.window = ObsWindow{initial, initial};
  return b;
}

int o_r_grid_cell(double o_r, double bound) {
  const double clamped = std::clamp(o_r, -bound, bound);
  return static_cast<int>(std::lround(clamped * 10.0));
}

PredictedAction predict(const ModelBelief& belief, Rng& rng) {
  PredictedAction out;
  for (int m = 0; m < kNumModels; ++m) {
    const Action a = model_action(m, belief.window);
    out.distribution[static_cast<std::size_t>(a)] += belief.weights[static_cast<std::size_t>(m)];
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  int pick = kNumActions - 1;
  for (int a = 0; a < kNumActions; ++a) {
    u -= out.distribution[static_cast<std::size_t>(a)];
    if (u < 0.0) { pick = a; break; }
  }
  out.sample = static_cast<Action>(pick);
  return out;
}

Action predict_argmax(const ModelBelief& belief) {
  PredictedAction mix;
  for (int m = 0; m < kNumModels; ++m) {
    const Action a = model_action(m, belief.window);
    mix.distribution[static_cast<std::size_t>(a)] += belief.weights[static_cast<std::size_t>(m)];
  }
  int best = 0;
  for (int a = 1; a < kNumActions; ++a)
    if (mix.distribution[static_cast<std::size_t>(a)] >
        mix.distribution[static_cast<std::size_t>(best)])
      best = a;
  return static_cast<Action>(best);
}

ModelBelief correct(const ModelBelief& belief, PrivateSymbol omega, double eta) {
  ModelBelief out = belief;
  double sum = 0.0;
  for (int m = 0; m < kNumModels; ++m) {
    const Action a_m = model_action(m, belief.window);
    const double like = (a_m == omega) ? (1.0 - eta) : (eta / 2.0);
    out.weights[static_cast<std::size_t>(m)] *= like;
    sum += out.weights[static_cast<std::size_t>(m)];
  }
  if (sum <= 0.0) {
    // Possible only at eta == 0 when every surviving model mispredicted.
    out.weights.fill(1.0 / kNumModels);
    out.reset_events += 1;
    return out;
  }
  normalize(out.weights);
  // Raise starved weights to the floor; take the added mass from the largest
  // weight so the vector stays normalized and every entry stays >= the floor.
  double added = 0.0;
  std::size_t largest = 0;
  for (std::size_t m = 0; m < out.weights.size(); ++m) {
    if (out.weights[m] < kBeliefFloor) {
      added += kBeliefFloor - out.weights[m];
      out.weights[m] = kBeliefFloor;
    }
    if (out.weights[m] > out.weights[largest]) largest = m;
  }
  out.weights[largest] -= added;
  return out;
}

ModelBelief advance(const ModelBelief& belief, PublicSymbol next, double o_r, double bound) {
  ModelBelief out = belief;
  out.window = belief.window.advanced(next);
  out.o_r_cell = o_r_grid_cell(o_r, bound);
  return out;
}

double prediction_accuracy(const std::vector<std::pair<Action, Action>>& log) {
  if (log.empty()) throw std::invalid_argument("empty prediction log");
  std::size_t hits = 0;
  for (const auto& [sample, truth] : log)
    if (sample == truth) ++hits;
  return static_cast<double>(hits) / static_cast<double>(log.size());
}

}  // namespace orgmarl
