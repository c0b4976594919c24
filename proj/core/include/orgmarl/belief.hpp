#pragma once

#include <array>
#include <utility>
#include <vector>

#include "orgmarl/models.hpp"

namespace orgmarl {

inline constexpr double kBeliefFloor = 1e-6;

// Weight vector over the five-model set plus the shared public history the model
// tables are indexed by. The o_r axis of the belief tensor is tracked as a
// one-decimal grid cell; weights are identical across cells when histories are
// shared, so only the index is kept.
struct ModelBelief {
  std::array<double, kNumModels> weights{};
  ObsWindow window;
  int o_r_cell = 0;
  int reset_events = 0;   // times an all-zero posterior forced a uniform reset
};

struct PredictedAction {
  std::array<double, kNumActions> distribution{};
  Action sample = Action::Balance;
};

ModelBelief make_uniform_belief(PublicSymbol initial);

// One-decimal quantization of o_r, clamped to [-bound, bound].
int o_r_grid_cell(double o_r, double bound);

// Mixture of model-table actions at the current window; sample drawn from it.
PredictedAction predict(const ModelBelief& belief, Rng& rng);
Action predict_argmax(const ModelBelief& belief);

// Bayes reweighting by the private-observation likelihood W(omega | a_m):
// 1-eta for the matching symbol, eta/2 otherwise. Applies the epsilon floor.
ModelBelief correct(const ModelBelief& belief, PrivateSymbol omega, double eta);

// Weight-preserving transport: shift the shared window by the new public symbol.
ModelBelief advance(const ModelBelief& belief, PublicSymbol next, double o_r, double bound);

// Fraction of steps where the sampled prediction matched the true action.
double prediction_accuracy(const std::vector<std::pair<Action, Action>>& log);

}  // namespace orgmarl
