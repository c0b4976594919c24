#pragma once

#include <map>
#include <string>
#include <vector>

#include "orgmarl/learner.hpp"

namespace orgmarl {

inline constexpr const char* kVersionString = "orgmarl 0.1.0";

// Full experiment configuration. Serializes to plain-text key=value, one per
// line; parsing accepts '#' comments and blank lines. CLI flags override file
// values.
struct RunConfig {
  // Training explores from uniform random start levels (calibrated choice;
  // certification still evaluates from the configured start_level).
  DomainParams domain{.uniform_start = true};
  std::vector<AgentKind> kinds = {AgentKind::IA2CPlus, AgentKind::IA2CPlus};
  int episodes = 20000;
  int horizon = 20;
  int batch_episodes = 8;
  int updates_per_batch = 4;
  int hidden = 32;
  double lr_actor = 2e-3;
  double lr_critic = 5e-3;
  double entropy_coeff = 0.01;
  uint64_t seed = 1;
  int checkpoint_every = 5000;
  std::string out_dir = "runs";
  std::string name = "run";

  void validate() const;
  TrainConfig to_train_config() const;
};

std::string serialize(const RunConfig& cfg);
RunConfig parse_config(const std::map<std::string, std::string>& kv,
                       RunConfig base = RunConfig{});
std::map<std::string, std::string> read_key_value_file(const std::string& path);

}  // namespace orgmarl
