#include "orgmarl/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace orgmarl {

namespace {

std::string level_name(Level l) { return to_string(l); }

Level level_from_string(const std::string& s) {
  for (int i = 0; i < kNumLevels; ++i)
    if (s == to_string(static_cast<Level>(i))) return static_cast<Level>(i);
  throw std::invalid_argument("unknown level: " + s);
}

std::string kinds_to_string(const std::vector<AgentKind>& kinds) {
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += ',';
    out += to_string(kinds[i]);
  }
  return out;
}

std::vector<AgentKind> kinds_from_string(const std::string& s, int n_agents) {
  std::vector<AgentKind> kinds;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) kinds.push_back(agent_kind_from_string(item));
  if (kinds.size() == 1)
    kinds.assign(static_cast<std::size_t>(n_agents), kinds.front());
  return kinds;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << x;
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  domain.validate();
  if (episodes <= 0) throw std::invalid_argument("episodes must be > 0");
  if (horizon <= 0) throw std::invalid_argument("horizon must be > 0");
  if (batch_episodes <= 0) throw std::invalid_argument("batch must be > 0");
  if (updates_per_batch <= 0) throw std::invalid_argument("updates_per_batch must be > 0");
  if (hidden <= 0) throw std::invalid_argument("hidden must be > 0");
  if (lr_actor <= 0.0 || lr_critic <= 0.0)
    throw std::invalid_argument("learning rates must be > 0");
  if (entropy_coeff < 0.0) throw std::invalid_argument("entropy must be >= 0");
  if (static_cast<int>(kinds.size()) != domain.n_agents)
    throw std::invalid_argument("algo list must match agents");
}

TrainConfig RunConfig::to_train_config() const {
  TrainConfig tc;
  tc.domain = domain;
  tc.kinds = kinds;
  tc.episodes = episodes;
  tc.horizon = horizon;
  tc.batch_episodes = batch_episodes;
  tc.updates_per_batch = updates_per_batch;
  tc.hidden = hidden;
  tc.lr_actor = lr_actor;
  tc.lr_critic = lr_critic;
  tc.entropy_coeff = entropy_coeff;
  tc.seed = seed;
  return tc;
}

std::string serialize(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# " << kVersionString << "\n";
  os << "r=" << fmt(cfg.domain.r) << "\n";
  os << "beta=" << fmt(cfg.domain.beta) << "\n";
  os << "alpha=" << fmt(cfg.domain.alpha) << "\n";
  os << "c=" << fmt(cfg.domain.c) << "\n";
  os << "phi=" << fmt(cfg.domain.phi) << "\n";
  os << "penalty=" << fmt(cfg.domain.penalty) << "\n";
  os << "gamma=" << fmt(cfg.domain.gamma) << "\n";
  os << "agents=" << cfg.domain.n_agents << "\n";
  os << "private_noise=" << fmt(cfg.domain.eta_private) << "\n";
  os << "public_noise=" << fmt(cfg.domain.eta_public) << "\n";
  os << "start=" << (cfg.domain.uniform_start ? "uniform" : level_name(cfg.domain.start_level))
     << "\n";
  os << "algo=" << kinds_to_string(cfg.kinds) << "\n";
  os << "episodes=" << cfg.episodes << "\n";
  os << "horizon=" << cfg.horizon << "\n";
  os << "batch=" << cfg.batch_episodes << "\n";
  os << "updates_per_batch=" << cfg.updates_per_batch << "\n";
  os << "hidden=" << cfg.hidden << "\n";
  os << "lr_actor=" << fmt(cfg.lr_actor) << "\n";
  os << "lr_critic=" << fmt(cfg.lr_critic) << "\n";
  os << "entropy=" << fmt(cfg.entropy_coeff) << "\n";
  os << "seed=" << cfg.seed << "\n";
  os << "checkpoint_every=" << cfg.checkpoint_every << "\n";
  os << "out=" << cfg.out_dir << "\n";
  os << "name=" << cfg.name << "\n";
  return os.str();
}

RunConfig parse_config(const std::map<std::string, std::string>& kv, RunConfig base) {
  RunConfig cfg = std::move(base);
  std::string algo_value;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "r") cfg.domain.r = std::stod(value);
      else if (key == "beta") cfg.domain.beta = std::stod(value);
      else if (key == "alpha") cfg.domain.alpha = std::stod(value);
      else if (key == "c") cfg.domain.c = std::stod(value);
      else if (key == "phi") cfg.domain.phi = std::stod(value);
      else if (key == "penalty") cfg.domain.penalty = std::stod(value);
      else if (key == "gamma") cfg.domain.gamma = std::stod(value);
      else if (key == "agents") cfg.domain.n_agents = std::stoi(value);
      else if (key == "private_noise") cfg.domain.eta_private = std::stod(value);
      else if (key == "public_noise") cfg.domain.eta_public = std::stod(value);
      else if (key == "start") {
        if (value == "uniform") {
          cfg.domain.uniform_start = true;
        } else {
          cfg.domain.uniform_start = false;
          cfg.domain.start_level = level_from_string(value);
        }
      }
      else if (key == "algo") algo_value = value;
      else if (key == "episodes") cfg.episodes = std::stoi(value);
      else if (key == "horizon") cfg.horizon = std::stoi(value);
      else if (key == "batch") cfg.batch_episodes = std::stoi(value);
      else if (key == "updates_per_batch") cfg.updates_per_batch = std::stoi(value);
      else if (key == "hidden") cfg.hidden = std::stoi(value);
      else if (key == "lr_actor") cfg.lr_actor = std::stod(value);
      else if (key == "lr_critic") cfg.lr_critic = std::stod(value);
      else if (key == "entropy") cfg.entropy_coeff = std::stod(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "checkpoint_every") cfg.checkpoint_every = std::stoi(value);
      else if (key == "out") cfg.out_dir = value;
      else if (key == "name") cfg.name = value;
      else throw std::invalid_argument("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad value for config key '" + key + "': " + value);
    }
  }
  if (!algo_value.empty()) {
    cfg.kinds = kinds_from_string(algo_value, cfg.domain.n_agents);
  } else if (static_cast<int>(cfg.kinds.size()) != cfg.domain.n_agents &&
             !cfg.kinds.empty()) {
    cfg.kinds.assign(static_cast<std::size_t>(cfg.domain.n_agents), cfg.kinds.front());
  }
  return cfg;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

}  // namespace orgmarl
