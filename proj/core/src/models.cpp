#include "orgmarl/models.hpp"

#include <ostream>
#include <stdexcept>

namespace orgmarl {

ObsWindow window_from_index(int idx) {
  if (idx < 0 || idx >= kNumWindows) throw std::invalid_argument("window index out of range");
  return ObsWindow{static_cast<PublicSymbol>(idx / kNumSymbols),
                   static_cast<PublicSymbol>(idx % kNumSymbols)};
}

namespace {

constexpr Action S = Action::Self;
constexpr Action B = Action::Balance;
constexpr Action G = Action::Group;

// Window order: (prev, current) with symbols meager(e), several(s), many(m):
//   0:(e,e) 1:(e,s) 2:(e,m) 3:(s,e) 4:(s,s) 5:(s,m) 6:(m,e) 7:(m,s) 8:(m,m)
// Windows (e,m) and (m,e) are not enumerated for models 3-4; they default to balance.
constexpr std::array<PolicyTable, kNumModels> kTables = {{
    {S, S, S, S, S, S, S, S, S},  // model 0: always self
    {B, B, B, B, B, B, B, B, B},  // model 1: always balance
    {G, G, G, G, G, G, G, G, G},  // model 2: always group
    {G, B, B, G, B, S, B, S, S},  // model 3: group on meager, balance on several, self on many
    {S, B, B, S, B, G, B, G, G},  // model 4: mirror of model 3 (self <-> group)
}};

}  // namespace

const PolicyTable& model_table(int id) {
  if (id < 0 || id >= kNumModels) throw std::invalid_argument("model id out of range");
  return kTables[static_cast<std::size_t>(id)];
}

Action model_action(int id, ObsWindow window) {
  return model_table(id)[static_cast<std::size_t>(window.index())];
}

OpponentModel make_opponent_model(int id, PublicSymbol initial) {
  model_table(id);  // range check
  return OpponentModel{id, ObsWindow{initial, initial}};
}

Action model_action(const OpponentModel& model) {
  return model_action(model.id, model.history);
}

OpponentModel advance_history(const OpponentModel& model, PublicSymbol next) {
  return OpponentModel{model.id, model.history.advanced(next)};
}

void dump_model_tables(std::ostream& os) {
  os << "window    ";
  for (int id = 0; id < kNumModels; ++id) os << " model" << id;
  os << '\n';
  for (int w = 0; w < kNumWindows; ++w) {
    const ObsWindow win = window_from_index(w);
    os << '(' << to_string(win.previous) << ',' << to_string(win.current) << ')';
    for (int id = 0; id < kNumModels; ++id)
      os << "  " << to_string(model_action(id, win));
    os << '\n';
  }
}

}  // namespace orgmarl
