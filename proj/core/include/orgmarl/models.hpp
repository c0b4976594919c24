#pragma once

#include <array>
#include <iosfwd>

#include "orgmarl/domain.hpp"

namespace orgmarl {

inline constexpr int kNumModels = 5;
inline constexpr int kNumWindows = 9;

// Two-step public-observation window. At episode start previous == current.
struct ObsWindow {
  PublicSymbol previous = PublicSymbol::Several;
  PublicSymbol current = PublicSymbol::Several;

  int index() const {
    return static_cast<int>(previous) * kNumSymbols + static_cast<int>(current);
  }
  ObsWindow advanced(PublicSymbol next) const { return ObsWindow{current, next}; }
  bool operator==(const ObsWindow&) const = default;
};

ObsWindow window_from_index(int idx);

using PolicyTable = std::array<Action, kNumWindows>;

// The fixed policy table of model `id` (0..4). Total over all nine windows.
const PolicyTable& model_table(int id);
Action model_action(int id, ObsWindow window);

// A model instance carrying its own observation history.
struct OpponentModel {
  int id = 0;
  ObsWindow history;
};

OpponentModel make_opponent_model(int id, PublicSymbol initial);
Action model_action(const OpponentModel& model);
OpponentModel advance_history(const OpponentModel& model, PublicSymbol next);

// Human-readable dump of all five policy tables.
void dump_model_tables(std::ostream& os);

}  // namespace orgmarl
