#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ehpc/core.hpp"

namespace ehpc {

/// Runtime state of the look-ahead policy. `window` holds the arrival
/// indicators of the next w slots (index t-1 <-> distance t), sliding one
/// slot per step. The cursor marks the first window position not yet known
/// to be empty, so drought steps only examine the newly revealed slot while
/// a fresh cycle rescans the full window.
struct PolicyState {
  double battery = 0.0;
  int distance = 0;    // slots until the targeted arrival; 0 = none targeted
  int xi_index = 1;    // next index into the allocation sequence, 1-based
  int scan_cursor = 1; // first unscanned window position, 1-based
  std::vector<std::uint8_t> window;
};

/// Initial state: full scan pending, xi index at 1. `initial_window` must
/// hold exactly w entries (the arrivals of slots 2..w+1, zero-padded past the
/// trace end).
PolicyState make_policy_state(const SystemParams& params,
                              double initial_battery,
                              std::span<const std::uint8_t> initial_window);

/// Distance of the earliest arrival in a full window view: min{t : view[t-1]}
/// or 0 when the view is empty of arrivals. The view must have exactly
/// `window` entries.
int lookahead_distance(std::span<const std::uint8_t> window_view, int window);

/// The action the policy takes in the current state: battery/distance when an
/// arrival is targeted, otherwise the next stored allocation value. Once the
/// stored prefix is exhausted during a long drought, the policy drains
/// geometrically at the prefix's terminal spend ratio, which keeps actions
/// positive and decreasing. Never exceeds the battery level.
double policy_action(const PolicyState& state, const AllocationSequence& xi);

struct PolicyStepResult {
  PolicyState state;
  double action = 0.0;
  double reward = 0.0;
  int distance_used = 0;  // the distance in force when the action was taken
};

/// One slot of the policy: scan (if untargeted), act, collect the reward,
/// apply the battery dynamics with `arrival_now` (the arrival of the next
/// slot, which is also the front of the current window), then slide the
/// window, admitting `incoming_window_slot` at distance w.
PolicyStepResult policy_step(PolicyState state, const SystemParams& params,
                             const AllocationSequence& xi,
                             bool incoming_window_slot, bool arrival_now);

}  // namespace ehpc
