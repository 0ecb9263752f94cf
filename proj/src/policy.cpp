#include "ehpc/policy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ehpc {

PolicyState make_policy_state(const SystemParams& params,
                              double initial_battery,
                              std::span<const std::uint8_t> initial_window) {
  if (!(initial_battery >= 0.0 &&
        initial_battery <= params.battery_capacity)) {
    throw std::invalid_argument("initial battery must lie in [0, capacity]");
  }
  if (initial_window.size() != static_cast<std::size_t>(params.window)) {
    throw std::invalid_argument("initial window view must have w entries");
  }
  PolicyState st;
  st.battery = initial_battery;
  st.window.assign(initial_window.begin(), initial_window.end());
  return st;
}

int lookahead_distance(std::span<const std::uint8_t> window_view, int window) {
  if (window_view.size() != static_cast<std::size_t>(window)) {
    throw std::invalid_argument("window view has " +
                                std::to_string(window_view.size()) +
                                " entries, expected " + std::to_string(window));
  }
  for (int t = 1; t <= window; ++t) {
    if (window_view[static_cast<std::size_t>(t - 1)]) return t;
  }
  return 0;
}

double policy_action(const PolicyState& state, const AllocationSequence& xi) {
  double a;
  if (state.distance != 0) {
    a = state.battery / state.distance;
  } else if (static_cast<std::size_t>(state.xi_index) <= xi.values.size()) {
    a = xi.values[static_cast<std::size_t>(state.xi_index - 1)];
  } else if (xi.values.empty() || xi.residual <= 0.0) {
    a = 0.0;
  } else {
    // Prefix exhausted: geometric drain at the terminal spend ratio.
    a = state.battery * (xi.values.back() / xi.residual);
  }
  return std::min(a, state.battery);
}

PolicyStepResult policy_step(PolicyState state, const SystemParams& params,
                             const AllocationSequence& xi,
                             bool incoming_window_slot, bool arrival_now) {
  const int w = params.window;
  if (state.window.size() != static_cast<std::size_t>(w)) {
    throw std::invalid_argument("policy state window does not match w");
  }

  if (state.distance == 0) {
    for (int t = state.scan_cursor; t <= w; ++t) {
      if (state.window[static_cast<std::size_t>(t - 1)]) {
        state.distance = t;
        state.xi_index = 1;
        state.scan_cursor = 1;
        break;
      }
    }
    if (state.distance == 0) state.scan_cursor = w;
  }

  const int distance_used = state.distance;
  const double action = policy_action(state, xi);
  if (state.distance != 0) {
    state.distance -= 1;
  } else {
    state.xi_index += 1;
  }

  const double r = reward(action, params.gamma);
  state.battery =
      battery_update(state.battery, action,
                     arrival_now ? params.battery_capacity : 0.0,
                     params.battery_capacity);

  std::rotate(state.window.begin(), state.window.begin() + 1,
              state.window.end());
  state.window.back() = incoming_window_slot ? 1 : 0;

  return PolicyStepResult{std::move(state), action, r, distance_used};
}

}  // namespace ehpc
