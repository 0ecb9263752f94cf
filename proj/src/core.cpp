#include "ehpc/core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ehpc {

SystemParams validate_params(double p, double gamma, double battery_capacity,
                             int window) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("arrival probability p must lie in the open "
                                "interval (0,1), got " + std::to_string(p));
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("channel gain gamma must be positive, got " +
                                std::to_string(gamma));
  }
  if (!(battery_capacity > 0.0)) {
    throw std::invalid_argument("battery capacity must be positive, got " +
                                std::to_string(battery_capacity));
  }
  if (window < 1) {
    throw std::invalid_argument("look-ahead window must be at least 1, got " +
                                std::to_string(window));
  }
  return SystemParams{p, gamma, battery_capacity, window};
}

double reward(double action, double gamma) {
  if (!(action >= 0.0)) {
    throw std::domain_error("action must be nonnegative, got " +
                            std::to_string(action));
  }
  return 0.5 * std::log1p(gamma * action) / std::numbers::ln2;
}

double battery_update(double level, double action, double arrival,
                      double capacity) {
  if (!(action >= 0.0)) {
    throw std::domain_error("action must be nonnegative");
  }
  if (action > level) {
    throw std::domain_error("energy causality violated: action " +
                            std::to_string(action) + " exceeds battery level " +
                            std::to_string(level));
  }
  if (arrival != 0.0 && arrival != capacity) {
    throw std::domain_error("arrival must be 0 or the battery capacity");
  }
  return std::min(level - action + arrival, capacity);
}

AllocationSequence make_allocation(std::vector<double> values,
                                   double battery_capacity) {
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) {
      throw std::invalid_argument("allocation entry " + std::to_string(i + 1) +
                                  " is negative");
    }
    sum += values[i];
  }
  // Tiny relative slack so sequences summing to exactly B survive rounding.
  if (sum > battery_capacity * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "allocation is inadmissible: total " + std::to_string(sum) +
        " exceeds battery capacity " + std::to_string(battery_capacity));
  }
  AllocationSequence xi;
  xi.values = std::move(values);
  xi.residual = std::max(0.0, battery_capacity - sum);
  return xi;
}

}  // namespace ehpc
