#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ehpc {

/// Model parameters: Bernoulli(p) full-battery energy arrivals, AWGN channel
/// gain gamma, battery capacity B, and look-ahead window of w future slots.
struct SystemParams {
  double p;                 // arrival probability per slot, 0 < p < 1
  double gamma;             // channel SNR scale, > 0
  double battery_capacity;  // B, energy units, > 0
  int window;               // w, slots, >= 1
};

/// Checks all parameter invariants and returns the validated tuple.
/// Throws std::invalid_argument naming the offending field.
SystemParams validate_params(double p, double gamma, double battery_capacity,
                             int window);

/// Instantaneous rate of an action: 0.5 * log2(1 + gamma * action).
/// Strictly increasing and strictly concave in `action`.
/// Throws std::domain_error for negative actions.
double reward(double action, double gamma);

/// One slot of battery dynamics: min(level - action + arrival, capacity).
/// `arrival` must be 0 or `capacity` (arrivals recharge the battery fully;
/// excess overflows). Throws std::domain_error on energy-causality violation
/// (action > level) or an arrival outside {0, capacity}.
double battery_update(double level, double action, double arrival,
                      double capacity);

/// A finite prefix of an allocation sequence xi_1..xi_N together with the
/// unallocated battery energy. Immutable value object once built.
struct AllocationSequence {
  std::vector<double> values;  // xi_j >= 0, sum <= battery capacity
  double residual = 0.0;       // battery capacity - sum(values), >= 0
};

/// Builds an admissible AllocationSequence, computing the residual.
/// Throws std::invalid_argument on negative entries or a sum exceeding the
/// battery capacity.
AllocationSequence make_allocation(std::vector<double> values,
                                   double battery_capacity);

/// A realized binary arrival sequence. Entry t-1 is the arrival indicator of
/// slot t (true = a full-battery packet arrives at the start of slot t).
/// Regenerating from (seed, length, p) reproduces the trace bit-exactly.
struct ArrivalTrace {
  std::vector<std::uint8_t> arrivals;
  std::uint64_t seed = 0;

  std::size_t length() const { return arrivals.size(); }
};

/// Name of the generator used for all stochastic draws, recorded in reports
/// so results stay reproducible across builds: std::mt19937_64 with arrivals
/// drawn by thresholding 53-bit uniforms against p.
inline constexpr const char* kGeneratorName = "mt19937_64/u53-threshold";

}  // namespace ehpc
