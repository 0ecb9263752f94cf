#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ehpc/core.hpp"
#include "ehpc/objective.hpp"

namespace ehpc {

/// Seeded i.i.d. Bernoulli(p) arrival indicators for `slots` slots.
/// Deterministic: the same (seed, slots, p) reproduces the trace bit-exactly
/// on any platform (mt19937_64 thresholding 53-bit uniforms).
ArrivalTrace generate_arrivals(const SystemParams& params, std::size_t slots,
                               std::uint64_t seed);

/// One record per simulated slot, for the optional trace dump.
struct SlotRecord {
  std::size_t slot = 0;   // 1-based
  bool arrival = false;   // battery recharged at the start of this slot
  int distance = 0;       // look-ahead distance in force for the action
  double action = 0.0;
  double battery = 0.0;   // level at the end of the slot
  double reward = 0.0;
};

struct ThroughputReport {
  double simulated_mean = 0.0;  // (1/T) sum of per-slot rewards
  double std_error = 0.0;       // regenerative (cycle batch-means) estimate
  std::size_t slots = 0;
  double analytic = 0.0;        // eval_T_infinity of the simulated sequence
  double z_score = 0.0;         // (simulated_mean - analytic) / std_error
  std::size_t cycle_count = 0;  // complete recharge-to-recharge cycles
  double mean_cycle_length = 0.0;
  double initial_battery = 0.0;
  std::uint64_t seed = 0;
  const char* generator = kGeneratorName;
};

/// Runs the look-ahead policy driven by `xi` over a seeded trace. Per-slot
/// rewards are averaged over all T slots; the head segment before the first
/// recharge and the final partial cycle are excluded from cycle statistics.
/// The standard error comes from the regenerative estimator over complete
/// cycles (cycles are i.i.d.), falling back to the per-slot estimate when
/// fewer than two cycles completed. A zero-variance run reports the smallest
/// positive double so the error bar stays usable in ratios.
/// Pass `slot_log` to collect the per-slot dump.
ThroughputReport simulate(const SystemParams& params,
                          const AllocationSequence& xi, std::size_t slots,
                          std::uint64_t seed, double initial_battery,
                          double analytic_tail_tol = kDefaultTailTol,
                          std::vector<SlotRecord>* slot_log = nullptr);

/// Convenience overload starting from a full battery.
ThroughputReport simulate(const SystemParams& params,
                          const AllocationSequence& xi, std::size_t slots,
                          std::uint64_t seed);

/// Multi-seed aggregation: independent replications pooled by averaging.
struct AggregateReport {
  std::vector<ThroughputReport> runs;
  double pooled_mean = 0.0;
  double pooled_std_error = 0.0;
  double analytic = 0.0;
  double pooled_z = 0.0;
};

/// Runs one replication per seed (at least two) and pools them.
AggregateReport compare(const SystemParams& params,
                        const AllocationSequence& xi, std::size_t slots,
                        std::span<const std::uint64_t> seeds);

}  // namespace ehpc
