#include "ehpc/simulator.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ehpc/policy.hpp"

namespace ehpc {
namespace {

inline double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

ArrivalTrace generate_arrivals(const SystemParams& params, std::size_t slots,
                               std::uint64_t seed) {
  if (slots < 1) throw std::invalid_argument("slots must be at least 1");
  ArrivalTrace trace;
  trace.seed = seed;
  trace.arrivals.resize(slots);
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < slots; ++t) {
    trace.arrivals[t] = uniform53(rng) < params.p ? 1 : 0;
  }
  return trace;
}

ThroughputReport simulate(const SystemParams& params,
                          const AllocationSequence& xi, std::size_t slots,
                          std::uint64_t seed, double initial_battery,
                          double analytic_tail_tol,
                          std::vector<SlotRecord>* slot_log) {
  if (slots < 1) throw std::invalid_argument("slots must be at least 1");
  if (!(initial_battery >= 0.0 &&
        initial_battery <= params.battery_capacity)) {
    throw std::invalid_argument("initial battery must lie in [0, capacity]");
  }
  const ArrivalTrace trace = generate_arrivals(params, slots, seed);
  const int w = params.window;

  // Window of slot 1 covers arrivals of slots 2..w+1, zero-padded.
  std::vector<std::uint8_t> view(static_cast<std::size_t>(w), 0);
  for (int t = 0; t < w; ++t) {
    const std::size_t slot = 2 + static_cast<std::size_t>(t);  // 1-based
    if (slot <= slots) view[static_cast<std::size_t>(t)] =
        trace.arrivals[slot - 1];
  }
  PolicyState st = make_policy_state(params, initial_battery, view);
  if (slot_log) {
    slot_log->clear();
    slot_log->reserve(slots);
  }

  long double total_reward = 0.0L;
  long double total_reward_sq = 0.0L;
  // Cycle bookkeeping: a cycle runs from one recharge slot to the next.
  bool in_cycle = false;
  std::size_t cur_len = 0;
  long double cur_reward = 0.0L;
  std::vector<std::pair<std::size_t, double>> cycles;  // (length, reward)

  for (std::size_t tau = 1; tau <= slots; ++tau) {
    const bool arrival_next = tau < slots && trace.arrivals[tau];
    const bool incoming =
        tau + w < slots && trace.arrivals[tau + static_cast<std::size_t>(w)];
    auto out = policy_step(std::move(st), params, xi, incoming, arrival_next);
    st = std::move(out.state);
    total_reward += out.reward;
    total_reward_sq += static_cast<long double>(out.reward) * out.reward;
    if (slot_log) {
      slot_log->push_back(SlotRecord{tau, tau == 1 ? false
                                          : trace.arrivals[tau - 1] != 0,
                                     out.distance_used, out.action, st.battery,
                                     out.reward});
    }
    cur_len += 1;
    cur_reward += out.reward;
    if (arrival_next) {  // a recharge starts slot tau+1
      if (in_cycle) {
        cycles.emplace_back(cur_len, static_cast<double>(cur_reward));
      }
      in_cycle = true;
      cur_len = 0;
      cur_reward = 0.0L;
    }
  }

  ThroughputReport rep;
  rep.slots = slots;
  rep.seed = seed;
  rep.initial_battery = initial_battery;
  rep.simulated_mean = static_cast<double>(total_reward) / slots;
  rep.analytic = eval_T_infinity(params, xi, analytic_tail_tol);
  rep.cycle_count = cycles.size();

  if (cycles.size() >= 2) {
    const std::size_t n = cycles.size();
    long double sum_len = 0.0L, sum_rew = 0.0L;
    for (const auto& [len, rew] : cycles) {
      sum_len += len;
      sum_rew += rew;
    }
    const long double mean_len = sum_len / n;
    const long double rate = sum_rew / sum_len;
    long double ss = 0.0L;  // sum of squared centered cycle discrepancies
    for (const auto& [len, rew] : cycles) {
      const long double d = rew - rate * len;
      ss += d * d;
    }
    const long double var = ss / (n - 1);
    rep.mean_cycle_length = static_cast<double>(mean_len);
    rep.std_error =
        static_cast<double>(std::sqrt(var / n) / mean_len);
  } else {
    rep.mean_cycle_length = 0.0;
    if (slots > 1) {
      const long double m = total_reward / slots;
      const long double var =
          std::max(0.0L, (total_reward_sq - slots * m * m) / (slots - 1));
      rep.std_error = static_cast<double>(std::sqrt(var / slots));
    }
  }
  if (!(rep.std_error > 0.0)) {
    rep.std_error = std::numeric_limits<double>::min();
  }
  rep.z_score = (rep.simulated_mean - rep.analytic) / rep.std_error;
  return rep;
}

ThroughputReport simulate(const SystemParams& params,
                          const AllocationSequence& xi, std::size_t slots,
                          std::uint64_t seed) {
  return simulate(params, xi, slots, seed, params.battery_capacity);
}

AggregateReport compare(const SystemParams& params,
                        const AllocationSequence& xi, std::size_t slots,
                        std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) {
    throw std::invalid_argument("compare needs at least two seeds");
  }
  AggregateReport agg;
  agg.runs.reserve(seeds.size());
  long double mean = 0.0L, var = 0.0L;
  for (const std::uint64_t s : seeds) {
    agg.runs.push_back(
        simulate(params, xi, slots, s, params.battery_capacity));
    mean += agg.runs.back().simulated_mean;
    var += agg.runs.back().std_error * agg.runs.back().std_error;
  }
  const auto n = static_cast<long double>(seeds.size());
  agg.pooled_mean = static_cast<double>(mean / n);
  agg.pooled_std_error = static_cast<double>(std::sqrt(var) / n);
  agg.analytic = agg.runs.front().analytic;
  agg.pooled_z = (agg.pooled_mean - agg.analytic) / agg.pooled_std_error;
  return agg;
}

}  // namespace ehpc
