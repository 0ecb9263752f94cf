#include "ehpc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehpc/objective.hpp"

namespace ehpc {
namespace {

using ld = long double;

// Local shooting problem: the tail of the optimal sequence after consuming
// some prefix is itself the optimal sequence for the remaining budget, so
// every block solves this same shape.
struct Local {
  ld p, g, budget;
  int w;
};

enum class Cls { too_small, too_large };

// One recursion step; assumes 0 < xi and resid = budget - consumed (consumed
// includes xi). Returns nullopt-style flags through Cls in classify().
inline ld step_next(const Local& lp, ld xi, ld resid, bool& over, bool& under) {
  const ld rhs = 1.0L / (1.0L + lp.g * xi) - lp.p / (1.0L + lp.g * resid / lp.w);
  if (rhs <= 0.0L) {
    over = true;  // no positive continuation: the guess spent too fast
    return 0.0L;
  }
  const ld next = ((1.0L - lp.p) / rhs - 1.0L) / lp.g;
  if (next <= 0.0L) under = true;  // sequence died out with budget left
  return next;
}

// Classifies a first-element guess by rolling the recursion forward.
// horizon > 0: finite problem of that length, steered by the terminal
// identity when the roll completes. horizon == 0: infinite problem.
// The optimal trajectory keeps xi_j strictly below resid_j / w at every
// non-terminal step and guesses inherit the ordering of their trajectories,
// so each event below flips exactly once as the guess increases.
Cls classify(const Local& lp, ld guess, int horizon, int cap) {
  ld xi = guess;
  ld consumed = guess;
  for (int j = 1;; ++j) {
    const ld resid = lp.budget - consumed;
    if (horizon > 0 && j == horizon) {
      return (xi - resid / lp.w > 0.0L) ? Cls::too_large : Cls::too_small;
    }
    if (xi * lp.w >= resid) return Cls::too_large;
    if (j >= cap) return Cls::too_small;  // survived the cap: under-consuming
    bool over = false, under = false;
    const ld next = step_next(lp, xi, resid, over, under);
    if (over) return Cls::too_large;
    if (under) return Cls::too_small;
    xi = next;
    consumed += next;
  }
}

struct Shot {
  ld x1 = 0.0L;
  int iterations = 0;
  ld bracket = 0.0L;
};

// Bisection on the first element over (0, budget), run down to the floating
// point floor (the midpoint stops separating the bracket). The iteration cap
// only guards against NaN pathologies.
Shot shoot(const Local& lp, int horizon, int cap) {
  ld lo = 0.0L, hi = lp.budget;
  int it = 0;
  while (it < kBisectionIterationCap) {
    const ld mid = 0.5L * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    ++it;
    if (classify(lp, mid, horizon, cap) == Cls::too_large) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (!(hi - lo < lp.budget)) {
    throw std::runtime_error("shooting bisection failed to contract");
  }
  return Shot{0.5L * (lo + hi), it, hi - lo};
}

// Appends `count` trajectory values from first-element `x1` and returns the
// energy they consume. Stays well inside the numerically reliable range
// because callers keep count small relative to the error-growth horizon.
ld roll_values(const Local& lp, ld x1, int count, std::vector<ld>& out) {
  ld xi = x1;
  ld consumed = x1;
  out.push_back(xi);
  for (int j = 1; j < count; ++j) {
    bool over = false, under = false;
    const ld next = step_next(lp, xi, lp.budget - consumed, over, under);
    if (over || under) {
      throw std::runtime_error(
          "recursion left the feasible corridor while extracting the "
          "solution; tolerance too tight for this precision");
    }
    xi = next;
    consumed += next;
    out.push_back(xi);
  }
  return consumed;
}

// Error growth per recursion step is ~1/(1-p), so blocks shrink as p grows.
int block_limit(double p) {
  const double per_digit = -std::log10(1.0 - p);
  const int n = static_cast<int>(9.0 / std::max(per_digit, 1e-6));
  return std::clamp(n, 4, 24);
}

// Decay rate of the stable tail mode of the linearized recursion; governs
// how fast the unallocated budget shrinks along the optimal sequence.
double tail_decay_rate(const SystemParams& params) {
  const double q = 1.0 - params.p;
  const double t = 1.0 / q + 1.0 + params.p / (params.window * q);
  const double d = 1.0 / q;
  return 0.5 * (t - std::sqrt(t * t - 4.0 * d));
}

AllocationSequence to_allocation(const std::vector<ld>& vals,
                                 const SystemParams& params) {
  std::vector<double> v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    v[i] = static_cast<double>(vals[i]);
  }
  return make_allocation(std::move(v), params.battery_capacity);
}

}  // namespace

StepResult recursion_step(const SystemParams& params, double xi_j,
                          double consumed) {
  if (!(xi_j > 0.0)) {
    throw std::domain_error("xi_j must be positive");
  }
  if (consumed > params.battery_capacity) {
    throw std::domain_error("consumed energy exceeds the battery capacity");
  }
  const Local lp{params.p, params.gamma, params.battery_capacity,
                 params.window};
  bool over = false, under = false;
  const ld next = step_next(lp, xi_j, lp.budget - static_cast<ld>(consumed),
                            over, under);
  if (over) return {0.0, StepStatus::no_positive_solution};
  if (under) return {static_cast<double>(next), StepStatus::vanished};
  return {static_cast<double>(next), StepStatus::ok};
}

bool StructureReport::ok(Horizon horizon) const {
  bool core = all_positive && strictly_decreasing && window_bound_strict;
  if (horizon == Horizon::finite) {
    core = core && terminal_equality && residual_bound;
  }
  return core;
}

StructureReport verify_structure(const SystemParams& params,
                                 const AllocationSequence& xi, Horizon horizon,
                                 double terminal_tol) {
  StructureReport r;
  const std::size_t n = xi.values.size();
  if (n == 0) return r;
  const double B = params.battery_capacity;
  const int w = params.window;

  r.min_value = std::numeric_limits<double>::infinity();
  r.min_decrease = std::numeric_limits<double>::infinity();
  r.min_window_margin = std::numeric_limits<double>::infinity();
  long double consumed = 0.0L;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = xi.values[j];
    consumed += x;
    r.min_value = std::min(r.min_value, x);
    if (j + 1 < n) {
      r.min_decrease = std::min(r.min_decrease, x - xi.values[j + 1]);
      r.min_window_margin = std::min(
          r.min_window_margin, static_cast<double>((B - consumed) / w - x));
    }
  }
  r.residual = static_cast<double>(B - consumed);
  r.terminal_gap = xi.values[n - 1] - r.residual / w;

  r.all_positive = r.min_value > 0.0;
  r.strictly_decreasing = n < 2 || r.min_decrease > 0.0;
  const bool finite = horizon == Horizon::finite;
  // In the infinite case the strict bound is required at the last stored
  // index too; in the finite case that index carries the equality instead.
  const double last_margin = r.residual / w - xi.values[n - 1];
  r.window_bound_strict = (n < 2 || r.min_window_margin > 0.0) &&
                          (finite || last_margin > 0.0);
  if (!finite) {
    r.min_window_margin = std::min(r.min_window_margin, last_margin);
  }
  r.terminal_equality =
      !finite || std::abs(r.terminal_gap) <= terminal_tol * B;
  r.residual_bound =
      !finite || r.residual < w * B / static_cast<double>(n);
  return r;
}

double max_recursion_residual(const SystemParams& params,
                              const AllocationSequence& xi) {
  const ld p = params.p, g = params.gamma;
  const ld B = params.battery_capacity;
  const int w = params.window;
  ld worst = 0.0L;
  ld consumed = 0.0L;
  for (std::size_t j = 0; j + 1 < xi.values.size(); ++j) {
    consumed += xi.values[j];
    const ld lhs = (1.0L - p) / (1.0L + g * xi.values[j + 1]);
    const ld rhs =
        1.0L / (1.0L + g * xi.values[j]) - p / (1.0L + g * (B - consumed) / w);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return static_cast<double>(worst);
}

SolverReport solve_finite(const SystemParams& params, int N, double tol) {
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const int blk = block_limit(params.p);
  const int take_per_block = std::max(2, blk / 2);

  std::vector<ld> vals;
  vals.reserve(static_cast<std::size_t>(N));
  ld consumed_total = 0.0L;
  SolverReport rep;
  int remaining = N;
  while (remaining > 0) {
    const Local lp{params.p, params.gamma,
                   static_cast<ld>(params.battery_capacity) - consumed_total,
                   params.window};
    const int take = remaining <= blk ? remaining : take_per_block;
    const int cap = std::min(remaining, 96);
    const Shot shot = shoot(lp, remaining, cap);
    rep.bisection_iterations += shot.iterations;
    rep.bracket_width_final =
        std::max(rep.bracket_width_final, static_cast<double>(shot.bracket));
    consumed_total += roll_values(lp, shot.x1, take, vals);
    remaining -= take;
  }

  rep.xi = to_allocation(vals, params);
  rep.horizon = Horizon::finite;
  rep.N = N;
  rep.objective = eval_T_N(params, rep.xi);
  rep.max_kkt_residual = kkt_residuals(params, rep.xi).max_abs_residual;

  const auto structure = verify_structure(params, rep.xi, Horizon::finite, tol);
  if (!structure.ok(Horizon::finite)) {
    throw std::runtime_error(
        "finite solve produced a structurally invalid sequence (N=" +
        std::to_string(N) + ")");
  }
  return rep;
}

SolverReport solve_infinite(const SystemParams& params, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) {
    throw std::invalid_argument("tol must lie in (0, 1)");
  }
  const double B = params.battery_capacity;
  const ld target = static_cast<ld>(tol) * B;

  // Horizon guard tied to the problem's own convergence rates: the epsilon_N
  // objective bound and the geometric decay of the unallocated budget.
  int k_eps = 1;
  while (epsilon_N(params, k_eps) >= tol && k_eps < 100000) ++k_eps;
  const double rate = tail_decay_rate(params);
  const int k_res = static_cast<int>(
      std::ceil(std::log(tol) / std::log(std::min(rate, 1.0 - 1e-12))));
  const int k_max = 2 * std::max({k_eps, k_res, 16});

  const int blk = block_limit(params.p);
  const int take_per_block = std::max(2, blk / 2);

  std::vector<ld> vals;
  ld consumed_total = 0.0L;
  SolverReport rep;
  while (static_cast<ld>(B) - consumed_total >= target) {
    if (static_cast<int>(vals.size()) >= k_max) {
      throw std::runtime_error(
          "infinite solve did not reach the residual target within the "
          "horizon cap");
    }
    const Local lp{params.p, params.gamma,
                   static_cast<ld>(B) - consumed_total, params.window};
    const Shot shot = shoot(lp, 0, 96);
    rep.bisection_iterations += shot.iterations;
    rep.bracket_width_final =
        std::max(rep.bracket_width_final, static_cast<double>(shot.bracket));
    // Extract one value at a time so the run stops exactly when the residual
    // target is met.
    ld xi = shot.x1;
    ld consumed = xi;
    vals.push_back(xi);
    for (int j = 1; j < take_per_block; ++j) {
      if (lp.budget - consumed < target) break;
      bool over = false, under = false;
      const ld next = step_next(lp, xi, lp.budget - consumed, over, under);
      if (over || under) {
        throw std::runtime_error(
            "recursion left the feasible corridor while extracting the "
            "solution; tolerance too tight for this precision");
      }
      xi = next;
      consumed += next;
      vals.push_back(xi);
    }
    consumed_total += consumed;
  }

  rep.xi = to_allocation(vals, params);
  rep.horizon = Horizon::truncated_infinite;
  rep.N = static_cast<int>(vals.size());
  rep.truncation_index = rep.N;
  rep.objective = eval_T_infinity(params, rep.xi);
  rep.max_kkt_residual = max_recursion_residual(params, rep.xi);

  const auto structure =
      verify_structure(params, rep.xi, Horizon::truncated_infinite);
  if (!structure.ok(Horizon::truncated_infinite)) {
    throw std::runtime_error(
        "infinite solve produced a structurally invalid sequence");
  }
  return rep;
}

AllocationSequence brute_force_oracle(const SystemParams& params, int N,
                                      double tol) {
  if (N < 1 || N > 4) {
    throw std::invalid_argument("oracle supports 1 <= N <= 4");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const double B = params.battery_capacity;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const int nested_iters = 44;

  std::vector<double> xi(static_cast<std::size_t>(N), 0.0);
  auto objective = [&]() {
    return eval_T_N(params, make_allocation(xi, B));
  };

  // Golden-section maximization of a unimodal f over [a, b]; returns argmax.
  auto golden = [&](double a, double b, auto&& f, int iters) {
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iters; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = f(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = f(x1);
      }
    }
    return 0.5 * (a + b);
  };

  // Nested exact maximization: level j sweeps xi_j over what the prefix
  // leaves feasible; partial maximization of a strictly concave function
  // stays strictly concave, hence unimodal at every level.
  std::function<double(int, double)> maximize = [&](int level,
                                                    double used) -> double {
    if (level == N) return objective();
    const double room = B - used;
    const double best = golden(
        0.0, room,
        [&](double x) {
          xi[static_cast<std::size_t>(level)] = x;
          return maximize(level + 1, used + x);
        },
        nested_iters);
    xi[static_cast<std::size_t>(level)] = best;
    return maximize(level + 1, used + best);
  };
  maximize(0, 0.0);

  // Cyclic coordinate polish; the optimum is interior to the energy
  // constraint, so per-coordinate golden sections converge to it.
  double current = objective();
  const double stop = tol * std::max(1.0, std::abs(current));
  for (int pass = 0; pass < 300; ++pass) {
    for (int j = 0; j < N; ++j) {
      double others = 0.0;
      for (int i = 0; i < N; ++i) {
        if (i != j) others += xi[static_cast<std::size_t>(i)];
      }
      xi[static_cast<std::size_t>(j)] = golden(
          0.0, B - others,
          [&](double x) {
            xi[static_cast<std::size_t>(j)] = x;
            return objective();
          },
          60);
    }
    const double next = objective();
    if (next - current < stop) break;
    current = next;
  }
  return make_allocation(xi, B);
}

}  // namespace ehpc
