#pragma once

#include <string>

#include "ehpc/core.hpp"

namespace ehpc {

inline constexpr double kDefaultSolverTol = 1e-12;
inline constexpr int kBisectionIterationCap = 200;

enum class Horizon { finite, truncated_infinite };

/// Outcome of one step of the stationarity recursion
///   (1-p)/(1+g*xi_{j+1}) = 1/(1+g*xi_j) - p/(1 + (g/w)(B - consumed)).
enum class StepStatus {
  ok,
  no_positive_solution,  // right side <= 0: the trajectory over-consumed
  vanished,              // solved xi_{j+1} <= 0: the trajectory under-consumed
};

struct StepResult {
  double next = 0.0;  // xi_{j+1}, valid when status == ok
  StepStatus status = StepStatus::ok;
};

/// Closed-form inversion of the recursion for the next allocation.
/// `consumed` is the total spent through xi_j inclusive; it must not exceed
/// the battery capacity (throws std::domain_error) and xi_j must be positive.
StepResult recursion_step(const SystemParams& params, double xi_j,
                          double consumed);

/// Structural diagnostics for a candidate sequence (Theorem-level facts the
/// optimum must satisfy). Margins are signed: positive means the strict
/// property holds with that much room.
struct StructureReport {
  bool all_positive = false;
  bool strictly_decreasing = false;
  bool window_bound_strict = false;  // xi_j < (B - C_j)/w for j < N (all j if
                                     // the horizon is infinite)
  bool terminal_equality = false;    // xi_N == residual/w, finite case only
  bool residual_bound = false;       // residual < w*B/N, finite case only
  double min_value = 0.0;
  double min_decrease = 0.0;       // min_j (xi_j - xi_{j+1})
  double min_window_margin = 0.0;  // min_j ((B - C_j)/w - xi_j)
  double terminal_gap = 0.0;       // xi_N - residual/w
  double residual = 0.0;

  bool ok(Horizon horizon) const;
};

/// Evaluates the structural flags above. `terminal_tol` scales with the
/// battery capacity. Infinite-horizon prefixes skip the two finite-only
/// checks (their flags are reported true).
StructureReport verify_structure(const SystemParams& params,
                                 const AllocationSequence& xi, Horizon horizon,
                                 double terminal_tol = 1e-8);

struct SolverReport {
  AllocationSequence xi;
  Horizon horizon = Horizon::finite;
  int N = 0;  // sequence length (the truncation index in the infinite case)
  double objective = 0.0;
  int bisection_iterations = 0;
  double bracket_width_final = 0.0;
  // Optimality certificate: max |stationarity row| for the finite problem,
  // max pairwise recursion defect for the truncated infinite one.
  double max_kkt_residual = 0.0;
  int truncation_index = 0;  // 0 for finite solves
  std::string generator = kGeneratorName;
};

/// Maximizer of the N-dimensional problem via bisection on xi_1: each guess
/// is rolled forward through the recursion and classified by where the
/// trajectory leaves the feasible corridor (monotone in the guess), with the
/// terminal identity xi_N = residual/w steering the bracket when the roll
/// completes. Long horizons are solved in blocks, re-anchoring on the
/// self-similar subproblem with the remaining battery.
SolverReport solve_finite(const SystemParams& params, int N,
                          double tol = kDefaultSolverTol);

/// The infinite-horizon optimal sequence, truncated once the unallocated
/// battery drops below tol * B. Same shooting scheme with the
/// under-consumption events replacing the terminal comparison.
SolverReport solve_infinite(const SystemParams& params,
                            double tol = kDefaultSolverTol);

/// Search-based maximizer of eval_T_N over the simplex for N <= 4: nested
/// golden-section over nested feasible intervals, then cyclic coordinate
/// polish. Independent of the recursion path; used to validate it.
AllocationSequence brute_force_oracle(const SystemParams& params, int N,
                                      double tol = 1e-9);

/// Max defect of the recursion across all consecutive pairs of `xi`,
/// measured on the equation's own scale (the 1/(1+g*xi) terms).
double max_recursion_residual(const SystemParams& params,
                              const AllocationSequence& xi);

}  // namespace ehpc
