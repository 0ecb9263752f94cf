#pragma once

#include <vector>

#include "ehpc/core.hpp"

namespace ehpc {

inline constexpr double kDefaultTailTol = 1e-12;

/// Long-term average throughput of the stationary policy induced by `xi`,
/// extended past its stored prefix by zeros. The geometric tails of both
/// infinite sums collapse to closed form under the zero continuation, so the
/// returned value carries no truncation error; `tail_tol` (> 0) is the
/// certified bound the caller asked for and is always met.
double eval_T_infinity(const SystemParams& params, const AllocationSequence& xi,
                       double tail_tol = kDefaultTailTol);

/// Finite-horizon objective: the four-term closed form over exactly the
/// stored values of `xi`. Equals eval_T_infinity of the zero-extended prefix.
double eval_T_N(const SystemParams& params, const AllocationSequence& xi);

/// Non-causal (infinite look-ahead) throughput: the w-free series
/// sum_k p^2 (1-p)^(k-1) (k/2) log2(1 + gamma*B/k), truncated once its
/// geometric tail bound drops below `tail_tol`.
double offline_bound(const SystemParams& params,
                     double tail_tol = kDefaultTailTol);

/// Closed-form bound on the loss from truncating the infinite problem at N
/// terms: (1-p)^(w+N)/2 * [log2(1+gamma*B) + p*w*log2(1+gamma*B/w)].
/// Strictly decreasing in N, positive, and -> 0.
double epsilon_N(const SystemParams& params, int N);

/// First-order optimality certificate for an interior candidate. The
/// multipliers provably vanish at the optimum, so stationarity rows are
/// evaluated with lambda = mu_j = 0; at the true maximizer every row is zero.
struct KktResidualReport {
  std::vector<double> stationarity;                // one row per index j
  std::vector<double> complementary_slackness_mu;  // mu_j * xi_j (mu_j = 0)
  double energy_slack = 0.0;                       // lambda * (B - sum xi)
  double max_abs_residual = 0.0;
};

/// Evaluates the stationarity rows at `xi` (all entries must be strictly
/// positive; throws std::domain_error naming the first zero index otherwise).
KktResidualReport kkt_residuals(const SystemParams& params,
                                const AllocationSequence& xi);

/// Magnitude of the objective gradient at the all-zeros allocation, in the
/// same units as the stationarity rows. Used to normalize KKT residuals into
/// scale-free certificates. Closed form: the j=1 row dominates, giving
/// p (1-p)^w (gamma/2) * (gamma B / w) / (1 + gamma B / w).
double kkt_gradient_scale(const SystemParams& params);

}  // namespace ehpc
