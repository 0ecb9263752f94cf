#include "ehpc/objective.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ehpc {
namespace {

using ld = long double;

inline ld log2_1p(ld x) { return std::log1p(x) / std::numbers::ln2_v<ld>; }

void require_admissible(const SystemParams& params,
                        const AllocationSequence& xi) {
  ld sum = 0.0L;
  for (std::size_t i = 0; i < xi.values.size(); ++i) {
    if (!(xi.values[i] >= 0.0)) {
      throw std::invalid_argument("inadmissible sequence: entry " +
                                  std::to_string(i + 1) + " is negative");
    }
    sum += xi.values[i];
  }
  if (sum > params.battery_capacity * (1.0L + 1e-12L)) {
    throw std::invalid_argument("inadmissible sequence: total exceeds the "
                                "battery capacity");
  }
}

// Shared first sum: arrivals visible from the cycle start, uniform B/k split.
ld head_sum(const SystemParams& params) {
  const ld p = params.p, q = 1.0L - p, g = params.gamma;
  const ld B = params.battery_capacity;
  ld weight = p * p;  // p^2 q^(k-1)
  ld s = 0.0L;
  for (int k = 1; k <= params.window; ++k) {
    s += weight * (0.5L * k) * log2_1p(g * B / k);
    weight *= q;
  }
  return s;
}

}  // namespace

double eval_T_N(const SystemParams& params, const AllocationSequence& xi) {
  require_admissible(params, xi);
  const ld p = params.p, q = 1.0L - p, g = params.gamma;
  const ld B = params.battery_capacity;
  const int w = params.window;
  const std::size_t n = xi.values.size();

  ld s = head_sum(params);
  ld consumed = 0.0L;
  ld weight = p * std::pow(q, static_cast<ld>(w));  // p q^(j+w-1) at j=1
  for (std::size_t j = 0; j < n; ++j) {
    const ld x = xi.values[j];
    consumed += x;
    s += weight * 0.5L * log2_1p(g * x);
    s += weight * p * (0.5L * w) * log2_1p(g * (B - consumed) / w);
    weight *= q;
  }
  // Uniform phase of cycles outlasting the whole prefix; exact geometric tail.
  s += weight * (0.5L * w) * log2_1p(g * (B - consumed) / w);
  return static_cast<double>(s);
}

double eval_T_infinity(const SystemParams& params, const AllocationSequence& xi,
                       double tail_tol) {
  if (!(tail_tol > 0.0)) {
    throw std::invalid_argument("tail_tol must be positive");
  }
  // Zero continuation past the prefix: the middle sum vanishes there and the
  // third sum's argument freezes at the residual, so the tail is the exact
  // geometric series already folded into the closed form.
  return eval_T_N(params, xi);
}

double offline_bound(const SystemParams& params, double tail_tol) {
  if (!(tail_tol > 0.0)) {
    throw std::invalid_argument("tail_tol must be positive");
  }
  const ld p = params.p, q = 1.0L - p, g = params.gamma;
  const ld B = params.battery_capacity;
  ld s = 0.0L;
  ld qk = 1.0L;  // q^(k-1)
  for (int k = 1;; ++k) {
    s += p * p * qk * (0.5L * k) * log2_1p(g * B / k);
    qk *= q;
    // Remaining mass: sum_{j>k} p^2 q^(j-1) (j/2) log2(1+gB/j)
    //   <= q^k (k p + 1) * 0.5 * log2(1+gB/(k+1)).
    const ld tail = qk * (k * p + 1.0L) * 0.5L * log2_1p(g * B / (k + 1));
    if (tail < static_cast<ld>(tail_tol)) break;
  }
  return static_cast<double>(s);
}

double epsilon_N(const SystemParams& params, int N) {
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  const ld q = 1.0L - static_cast<ld>(params.p);
  const ld g = params.gamma, B = params.battery_capacity;
  const int w = params.window;
  const ld bracket =
      log2_1p(g * B) + params.p * w * log2_1p(g * B / w);
  return static_cast<double>(
      0.5L * std::pow(q, static_cast<ld>(w + N)) * bracket);
}

KktResidualReport kkt_residuals(const SystemParams& params,
                                const AllocationSequence& xi) {
  require_admissible(params, xi);
  const std::size_t n = xi.values.size();
  if (n == 0) throw std::invalid_argument("empty sequence");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(xi.values[j] > 0.0)) {
      throw std::domain_error("non-interior candidate: xi_" +
                              std::to_string(j + 1) + " is not positive");
    }
  }
  const ld p = params.p, q = 1.0L - p, g = params.gamma;
  const ld B = params.battery_capacity;
  const int w = params.window;

  // Marginal value of the uniform phase after k prefix slots, weighted.
  std::vector<ld> phase(n);  // p^2 q^(k+w-1) (g/2) / (1 + g (B - C_k)/w)
  ld consumed = 0.0L;
  ld weight = p * p * std::pow(q, static_cast<ld>(w));  // p^2 q^(k+w-1), k=1
  for (std::size_t k = 0; k < n; ++k) {
    consumed += xi.values[k];
    phase[k] = weight * (0.5L * g) / (1.0L + g * (B - consumed) / w);
    weight *= q;
  }
  const ld terminal =  // p q^(w+N-1) (g/2) / (1 + g (B - C_N)/w)
      p * std::pow(q, static_cast<ld>(w + static_cast<int>(n) - 1)) *
      (0.5L * g) / (1.0L + g * (B - consumed) / w);

  KktResidualReport report;
  report.stationarity.resize(n);
  report.complementary_slackness_mu.assign(n, 0.0);
  report.energy_slack = 0.0;

  ld suffix = 0.0L;  // sum_{k=j..N-1} phase[k], built backwards
  std::vector<ld> rows(n);
  for (std::size_t j = n; j-- > 0;) {
    if (j + 1 < n) suffix += phase[j];
    const ld lead = p * std::pow(q, static_cast<ld>(w + static_cast<int>(j))) *
                    (0.5L * g) / (1.0L + g * xi.values[j]);
    rows[j] = lead - suffix - terminal;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    report.stationarity[j] = static_cast<double>(rows[j]);
    worst = std::max(worst, std::abs(report.stationarity[j]));
  }
  report.max_abs_residual = worst;
  return report;
}

double kkt_gradient_scale(const SystemParams& params) {
  const ld p = params.p, q = 1.0L - p, g = params.gamma;
  const ld B = params.battery_capacity;
  const int w = params.window;
  const ld ratio = (g * B / w) / (1.0L + g * B / w);
  return static_cast<double>(p * std::pow(q, static_cast<ld>(w)) * (0.5L * g) *
                             ratio);
}

}  // namespace ehpc
