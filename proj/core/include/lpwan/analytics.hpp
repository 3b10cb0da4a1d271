#ifndef LPWAN_ANALYTICS_HPP
#define LPWAN_ANALYTICS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace lpwan::analytics {

/// Parameters of the slotted-service queueing model: packets are scheduled
/// at `schedule_rate_hz` (exponential interarrival times) and a batch of up
/// to `slots` frames leaves the queue once per multisuperframe.
struct ModelParams {
  double schedule_rate_hz = 0.0;
  double msf_duration_s = 3.84;
  int slots = 1;

  /// Mean packets scheduled per multisuperframe.
  double utilization() const { return schedule_rate_hz * msf_duration_s; }
  bool stable() const { return utilization() / slots < 1.0; }

  static ModelParams from_utilization(double rho, int slots, double msf_duration_s = 3.84) {
    return ModelParams{rho / msf_duration_s, msf_duration_s, slots};
  }
};

struct Pmf {
  std::vector<double> p;

  int truncation_bound() const { return static_cast<int>(p.size()) - 1; }
  double sum() const;
  double at(int i) const { return i >= 0 && i < static_cast<int>(p.size()) ? p[i] : 0.0; }
};

/// Row-stochastic transition matrix over queue states 0..states-1, with
/// overflow mass lumped into the last state.
struct TransitionMatrix {
  int states = 0;
  int slots = 1;
  double rho = 0.0;
  std::vector<double> m;  // row-major states x states

  double at(int i, int j) const { return m[static_cast<std::size_t>(i) * states + j]; }
  double& at(int i, int j) { return m[static_cast<std::size_t>(i) * states + j]; }
  double row_sum(int i) const;
};

/// Delay distribution in multiples of the multisuperframe duration;
/// f[0] = 0 by the empty-sum convention.
struct DelayCdf {
  std::vector<double> f;

  double at(int n) const {
    if (n < 0) return 0.0;
    if (n >= static_cast<int>(f.size())) return f.empty() ? 0.0 : f.back();
    return f[n];
  }
};

/// e^-rho rho^k / k! by stable multiplicative recurrence; exact-shape
/// Poisson form, no factorials, safe up to k = 10000 and beyond.
double poisson_pmf(int k, double rho);

/// P(A <= k) for A ~ Poisson(rho).
double poisson_cdf(int k, double rho);

/// Probability of j arrivals between the last service instant and a
/// uniformly random time: (1/rho) * regularized lower incomplete gamma of
/// (j+1, rho), computed as the Poisson upper tail over rho.
double residual_arrival_pmf(int j, double rho);

/// Queue-state transition matrix with q_max+1 states.
TransitionMatrix transition_matrix(const ModelParams& params, int q_max);

enum class StationarySolver { DirectSolve, PowerIteration };

/// Stationary distribution of the chain. Requires utilization()/slots < 1;
/// rebuilds with doubled q_max until the truncated tail mass drops below
/// 1e-10 (capped), and verifies the fixed-point residual < 1e-10.
Pmf stationary_distribution(const TransitionMatrix& P,
                            StationarySolver solver = StationarySolver::DirectSolve);

/// Queue length seen at a uniformly random time: convolution of the
/// boundary distribution with the residual arrivals.
Pmf queue_length_distribution(const Pmf& pi, double rho);

/// F(n) = P(L <= slots*n - 1); F(0) = 0.
DelayCdf delay_cdf(const Pmf& queue_at_random_time, const ModelParams& params);

/// Full pipeline with automatic truncation.
DelayCdf analytic_delay_cdf(const ModelParams& params,
                            StationarySolver solver = StationarySolver::DirectSolve);

struct McOracleResult {
  Pmf boundary_queue;        // post-service queue length at msf boundaries
  Pmf queue_at_random_time;  // time-weighted queue length over the run
  DelayCdf delay;            // per-packet wait, quantized as ceil(wait/T)
};

/// Brute-force oracle: simulates Poisson arrivals into a FIFO queue served
/// `slots`-at-a-time at multisuperframe boundaries. Deterministic per seed.
McOracleResult mc_oracle(const ModelParams& params, std::int64_t num_arrivals,
                         std::uint64_t seed);

struct SweepRow {
  double utilization_pct;
  int slots;
  int n_msf;
  double cdf;
  bool stable;
};

/// Table of delay CDFs for the cross product of utilizations (in percent)
/// and slot counts. Unstable combinations yield a single warning row.
std::vector<SweepRow> sweep(std::span<const double> utilizations_pct,
                            std::span<const int> slot_counts, double msf_duration_s);

double sup_norm_distance(const DelayCdf& a, const DelayCdf& b);

}  // namespace lpwan::analytics

#endif
