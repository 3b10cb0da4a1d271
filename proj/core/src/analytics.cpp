#include "lpwan/analytics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lpwan/rng.hpp"

namespace lpwan::analytics {

namespace {

constexpr double kTailTolerance = 1e-10;
constexpr double kResidualTolerance = 1e-10;
constexpr int kMaxStates = 1 << 12;

void validate_params(const ModelParams& p) {
  if (p.schedule_rate_hz < 0) throw std::invalid_argument("schedule rate must be >= 0");
  if (p.msf_duration_s <= 0) throw std::invalid_argument("msf duration must be > 0");
  if (p.slots < 1) throw std::invalid_argument("slot count must be >= 1");
}

/// pmf[k] for k = 0..kmax via the multiplicative recurrence.
std::vector<double> poisson_pmf_vector(double rho, int kmax) {
  std::vector<double> pmf(static_cast<std::size_t>(kmax) + 1, 0.0);
  pmf[0] = std::exp(-rho);
  for (int k = 1; k <= kmax; ++k) pmf[k] = pmf[k - 1] * rho / k;
  return pmf;
}

TransitionMatrix build_matrix(double rho, int slots, int q_max) {
  if (q_max < slots) throw std::invalid_argument("q_max must be >= slot count");
  TransitionMatrix P;
  P.states = q_max + 1;
  P.slots = slots;
  P.rho = rho;
  P.m.assign(static_cast<std::size_t>(P.states) * P.states, 0.0);

  const std::vector<double> pmf = poisson_pmf_vector(rho, q_max + slots);
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());

  for (int i = 0; i <= q_max; ++i) {
    double partial = 0.0;
    if (i <= slots) {
      P.at(i, 0) = cdf[slots - i];  // queue empties: i + A <= slots
      partial += P.at(i, 0);
    }
    for (int j = 1; j < q_max; ++j) {
      const int arrivals = j - i + slots;
      if (arrivals >= 0) {
        P.at(i, j) = pmf[arrivals];
        partial += P.at(i, j);
      }
    }
    // Lump everything beyond the truncation bound into the last state so
    // rows stay exactly stochastic.
    P.at(i, q_max) = std::max(0.0, 1.0 - partial);
  }
  return P;
}

Pmf solve_direct(const TransitionMatrix& P) {
  const int n = P.states;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(j, i) = P.at(i, j);  // transpose
  A -= Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();  // replace one redundant balance equation with sum = 1
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd x = A.partialPivLu().solve(b);

  Pmf pi;
  pi.p.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = x(i);
    if (v < 0) {
      if (v < -1e-9) throw std::runtime_error("direct stationary solve produced negative mass");
      v = 0.0;
    }
    pi.p[i] = v;
    total += v;
  }
  for (double& v : pi.p) v /= total;
  return pi;
}

Pmf solve_power_iteration(const TransitionMatrix& P) {
  const int n = P.states;
  std::vector<double> pi(n, 1.0 / n), next(n, 0.0);
  double residual = 1.0;
  for (int iter = 0; iter < 200000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double w = pi[i];
      if (w == 0.0) continue;
      const double* row = &P.m[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) next[j] += w * row[j];
    }
    residual = 0.0;
    for (int j = 0; j < n; ++j) residual = std::max(residual, std::abs(next[j] - pi[j]));
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (int j = 0; j < n; ++j) pi[j] = next[j] / total;
    if (residual < kResidualTolerance / 10) return Pmf{std::move(pi)};
  }
  std::ostringstream msg;
  msg << "power iteration did not converge, residual " << residual;
  throw std::runtime_error(msg.str());
}

double fixed_point_residual(const Pmf& pi, const TransitionMatrix& P) {
  const int n = P.states;
  double res = 0.0;
  std::vector<double> next(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double w = pi.p[i];
    if (w == 0.0) continue;
    const double* row = &P.m[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < n; ++j) next[j] += w * row[j];
  }
  for (int j = 0; j < n; ++j) res = std::max(res, std::abs(next[j] - pi.p[j]));
  return res;
}

}  // namespace

double Pmf::sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }

double TransitionMatrix::row_sum(int i) const {
  const double* row = &m[static_cast<std::size_t>(i) * states];
  return std::accumulate(row, row + states, 0.0);
}

double poisson_pmf(int k, double rho) {
  if (k < 0) throw std::invalid_argument("poisson_pmf: k must be >= 0");
  if (rho < 0) throw std::invalid_argument("poisson_pmf: rho must be >= 0");
  if (rho == 0.0) return k == 0 ? 1.0 : 0.0;
  double p = std::exp(-rho);
  for (int i = 1; i <= k; ++i) {
    p *= rho / i;
    if (p == 0.0) return 0.0;  // underflowed far past the tail
  }
  return p;
}

double poisson_cdf(int k, double rho) {
  if (k < 0) return 0.0;
  if (rho < 0) throw std::invalid_argument("poisson_cdf: rho must be >= 0");
  if (rho == 0.0) return 1.0;
  double p = std::exp(-rho);
  double sum = p;
  for (int i = 1; i <= k; ++i) {
    p *= rho / i;
    sum += p;
  }
  return std::min(sum, 1.0);
}

double residual_arrival_pmf(int j, double rho) {
  if (j < 0) throw std::invalid_argument("residual_arrival_pmf: j must be >= 0");
  if (rho <= 0) throw std::domain_error("residual_arrival_pmf: rho must be > 0");
  // Upper Poisson tail P(A > j), summed upward from k = j+1 so no
  // cancellation against 1 occurs deep in the tail.
  double term = std::exp(-rho);
  for (int i = 1; i <= j + 1; ++i) term *= rho / i;
  double tail = 0.0;
  int k = j + 1;
  while (term > 0.0) {
    tail += term;
    ++k;
    term *= rho / k;
    if (term < tail * 1e-18) {
      tail += term;
      break;
    }
  }
  return tail / rho;
}

TransitionMatrix transition_matrix(const ModelParams& params, int q_max) {
  validate_params(params);
  return build_matrix(params.utilization(), params.slots, q_max);
}

Pmf stationary_distribution(const TransitionMatrix& P, StationarySolver solver) {
  if (P.rho / P.slots >= 1.0)
    throw std::domain_error("stationary distribution requires utilization per slot < 1");

  int q_max = P.states - 1;
  const TransitionMatrix* current = &P;
  TransitionMatrix rebuilt;
  for (;;) {
    Pmf pi = solver == StationarySolver::DirectSolve ? solve_direct(*current)
                                                     : solve_power_iteration(*current);
    if (pi.p.back() < kTailTolerance) {
      const double res = fixed_point_residual(pi, *current);
      if (res >= kResidualTolerance) {
        std::ostringstream msg;
        msg << "stationary solve residual " << res << " exceeds tolerance";
        throw std::runtime_error(msg.str());
      }
      return pi;
    }
    q_max *= 2;
    if (q_max + 1 > kMaxStates)
      throw std::runtime_error("stationary tail did not fit below the state cap");
    rebuilt = build_matrix(P.rho, P.slots, q_max);
    current = &rebuilt;
  }
}

Pmf queue_length_distribution(const Pmf& pi, double rho) {
  if (rho < 0) throw std::invalid_argument("queue_length_distribution: rho must be >= 0");
  if (rho == 0.0) return pi;  // residual collapses to a point mass at 0

  // Residual arrival weights until their mass is numerically exhausted.
  std::vector<double> residual;
  residual.reserve(64);
  double mass = 0.0;
  for (int j = 0; j < 100000; ++j) {
    const double r = residual_arrival_pmf(j, rho);
    residual.push_back(r);
    mass += r;
    if (1.0 - mass < 1e-14 && j > rho) break;
  }

  Pmf out;
  out.p.assign(pi.p.size() + residual.size() - 1, 0.0);
  for (std::size_t i = 0; i < pi.p.size(); ++i) {
    if (pi.p[i] == 0.0) continue;
    for (std::size_t j = 0; j < residual.size(); ++j) out.p[i + j] += pi.p[i] * residual[j];
  }
  return out;
}

DelayCdf delay_cdf(const Pmf& queue_at_random_time, const ModelParams& params) {
  validate_params(params);
  const int slots = params.slots;
  const int len = static_cast<int>(queue_at_random_time.p.size());
  DelayCdf cdf;
  cdf.f.push_back(0.0);
  double acc = 0.0;
  int j = 0;
  for (int n = 1; (n - 1) * slots < len + slots; ++n) {
    const int upto = slots * n - 1;
    while (j <= upto && j < len) acc += queue_at_random_time.p[j++];
    cdf.f.push_back(std::min(acc, 1.0));
    if (j >= len) break;
  }
  return cdf;
}

DelayCdf analytic_delay_cdf(const ModelParams& params, StationarySolver solver) {
  validate_params(params);
  if (!params.stable()) throw std::domain_error("analytic delay requires a stable system");
  const double rho = params.utilization();
  const int q0 = std::max(64, static_cast<int>(std::ceil(
                                   16.0 * params.slots / (1.0 - rho / params.slots))));
  const TransitionMatrix P = transition_matrix(params, q0);
  const Pmf pi = stationary_distribution(P, solver);
  const Pmf L = queue_length_distribution(pi, rho);
  return delay_cdf(L, params);
}

McOracleResult mc_oracle(const ModelParams& params, std::int64_t num_arrivals,
                         std::uint64_t seed) {
  validate_params(params);
  if (params.schedule_rate_hz <= 0)
    throw std::invalid_argument("mc_oracle: schedule rate must be > 0");
  if (!params.stable()) throw std::domain_error("mc_oracle requires a stable system");
  if (num_arrivals < 1) throw std::invalid_argument("mc_oracle: need at least one arrival");

  RngStream rng(seed, 0x6f7261636c65ULL);  // dedicated oracle stream
  const double T = params.msf_duration_s;
  const double mean_iat = 1.0 / params.schedule_rate_hz;
  const int slots = params.slots;

  std::deque<double> queue;  // arrival times of waiting packets
  std::vector<std::int64_t> delay_hist;
  std::vector<std::int64_t> boundary_hist;
  std::vector<double> occupancy;  // time spent at each queue length

  auto tally = [](auto& hist, std::size_t idx, auto value) {
    if (hist.size() <= idx) hist.resize(idx + 1, 0);
    hist[idx] += value;
  };

  // Generate all arrivals up front to know the measurement horizon.
  double t = 0.0;
  std::vector<double> arrivals;
  arrivals.reserve(static_cast<std::size_t>(num_arrivals));
  for (std::int64_t i = 0; i < num_arrivals; ++i) {
    t += -std::log1p(-rng.uniform01()) * mean_iat;
    arrivals.push_back(t);
  }
  const double t_end = arrivals.back();

  std::size_t next_arrival = 0;
  double cursor = 0.0;
  std::int64_t boundary = 1;
  std::int64_t boundaries_counted = 0;
  while (next_arrival < arrivals.size() || !queue.empty()) {
    const double b = boundary * T;
    const double next_t =
        next_arrival < arrivals.size() ? std::min(arrivals[next_arrival], b) : b;
    // time-weighted occupancy inside the measurement horizon
    if (cursor < t_end) {
      const double upto = std::min(next_t, t_end);
      if (upto > cursor) tally(occupancy, queue.size(), upto - cursor);
    }
    cursor = next_t;
    if (next_arrival < arrivals.size() && arrivals[next_arrival] <= b) {
      queue.push_back(arrivals[next_arrival]);
      ++next_arrival;
      continue;
    }
    // multisuperframe boundary: up to `slots` frames leave at once
    for (int s = 0; s < slots && !queue.empty(); ++s) {
      const double wait = b - queue.front();
      queue.pop_front();
      auto n = static_cast<std::int64_t>(std::ceil(wait / T - 1e-12));
      if (n < 1) n = 1;
      tally(delay_hist, static_cast<std::size_t>(n), std::int64_t{1});
    }
    if (b <= t_end) {
      tally(boundary_hist, queue.size(), std::int64_t{1});
      ++boundaries_counted;
    }
    ++boundary;
  }

  McOracleResult res;
  res.boundary_queue.p.resize(boundary_hist.size());
  for (std::size_t i = 0; i < boundary_hist.size(); ++i)
    res.boundary_queue.p[i] =
        static_cast<double>(boundary_hist[i]) / static_cast<double>(boundaries_counted);
  const double total_time = std::accumulate(occupancy.begin(), occupancy.end(), 0.0);
  res.queue_at_random_time.p.resize(occupancy.size());
  for (std::size_t i = 0; i < occupancy.size(); ++i)
    res.queue_at_random_time.p[i] = occupancy[i] / total_time;
  res.delay.f.assign(delay_hist.size(), 0.0);
  if (res.delay.f.empty()) res.delay.f.push_back(0.0);
  double acc = 0.0;
  for (std::size_t n = 1; n < delay_hist.size(); ++n) {
    acc += static_cast<double>(delay_hist[n]) / static_cast<double>(num_arrivals);
    res.delay.f[n] = acc;
  }
  return res;
}

std::vector<SweepRow> sweep(std::span<const double> utilizations_pct,
                            std::span<const int> slot_counts, double msf_duration_s) {
  std::vector<SweepRow> rows;
  for (const double pct : utilizations_pct) {
    for (const int slots : slot_counts) {
      const ModelParams params = ModelParams::from_utilization(pct / 100.0, slots, msf_duration_s);
      if (!params.stable()) {
        rows.push_back(SweepRow{pct, slots, -1, 0.0, false});
        continue;
      }
      const DelayCdf cdf = analytic_delay_cdf(params);
      for (std::size_t n = 0; n < cdf.f.size(); ++n) {
        rows.push_back(SweepRow{pct, slots, static_cast<int>(n), cdf.f[n], true});
        if (1.0 - cdf.f[n] < 1e-9 && n > 0) break;
      }
    }
  }
  return rows;
}

double sup_norm_distance(const DelayCdf& a, const DelayCdf& b) {
  const int len = static_cast<int>(std::max(a.f.size(), b.f.size()));
  double d = 0.0;
  for (int n = 0; n < len; ++n) d = std::max(d, std::abs(a.at(n) - b.at(n)));
  return d;
}

}  // namespace lpwan::analytics
