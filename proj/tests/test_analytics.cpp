#include "doctest.h"

#include <cmath>

#include "lpwan/analytics.hpp"
#include "lpwan/rng.hpp"

using namespace lpwan::analytics;

TEST_CASE("poisson pmf closed-form anchors") {
  CHECK(poisson_pmf(0, 0.0) == 1.0);
  CHECK(poisson_pmf(3, 0.0) == 0.0);
  CHECK(poisson_pmf(0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS(poisson_pmf(-1, 1.0));
  CHECK_THROWS(poisson_pmf(1, -0.5));

  double sum = 0.0;
  for (int k = 0; k < 200; ++k) sum += poisson_pmf(k, 5.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // stable far out in the tail, no overflow
  CHECK(poisson_pmf(10000, 5.0) >= 0.0);
  CHECK(poisson_pmf(10000, 5.0) < 1e-300);
}

TEST_CASE("transition matrix anchors at rho 0 and 0.5") {
  const auto zero = transition_matrix(ModelParams::from_utilization(0.0, 1), 8);
  CHECK(zero.at(0, 0) == doctest::Approx(1.0));
  CHECK(zero.at(2, 1) == doctest::Approx(1.0));

  const auto half = transition_matrix(ModelParams::from_utilization(0.5, 1), 64);
  // P(A <= 1) = e^-0.5 * 1.5
  CHECK(half.at(0, 0) == doctest::Approx(std::exp(-0.5) * 1.5).epsilon(1e-12));
}

TEST_CASE("every transition row is stochastic") {
  lpwan::RngStream rng(17, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const double rho = rng.uniform01() * 3.0;
    const int slots = 1 + static_cast<int>(rng.uniform_int(3));
    const int q_max = slots + 4 + static_cast<int>(rng.uniform_int(120));
    const auto P = transition_matrix(ModelParams::from_utilization(rho, slots), q_max);
    for (int i = 0; i < P.states; ++i) {
      CHECK(P.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
      for (int j = 0; j < P.states; ++j) CHECK(P.at(i, j) >= 0.0);
    }
  }
}

TEST_CASE("stationary distribution is a point mass at zero when idle") {
  const auto P = transition_matrix(ModelParams::from_utilization(0.0, 1), 8);
  const Pmf pi = stationary_distribution(P);
  CHECK(pi.p[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("direct solve and power iteration agree to 1e-9") {
  for (const auto& [rho, slots] : std::vector<std::pair<double, int>>{
           {0.3, 1}, {0.9, 1}, {1.5, 2}, {2.7, 3}}) {
    const auto P = transition_matrix(ModelParams::from_utilization(rho, slots), 64);
    const Pmf direct = stationary_distribution(P, StationarySolver::DirectSolve);
    const Pmf power = stationary_distribution(P, StationarySolver::PowerIteration);
    REQUIRE(direct.p.size() == power.p.size());
    double max_diff = 0.0;
    for (std::size_t i = 0; i < direct.p.size(); ++i)
      max_diff = std::max(max_diff, std::abs(direct.p[i] - power.p[i]));
    CHECK(max_diff < 1e-9);
  }
}

TEST_CASE("instability is rejected") {
  const auto P = transition_matrix(ModelParams::from_utilization(1.2, 1), 64);
  CHECK_THROWS_AS(stationary_distribution(P), std::domain_error);
}

TEST_CASE("residual arrival closed form and normalization") {
  CHECK(residual_arrival_pmf(0, 1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(residual_arrival_pmf(0, 0.0), std::domain_error);
  for (const double rho : {0.3, 1.0, 5.0}) {
    double sum = 0.0;
    for (int j = 0; j < 400; ++j) sum += residual_arrival_pmf(j, rho);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("queue length distribution reduces to pi at rho = 0") {
  Pmf pi;
  pi.p = {0.25, 0.5, 0.25};
  const Pmf L = queue_length_distribution(pi, 0.0);
  REQUIRE(L.p.size() == 3);
  CHECK(L.p[1] == doctest::Approx(0.5));
}

TEST_CASE("queue length distribution stays normalized") {
  const ModelParams params = ModelParams::from_utilization(0.5, 1);
  const Pmf pi = stationary_distribution(transition_matrix(params, 64));
  const Pmf L = queue_length_distribution(pi, params.utilization());
  CHECK(L.sum() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("monte carlo oracle validates pi, L(t) and the delay cdf at rho 0.5") {
  const ModelParams params = ModelParams::from_utilization(0.5, 1);
  // 5e5 arrivals give about 1e6 multisuperframe boundaries.
  const McOracleResult mc = mc_oracle(params, 500'000, 2024);

  const Pmf pi = stationary_distribution(transition_matrix(params, 64));
  for (std::size_t i = 0; i < std::min<std::size_t>(pi.p.size(), mc.boundary_queue.p.size());
       ++i)
    CHECK(std::abs(pi.p[i] - mc.boundary_queue.p[i]) < 0.005);

  const Pmf L = queue_length_distribution(pi, params.utilization());
  for (std::size_t i = 0; i < mc.queue_at_random_time.p.size(); ++i)
    CHECK(std::abs(L.at(static_cast<int>(i)) - mc.queue_at_random_time.p[i]) < 0.005);

  const DelayCdf analytic = analytic_delay_cdf(params);
  CHECK(sup_norm_distance(analytic, mc.delay) < 0.01);
}

TEST_CASE("residual arrivals match the MC time-weighted distribution") {
  // With an always-empty queue the queue content at a random time is just
  // the residual arrivals since the last boundary.
  const ModelParams params = ModelParams::from_utilization(0.3, 4);
  const McOracleResult mc = mc_oracle(params, 300'000, 7);
  for (int j = 0; j < static_cast<int>(mc.queue_at_random_time.p.size()); ++j) {
    // L(t) = sum_i pi_{j-i} r_i with pi almost a point mass at 0
    const double expected = residual_arrival_pmf(j, params.utilization());
    CHECK(std::abs(expected - mc.queue_at_random_time.p[j]) < 0.006);
  }
}

TEST_CASE("mc oracle is deterministic and bounded for tiny load") {
  const ModelParams params = ModelParams::from_utilization(0.01, 1);
  const McOracleResult a = mc_oracle(params, 50'000, 99);
  const McOracleResult b = mc_oracle(params, 50'000, 99);
  CHECK(a.delay.f == b.delay.f);
  CHECK(a.boundary_queue.p == b.boundary_queue.p);
  CHECK(a.delay.at(1) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("delay cdf is monotone in n and slots, anti-monotone in rho") {
  const DelayCdf low = analytic_delay_cdf(ModelParams::from_utilization(0.05, 1));
  CHECK(low.at(1) >= 0.99);

  for (const double rho : {0.3, 0.7, 0.9}) {
    const DelayCdf f1 = analytic_delay_cdf(ModelParams::from_utilization(rho, 1));
    const DelayCdf f2 = analytic_delay_cdf(ModelParams::from_utilization(rho, 2));
    const DelayCdf f3 = analytic_delay_cdf(ModelParams::from_utilization(rho, 3));
    for (std::size_t n = 1; n < f1.f.size(); ++n) CHECK(f1.f[n] >= f1.f[n - 1]);
    for (int n = 1; n <= 8; ++n) {
      CHECK(f2.at(n) >= f1.at(n));
      CHECK(f3.at(n) >= f2.at(n));
    }
  }
  for (const int slots : {1, 2}) {
    const DelayCdf fa = analytic_delay_cdf(ModelParams::from_utilization(0.2 * slots, slots));
    const DelayCdf fb = analytic_delay_cdf(ModelParams::from_utilization(0.8 * slots, slots));
    for (int n = 1; n <= 8; ++n) CHECK(fa.at(n) >= fb.at(n));
  }
}

TEST_CASE("sweep reports slot gains and flags unstable rows") {
  const double utils[] = {20.0, 95.0, 130.0};
  const int slots[] = {1, 2, 3};
  const auto rows = sweep(utils, slots, 3.84);

  auto value = [&](double u, int s, int n) {
    for (const auto& r : rows)
      if (r.utilization_pct == u && r.slots == s && r.stable && r.n_msf == n) return r.cdf;
    return -1.0;
  };
  // low utilization: slot count barely matters
  CHECK(std::abs(value(20.0, 3, 1) - value(20.0, 1, 1)) < 0.05);
  // high utilization: the second slot helps much more than the third
  const double gain12 = value(95.0, 2, 1) - value(95.0, 1, 1);
  const double gain23 = value(95.0, 3, 1) - value(95.0, 2, 1);
  CHECK(gain12 > gain23);

  bool found_unstable = false;
  for (const auto& r : rows)
    if (r.utilization_pct == 130.0 && r.slots == 1) found_unstable = !r.stable;
  CHECK(found_unstable);

  const auto rows2 = sweep(utils, slots, 3.84);
  REQUIRE(rows.size() == rows2.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].cdf == rows2[i].cdf);
}
