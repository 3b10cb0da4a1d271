#include "doctest.h"

#include "lpwan/phy.hpp"
#include "lpwan/rng.hpp"

using namespace lpwan;
using namespace lpwan::phy;

namespace {

PhyParams sf7bw125() { return PhyParams{}; }

Transmission tx_at(std::int64_t start_us, std::int64_t airtime_us, std::int64_t ch = 868'100'000,
                   double dbm = 14.0, int source = 0) {
  return Transmission{TimeInstant{Duration{start_us}}, Duration{airtime_us}, ch, 7, dbm, source};
}

}  // namespace

TEST_CASE("symbol time at SF7BW125 is 1.024 ms") {
  CHECK(symbol_time(sf7bw125()) == Duration{1024});
}

TEST_CASE("time on air matches the hand-evaluated symbol counts") {
  // 12.25 preamble-equivalent symbols + 13 payload symbols at 1.024 ms.
  CHECK(time_on_air(sf7bw125(), 0) == Duration{25'856});
  // 56 B payload: 93 payload symbols -> 107.776 ms, within 1 ms of the
  // 108 ms LoRaWAN frame airtime.
  CHECK(time_on_air(sf7bw125(), 56) == Duration{107'776});
  CHECK(as_seconds(time_on_air(sf7bw125(), 56)) == doctest::Approx(0.108).epsilon(0.01));
}

TEST_CASE("time on air is non-decreasing and plateaus on coding blocks") {
  Duration prev = time_on_air(sf7bw125(), 0);
  int plateau = 1;
  int max_plateau = 0;
  for (int pl = 1; pl <= 255; ++pl) {
    const Duration toa = time_on_air(sf7bw125(), pl);
    CHECK(toa >= prev);
    if (toa == prev) {
      ++plateau;
    } else {
      max_plateau = std::max(max_plateau, plateau);
      plateau = 1;
    }
    prev = toa;
  }
  CHECK(time_on_air(sf7bw125(), 10) < time_on_air(sf7bw125(), 20));
  // 4*(SF-2DE)/8 = 3.5 bytes per coding block of (CR+4) symbols.
  CHECK(max_plateau >= 3);
  CHECK(max_plateau <= 4);
}

TEST_CASE("time on air rejects unsupported configurations") {
  PhyParams p = sf7bw125();
  p.spreading_factor = 6;
  CHECK_THROWS(time_on_air(p, 10));
  p = sf7bw125();
  p.bandwidth_hz = 100000;
  CHECK_THROWS(time_on_air(p, 10));
  CHECK_THROWS(time_on_air(sf7bw125(), 256));
  CHECK_THROWS(time_on_air(sf7bw125(), -1));
}

TEST_CASE("overlaps requires time, channel and SF to coincide") {
  const auto a = tx_at(0, 1000);
  CHECK_FALSE(overlaps(a, tx_at(2000, 1000)));             // disjoint
  CHECK_FALSE(overlaps(a, tx_at(0, 1000, 868'300'000)));   // different channel
  CHECK(overlaps(a, tx_at(200, 100)));                     // nested
  auto b = tx_at(500, 1000);
  b.sf = 8;
  CHECK_FALSE(overlaps(a, b));  // different SF
  CHECK_FALSE(overlaps(a, tx_at(1000, 1000)));  // touching boundaries do not overlap
}

TEST_CASE("overlaps is symmetric") {
  RngStream rng(7, 0);
  for (int i = 0; i < 500; ++i) {
    const auto a = tx_at(static_cast<std::int64_t>(rng.uniform_int(5000)),
                         1 + static_cast<std::int64_t>(rng.uniform_int(2000)),
                         868'100'000 + 200'000 * static_cast<std::int64_t>(rng.uniform_int(2)));
    const auto b = tx_at(static_cast<std::int64_t>(rng.uniform_int(5000)),
                         1 + static_cast<std::int64_t>(rng.uniform_int(2000)),
                         868'100'000 + 200'000 * static_cast<std::int64_t>(rng.uniform_int(2)));
    CHECK(overlaps(a, b) == overlaps(b, a));
  }
}

TEST_CASE("collision resolution without capture kills both frames") {
  std::vector<Transmission> txs{tx_at(0, 1000, 868'100'000, 14.0, 0),
                                tx_at(500, 1000, 868'100'000, 14.0, 1)};
  const auto outcome = resolve_collisions(txs, false, 6.0);
  CHECK(outcome[0] == TxOutcome::Lost);
  CHECK(outcome[1] == TxOutcome::Lost);
}

TEST_CASE("capture lets the stronger frame survive above the threshold") {
  std::vector<Transmission> txs{tx_at(0, 1000, 868'100'000, 14.0, 0),
                                tx_at(500, 1000, 868'100'000, 2.0, 1)};
  auto outcome = resolve_collisions(txs, true, 6.0);
  CHECK(outcome[0] == TxOutcome::Ok);   // 12 dB margin
  CHECK(outcome[1] == TxOutcome::Lost);

  txs[1].tx_power_dbm = 10.0;  // 4 dB < 6 dB threshold
  outcome = resolve_collisions(txs, true, 6.0);
  CHECK(outcome[0] == TxOutcome::Lost);
  CHECK(outcome[1] == TxOutcome::Lost);
}

TEST_CASE("collision outcome is permutation-invariant with capture off") {
  RngStream rng(11, 1);
  std::vector<Transmission> txs;
  for (int i = 0; i < 12; ++i)
    txs.push_back(tx_at(static_cast<std::int64_t>(rng.uniform_int(4000)), 900,
                        868'100'000 + 200'000 * static_cast<std::int64_t>(rng.uniform_int(3)),
                        14.0, i));
  const auto base = resolve_collisions(txs, false, 6.0);
  std::vector<std::size_t> perm(txs.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 5 + 3) % perm.size();
  std::vector<Transmission> shuffled;
  for (const auto idx : perm) shuffled.push_back(txs[idx]);
  const auto out = resolve_collisions(shuffled, false, 6.0);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(out[i] == base[perm[i]]);
}
