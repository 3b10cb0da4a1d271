#include "doctest.h"

#include "lpwan/compression.hpp"
#include "lpwan/rng.hpp"

using namespace lpwan;
using namespace lpwan::compression;

TEST_CASE("uncompressed header sizes use the protocol constants") {
  const PacketTemplate t = PacketTemplate::minimal();
  const HeaderSizes s = uncompressed_sizes(t);
  CHECK(s.ipv6 + s.udp == 48);
  // NON POST, 1 B token, one Uri-Path option of 4 B: 4 + 1 + (1 + 4).
  CHECK(s.coap == 10);
}

TEST_CASE("schc frame for the minimal template is 35 bytes") {
  const PacketTemplate t = PacketTemplate::minimal();
  const FrameLayout f = schc_frame(t, SchcRule::for_template(t));
  CHECK(f.l2_header_bytes == 13);
  CHECK(f.adaptation_bytes == 0);
  CHECK(f.upper_header_bytes == 10);
  CHECK(f.payload_bytes == 12);
  CHECK(f.total_phy_payload() == 35);
  // IPv6+UDP compress to the single FPort byte.
  CHECK(f.compression_ratio == doctest::Approx(48.0));
  CHECK_FALSE(f.fallback);
}

TEST_CASE("zero-payload poll frame is the bare 13 B LoRaWAN header") {
  const PacketTemplate poll = PacketTemplate::empty_poll();
  const FrameLayout f = schc_frame(poll, SchcRule::for_template(poll));
  CHECK(f.total_phy_payload() == 13);
}

TEST_CASE("rule mismatch falls back to inline headers and reports it") {
  PacketTemplate t = PacketTemplate::minimal();
  const SchcRule rule = SchcRule::for_template(t);
  t.udp_dst_port = 7000;
  const FrameLayout f = schc_frame(t, rule);
  CHECK(f.fallback);
  CHECK(f.adaptation_bytes == 48);
}

TEST_CASE("sixlowpan frame for the minimal template is 42 bytes") {
  const PacketTemplate t = PacketTemplate::minimal();
  const FrameLayout f = sixlowpan_frame(t, SixlowpanContext{});
  // IPHC 2 + NHC 1 + full ports 4 + checksum 2 (ports 5683 are outside the
  // 0xF0Bx nibble range).
  CHECK(f.adaptation_bytes == 9);
  CHECK(f.l2_header_bytes == 11);
  CHECK(f.total_phy_payload() == 11 + 9 + 10 + 12);
}

TEST_CASE("nibble-compressible ports shrink the NHC to one port byte") {
  PacketTemplate t = PacketTemplate::minimal();
  t.udp_src_port = 0xF0B1;
  t.udp_dst_port = 0xF0B2;
  const FrameLayout f = sixlowpan_frame(t, SixlowpanContext{});
  CHECK(f.adaptation_bytes == 6);  // 2 + 1 + 1 + 2
}

TEST_CASE("nonzero context ids add the CID byte") {
  PacketTemplate t = PacketTemplate::minimal();
  t.dst_context = 3;
  const FrameLayout f = sixlowpan_frame(t, SixlowpanContext{});
  CHECK(f.adaptation_bytes == 10);
}

TEST_CASE("schc compresses strictly better than sixlowpan for matching templates") {
  RngStream rng(3, 9);
  for (int i = 0; i < 200; ++i) {
    PacketTemplate t = PacketTemplate::paper_default();
    t.payload_bytes = static_cast<int>(rng.uniform_int(64));
    t.udp_src_port = static_cast<int>(rng.uniform_int(65536));
    t.udp_dst_port = static_cast<int>(rng.uniform_int(65536));
    const FrameLayout schc = schc_frame(t, SchcRule::for_template(t));
    const FrameLayout lowpan = sixlowpan_frame(t, SixlowpanContext{});
    CHECK(schc.adaptation_bytes <= 1);
    CHECK(lowpan.adaptation_bytes >= 6);
    CHECK(schc.adaptation_bytes < lowpan.adaptation_bytes);
    CHECK(schc.compression_ratio > lowpan.compression_ratio);
    // byte conservation
    CHECK(schc.total_phy_payload() == schc.l2_header_bytes + schc.adaptation_bytes +
                                          schc.upper_header_bytes + schc.payload_bytes);
    CHECK(lowpan.total_phy_payload() == lowpan.l2_header_bytes + lowpan.adaptation_bytes +
                                            lowpan.upper_header_bytes + lowpan.payload_bytes);
  }
}

TEST_CASE("frame sizes are monotone in payload and option bytes") {
  PacketTemplate t = PacketTemplate::minimal();
  const SixlowpanContext ctx;
  int prev = sixlowpan_frame(t, ctx).total_phy_payload();
  for (int pl = 1; pl < 40; ++pl) {
    t.payload_bytes = pl;
    const int total = sixlowpan_frame(t, ctx).total_phy_payload();
    CHECK(total >= prev);
    prev = total;
  }
  PacketTemplate small = PacketTemplate::minimal();
  PacketTemplate big = PacketTemplate::minimal();
  big.coap->options.push_back(CoapOption{12, 1});  // Content-Format
  CHECK(sixlowpan_frame(big, ctx).total_phy_payload() >
        sixlowpan_frame(small, ctx).total_phy_payload());
}

TEST_CASE("paper-default template reproduces the measured airtimes") {
  const PacketTemplate t = PacketTemplate::paper_default();
  const CompareReport r = compare(t, SchcRule::for_template(t), SixlowpanContext{}, phy::PhyParams{});
  CHECK(r.schc.total_phy_payload() == 55);
  CHECK(r.sixlowpan.total_phy_payload() == 62);
  CHECK(r.toa_schc < r.toa_sixlowpan);
  CHECK(as_seconds(r.toa_schc) == doctest::Approx(0.108).epsilon(0.15));
  CHECK(as_seconds(r.toa_sixlowpan) == doctest::Approx(0.118).epsilon(0.15));
}

TEST_CASE("compare keeps the airtime ordering even without payload") {
  PacketTemplate t = PacketTemplate::paper_default();
  t.payload_bytes = 0;
  const CompareReport r = compare(t, SchcRule::for_template(t), SixlowpanContext{}, phy::PhyParams{});
  CHECK(r.toa_schc < r.toa_sixlowpan);
}
