#include "lpwan/compression.hpp"

#include <stdexcept>

namespace lpwan::compression {

namespace {

constexpr int kLorawanL2Bytes = 13;   // MHDR 1 + DevAddr 4 + FCtrl 1 + FCnt 2 + FPort 1 + MIC 4
constexpr int kIeee802154L2Bytes = 11;  // FCF 2 + seq 1 + PAN 2 + dst 2 + src 2 + FCS 2

int coap_option_field_bytes(int value) {
  // Option delta/length nibble extension per RFC 7252 encoding.
  if (value < 0) throw std::invalid_argument("negative CoAP option field");
  if (value <= 12) return 0;
  if (value <= 268) return 1;
  return 2;
}

int coap_header_bytes(const CoapSpec& coap) {
  if (coap.token_length < 0 || coap.token_length > 8)
    throw std::invalid_argument("CoAP token length must be 0..8");
  int bytes = 4 + coap.token_length;
  int previous_number = 0;
  for (const CoapOption& opt : coap.options) {
    const int delta = opt.number - previous_number;
    if (delta < 0) throw std::invalid_argument("CoAP options must be in ascending order");
    bytes += 1 + coap_option_field_bytes(delta) + coap_option_field_bytes(opt.length) + opt.length;
    previous_number = opt.number;
  }
  return bytes;
}

/// NHC-UDP port field bytes for the four RFC 6282 port compression modes.
int nhc_udp_port_bytes(int src, int dst) {
  const bool src_nibble = (src & 0xfff0) == 0xf0b0;
  const bool dst_nibble = (dst & 0xfff0) == 0xf0b0;
  const bool src_byte = (src & 0xff00) == 0xf000;
  const bool dst_byte = (dst & 0xff00) == 0xf000;
  if (src_nibble && dst_nibble) return 1;  // both packed into one byte
  if (dst_byte) return 3;                  // src 16 bits + dst 8 bits
  if (src_byte) return 3;                  // src 8 bits + dst 16 bits
  return 4;                                // both carried in full
}

}  // namespace

PacketTemplate PacketTemplate::minimal() {
  PacketTemplate t;
  t.coap = CoapSpec{1, {{11, 4}}};
  t.payload_bytes = 12;
  return t;
}

PacketTemplate PacketTemplate::paper_default() {
  PacketTemplate t;
  t.coap = CoapSpec{2, {{11, 10}, {11, 12}}};
  t.payload_bytes = 12;
  return t;
}

PacketTemplate PacketTemplate::empty_poll() {
  PacketTemplate t;
  t.coap.reset();
  t.payload_bytes = 0;
  return t;
}

HeaderSizes uncompressed_sizes(const PacketTemplate& t) {
  if (t.payload_bytes < 0) throw std::invalid_argument("negative payload");
  HeaderSizes sizes;
  sizes.coap = t.coap ? coap_header_bytes(*t.coap) : 0;
  return sizes;
}

bool SchcRule::matches(const PacketTemplate& t) const {
  return t.src_context == src_context && t.dst_context == dst_context &&
         t.udp_src_port == udp_src_port && t.udp_dst_port == udp_dst_port;
}

SchcRule SchcRule::for_template(const PacketTemplate& t) {
  return SchcRule{1, t.src_context, t.dst_context, t.udp_src_port, t.udp_dst_port};
}

FrameLayout schc_frame(const PacketTemplate& t, const SchcRule& rule) {
  const HeaderSizes raw = uncompressed_sizes(t);
  FrameLayout f;
  f.l2_header_bytes = kLorawanL2Bytes;
  f.upper_header_bytes = raw.coap;  // libschc leaves CoAP untouched
  f.payload_bytes = t.payload_bytes;
  if (rule.matches(t)) {
    // IPv6+UDP elide completely; the Rule ID byte is the FPort, already
    // part of the 13 B L2 header.
    f.adaptation_bytes = 0;
    f.compression_ratio = static_cast<double>(raw.ipv6 + raw.udp) / 1.0;
  } else {
    f.adaptation_bytes = raw.ipv6 + raw.udp;
    f.compression_ratio = static_cast<double>(raw.ipv6 + raw.udp) / (raw.ipv6 + raw.udp + 1);
    f.fallback = true;
  }
  return f;
}

FrameLayout sixlowpan_frame(const PacketTemplate& t, const SixlowpanContext& ctx) {
  const HeaderSizes raw = uncompressed_sizes(t);
  FrameLayout f;
  f.l2_header_bytes = kIeee802154L2Bytes;
  f.upper_header_bytes = raw.coap;
  f.payload_bytes = t.payload_bytes;

  int iphc = 2;
  if (t.src_context != 0 || t.dst_context != 0) iphc += 1;  // CID byte
  int addresses = 0;
  if (!ctx.covers(t)) addresses = 32;  // addresses carried inline, never fails
  const int nhc = 1 + nhc_udp_port_bytes(t.udp_src_port, t.udp_dst_port) + 2;  // + checksum
  f.adaptation_bytes = iphc + addresses + nhc;
  f.compression_ratio = static_cast<double>(raw.ipv6 + raw.udp) / f.adaptation_bytes;
  return f;
}

CompareReport compare(const PacketTemplate& t, const SchcRule& rule,
                      const SixlowpanContext& ctx, const phy::PhyParams& phy) {
  CompareReport r;
  r.schc = schc_frame(t, rule);
  r.sixlowpan = sixlowpan_frame(t, ctx);
  r.toa_schc = phy::time_on_air(phy, r.schc.total_phy_payload());
  r.toa_sixlowpan = phy::time_on_air(phy, r.sixlowpan.total_phy_payload());
  return r;
}

}  // namespace lpwan::compression
