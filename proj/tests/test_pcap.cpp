#include <doctest.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "helpers.hpp"
#include "lucid/error.hpp"
#include "lucid/features.hpp"
#include "lucid/frame.hpp"
#include "lucid/pcap.hpp"

using namespace lucid;
using lucid::test::hex;

namespace {

const char* kGlobalLE = "d4c3b2a1 0200 0400 00000000 00000000 ffff0000 01000000";

// Ethernet + IPv4 + TCP header of a 151-byte frame: 192.168.0.1:54321 ->
// 192.168.0.199:80, ack 336, PSH|ACK, window 1444, DF set.
const char* kTcpHeaders =
    "001122334455 66778899aabb 0800"
    "45000089 1c464000 40060000 c0a80001 c0a800c7"
    "d4310050 00000001 00000150 501805a4 00000000";

std::vector<std::uint8_t> tcp_frame() {
  auto f = hex(kTcpHeaders);
  const std::string payload = "GET / HTTP/1.1\r\n" + std::string(81, 'A');
  f.insert(f.end(), payload.begin(), payload.end());
  return f;
}

std::vector<std::uint8_t> with_record(std::vector<std::uint8_t> cap, const char* record_header,
                                      const std::vector<std::uint8_t>& frame) {
  auto rh = hex(record_header);
  cap.insert(cap.end(), rh.begin(), rh.end());
  cap.insert(cap.end(), frame.begin(), frame.end());
  return cap;
}

// ts 1577836800.123456, caplen = wire = 151
const char* kRecord151 = "00e10b5e 40e20100 97000000 97000000";

}  // namespace

TEST_SUITE("pcap") {

TEST_CASE("global header only gives an empty capture") {
  const auto cap = parse_pcap(hex(kGlobalLE));
  CHECK(cap.packets.empty());
  CHECK(cap.stats.records == 0);
  CHECK(cap.stats.skipped == 0);
  CHECK(cap.stats.truncated == 0);
  CHECK(cap.link_type == LinkType::ethernet);
}

TEST_CASE("hand-built TCP/IPv4 record decodes field by field") {
  const auto frame = tcp_frame();
  REQUIRE(frame.size() == 151);
  const auto cap = parse_pcap(with_record(hex(kGlobalLE), kRecord151, frame));
  REQUIRE(cap.packets.size() == 1);
  const auto& p = cap.packets[0];
  CHECK(p.proto == 6);
  CHECK(p.ts_ns == 1'577'836'800'123'456'000);
  CHECK(p.src_ip == test::ip(192, 168, 0, 1));
  CHECK(p.dst_ip == test::ip(192, 168, 0, 199));
  CHECK(p.src_port == 54321);
  CHECK(p.dst_port == 80);
  CHECK(p.wire_len == 151);
  CHECK(p.ip_total_len == 137);
  CHECK(p.ip_flags == 0x4000);
  CHECK(p.tcp_len == 97);
  CHECK(p.tcp_ack == 336);
  CHECK(p.tcp_flags == 0x018);
  CHECK(p.tcp_win == 1444);
  CHECK(p.udp_len == 0);
  CHECK(p.has_layer("ip"));
  CHECK(p.has_layer("tcp"));
  CHECK(p.has_layer("http"));

  const auto feat = dissect(p, ProtocolRegistry::standard());
  CHECK(feat.pkt_len == 151);
  CHECK(feat.tcp_flags == 0x018);
  CHECK(feat.tcp_ack == 336);
  CHECK(feat.tcp_win == 1444);
  CHECK(feat.tcp_len == 97);
  CHECK(feat.udp_len == 0);
  CHECK(feat.icmp_type == 0);
  CHECK(feat.ip_flags == 0x4000);
  // registry order: arp ip icmp tcp udp dns http ...
  CHECK(feat.protocols == ((1u << 1) | (1u << 3) | (1u << 6)));
  CHECK(feat.highest_layer == 7);
}

TEST_CASE("valid record followed by a truncated one") {
  auto bytes = with_record(hex(kGlobalLE), kRecord151, tcp_frame());
  const auto half = hex("00e10b5e 40e20100 97000000 97000000 001122334455");
  bytes.insert(bytes.end(), half.begin(), half.end());
  const auto cap = parse_pcap(bytes);
  CHECK(cap.packets.size() == 1);
  CHECK(cap.stats.truncated == 1);

  auto cut_header = with_record(hex(kGlobalLE), kRecord151, tcp_frame());
  cut_header.push_back(0);
  CHECK(parse_pcap(cut_header).stats.truncated == 1);
}

TEST_CASE("bad magic and unsupported link type are format errors") {
  CHECK_THROWS_AS(parse_pcap(hex("deadbeef 0200 0400 00000000 00000000 ffff0000 01000000")),
                  FormatError);
  CHECK_THROWS_AS(parse_pcap(hex("d4c3b2a1 0200 0400 00000000 00000000 ffff0000 e7030000")),
                  FormatError);
  CHECK_THROWS_AS(parse_pcap(hex("d4c3b2a1 0200")), FormatError);
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(parse_pcap(std::filesystem::path("/nonexistent/x.pcap")), IoError);
}

TEST_CASE("nanosecond and big-endian variants") {
  // ns magic, little endian, frac = 5 ns
  auto ns = with_record(hex("4d3cb2a1 0200 0400 00000000 00000000 ffff0000 01000000"),
                        "00e10b5e 05000000 97000000 97000000", tcp_frame());
  auto cap = parse_pcap(ns);
  REQUIRE(cap.packets.size() == 1);
  CHECK(cap.nanosecond);
  CHECK(cap.packets[0].ts_ns == 1'577'836'800'000'000'005);

  // microsecond magic written big endian
  auto be = with_record(hex("a1b2c3d4 0002 0004 00000000 00000000 0000ffff 00000001"),
                        "5e0be100 0001e240 00000097 00000097", tcp_frame());
  cap = parse_pcap(be);
  REQUIRE(cap.packets.size() == 1);
  CHECK(cap.packets[0].ts_ns == 1'577'836'800'123'456'000);
  CHECK(cap.packets[0].tcp_win == 1444);
}

TEST_CASE("writer output parses back for every option combination") {
  const auto frame = tcp_frame();
  for (bool nano : {false, true}) {
    for (bool big : {false, true}) {
      PcapWriterOptions opt;
      opt.nanosecond = nano;
      opt.big_endian = big;
      auto bytes = PcapWriter::global_header(opt);
      const auto rec = PcapWriter::record(opt, 1'577'836'800'000'001'000, frame, 151);
      bytes.insert(bytes.end(), rec.begin(), rec.end());
      const auto cap = parse_pcap(bytes);
      REQUIRE(cap.packets.size() == 1);
      CHECK(cap.nanosecond == nano);
      CHECK(cap.packets[0].ts_ns == 1'577'836'800'000'001'000);
      CHECK(cap.packets[0].tcp_ack == 336);
    }
  }
}

TEST_CASE("UDP DNS query") {
  // 10.0.0.1:50000 -> 10.0.0.53:53, 29 payload bytes
  auto frame = hex(
      "001122334455 66778899aabb 0800"
      "45000039 00010000 40110000 0a000001 0a000035"
      "c3500035 00250000");
  frame.resize(frame.size() + 29, 0x11);
  auto cap = parse_pcap(with_record(hex(kGlobalLE), "00000000 00000000 47000000 47000000", frame));
  REQUIRE(cap.packets.size() == 1);
  const auto& p = cap.packets[0];
  CHECK(p.proto == 17);
  CHECK(p.udp_len == 29);
  const auto f = dissect(p, ProtocolRegistry::standard());
  CHECK(f.udp_len == 29);
  CHECK(f.protocols == ((1u << 1) | (1u << 4) | (1u << 5)));
  CHECK(f.highest_layer == 6);
  CHECK(f.tcp_len == 0);
  CHECK(f.tcp_flags == 0);
  CHECK(f.icmp_type == 0);
  CHECK(f.ip_flags == 0);
}

TEST_CASE("ICMP echo request") {
  auto frame = hex(
      "001122334455 66778899aabb 0800"
      "4500001c 00014000 40010000 0a000001 0a000002"
      "08000000 00010001");
  auto cap = parse_pcap(with_record(hex(kGlobalLE), "00000000 00000000 2a000000 2a000000", frame));
  REQUIRE(cap.packets.size() == 1);
  const auto f = dissect(cap.packets[0], ProtocolRegistry::standard());
  CHECK(f.icmp_type == 8);
  CHECK(f.tcp_len == 0);
  CHECK(f.tcp_ack == 0);
  CHECK(f.tcp_flags == 0);
  CHECK(f.tcp_win == 0);
  CHECK(f.udp_len == 0);
  CHECK(f.protocols == ((1u << 1) | (1u << 2)));
  CHECK(f.highest_layer == 3);
}

TEST_CASE("ARP request") {
  auto frame = hex(
      "ffffffffffff 66778899aabb 0806"
      "0001 0800 06 04 0001 66778899aabb 0a000001 000000000000 0a000002");
  auto cap = parse_pcap(with_record(hex(kGlobalLE), "00000000 00000000 2a000000 2a000000", frame));
  REQUIRE(cap.packets.size() == 1);
  const auto f = dissect(cap.packets[0], ProtocolRegistry::standard());
  CHECK(f.protocols == 1u);
  CHECK(f.highest_layer == 1);
  CHECK(f.ip_flags == 0);
}

TEST_CASE("IPv6 frames are skipped and counted") {
  auto frame = hex("001122334455 66778899aabb 86dd 60000000 00000000");
  frame.resize(54, 0);
  auto cap = parse_pcap(with_record(hex(kGlobalLE), "00000000 00000000 36000000 36000000", frame));
  CHECK(cap.packets.empty());
  CHECK(cap.stats.skipped == 1);
  CHECK(cap.stats.ipv6 == 1);
}

TEST_CASE("raw IPv4 and Linux cooked link types") {
  const auto eth = tcp_frame();
  const std::vector<std::uint8_t> ip_only(eth.begin() + 14, eth.end());
  PcapWriterOptions raw;
  raw.link_type = LinkType::raw;
  auto bytes = PcapWriter::global_header(raw);
  auto rec = PcapWriter::record(raw, 0, ip_only, static_cast<std::uint32_t>(ip_only.size()));
  bytes.insert(bytes.end(), rec.begin(), rec.end());
  auto cap = parse_pcap(bytes);
  REQUIRE(cap.packets.size() == 1);
  CHECK(cap.packets[0].tcp_ack == 336);

  PcapWriterOptions sll;
  sll.link_type = LinkType::linux_sll;
  auto frame = hex("0000 0001 0006 66778899aabb 0000 0800");
  frame.insert(frame.end(), ip_only.begin(), ip_only.end());
  bytes = PcapWriter::global_header(sll);
  rec = PcapWriter::record(sll, 0, frame, static_cast<std::uint32_t>(frame.size()));
  bytes.insert(bytes.end(), rec.begin(), rec.end());
  cap = parse_pcap(bytes);
  REQUIRE(cap.packets.size() == 1);
  CHECK(cap.packets[0].tcp_win == 1444);
}

TEST_CASE("frame encoder checksums verify to zero") {
  FrameSpec spec;
  spec.src_ip = test::ip(10, 1, 2, 3);
  spec.dst_ip = test::ip(10, 3, 2, 1);
  spec.proto = 6;
  spec.src_port = 1234;
  spec.dst_port = 80;
  spec.tcp_flags = 0x002;
  spec.payload = {1, 2, 3};
  const auto frame = encode_frame(spec);
  CHECK(internet_checksum(frame.data() + 14, 20) == 0);
}

}  // TEST_SUITE

TEST_SUITE("features") {

TEST_CASE("registry holds the 13 protocols in fixed order") {
  const auto& r = ProtocolRegistry::standard();
  const std::vector<std::string> expected = {"arp", "ip",   "icmp", "tcp",    "udp", "dns", "http",
                                             "tls", "ftp", "ssh",  "smtp", "telnet", "irc"};
  CHECK(r.names() == expected);
  CHECK(r.index_of("dns") == 5);
  CHECK_FALSE(r.index_of("eth").has_value());
}

TEST_CASE("dissection is deterministic and blind to addresses") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    auto pkts = test::random_stream(rng, 1, 1.0);
    auto p = pkts[0];
    const auto a = dissect(p, ProtocolRegistry::standard());
    CHECK(a == dissect(p, ProtocolRegistry::standard()));
    p.src_ip ^= 0xffffu;
    p.dst_port = 9999;
    p.src_port = 1;
    CHECK(a == dissect(p, ProtocolRegistry::standard()));
  }
}

TEST_CASE("protocol bits map to present layers and transports do not mix") {
  Rng rng(12);
  const auto& reg = ProtocolRegistry::standard();
  for (const auto& p : test::random_stream(rng, 500, 10.0)) {
    const auto f = dissect(p, reg);
    CHECK(std::popcount(f.protocols) >= 1);
    for (std::size_t b = 0; b < reg.size(); ++b) {
      if (f.protocols & (1u << b)) CHECK(p.has_layer(reg.name(b)));
    }
    const int transports = (f.tcp_len | f.tcp_ack | f.tcp_flags | f.tcp_win ? 1 : 0) +
                           (f.udp_len ? 1 : 0) + (f.icmp_type ? 1 : 0);
    CHECK(transports <= 1);
  }
}

TEST_CASE("TCP row with flags 0x018, ack 336, window 1444") {
  PacketRecord p = test::packet(0, 1, 2, 3, 4, ipproto::tcp, 151);
  p.tcp_flags = 0x018;
  p.tcp_ack = 336;
  p.tcp_win = 1444;
  const auto v = dissect(p, ProtocolRegistry::standard()).values();
  CHECK(v[column(Feature::pkt_len)] == 151);
  CHECK(v[column(Feature::tcp_flags)] == 24);
  CHECK(v[column(Feature::tcp_ack)] == 336);
  CHECK(v[column(Feature::tcp_win)] == 1444);
  CHECK(v[column(Feature::udp_len)] == 0);
  CHECK(v[column(Feature::icmp_type)] == 0);
}

}  // TEST_SUITE
