#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lucid/pcap.hpp"
#include "lucid/random.hpp"

namespace lucid::test {

inline std::vector<std::uint8_t> hex(std::string_view text) {
  std::vector<std::uint8_t> out;
  int hi = -1;
  for (char c : text) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
      hi = -1;
    }
  }
  return out;
}

inline std::uint32_t ip(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  return std::uint32_t{a} << 24 | std::uint32_t{b} << 16 | std::uint32_t{c} << 8 | d;
}

// A decoded packet built directly, bypassing the byte parser.
inline PacketRecord packet(std::int64_t ts_ns, std::uint32_t src, std::uint16_t sport,
                           std::uint32_t dst, std::uint16_t dport, std::uint8_t proto = ipproto::tcp,
                           std::uint32_t len = 60) {
  PacketRecord p;
  p.ts_ns = ts_ns;
  p.src_ip = src;
  p.dst_ip = dst;
  p.src_port = sport;
  p.dst_port = dport;
  p.proto = proto;
  p.wire_len = len;
  p.ip_total_len = static_cast<std::uint16_t>(len - 14);
  p.ip_flags = 0x4000;
  p.layers = {"eth", "ip"};
  if (proto == ipproto::tcp) {
    p.layers.emplace_back("tcp");
    p.tcp_len = len - 54;
    p.tcp_ack = 1000;
    p.tcp_flags = 0x18;
    p.tcp_win = 1444;
  } else if (proto == ipproto::udp) {
    p.layers.emplace_back("udp");
    p.udp_len = len - 42;
  } else if (proto == ipproto::icmp) {
    p.layers.emplace_back("icmp");
    p.icmp_type = 8;
    p.src_port = p.dst_port = 0;
  }
  return p;
}

// Random stream over a small pool of hosts so flows repeat and collide.
inline std::vector<PacketRecord> random_stream(Rng& rng, std::size_t count, double span_seconds) {
  static constexpr std::uint8_t kProtos[] = {ipproto::tcp, ipproto::udp, ipproto::icmp};
  std::vector<PacketRecord> out;
  const auto span_ns = static_cast<std::int64_t>(span_seconds * 1e9);
  const std::int64_t base = 1'600'000'000'000'000'000;
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t ts = base + rng.between(0, span_ns);
    const auto a = ip(10, 0, 0, static_cast<std::uint8_t>(rng.between(1, 4)));
    const auto b = ip(192, 168, 1, static_cast<std::uint8_t>(rng.between(1, 3)));
    const auto pa = static_cast<std::uint16_t>(rng.between(1000, 1003));
    const auto pb = static_cast<std::uint16_t>(rng.chance(0.5) ? 80 : 53);
    const auto proto = kProtos[rng.index(3)];
    const auto len = static_cast<std::uint32_t>(rng.between(60, 1514));
    if (rng.chance(0.5)) out.push_back(packet(ts, a, pa, b, pb, proto, len));
    else out.push_back(packet(ts, b, pb, a, pa, proto, len));
  }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lucid-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace lucid::test
