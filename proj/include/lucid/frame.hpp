#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace lucid {

// Fields for building an Ethernet/IPv4 frame. Checksums are computed.
struct FrameSpec {
  std::array<std::uint8_t, 6> src_mac{0x02, 0, 0, 0, 0, 1};
  std::array<std::uint8_t, 6> dst_mac{0x02, 0, 0, 0, 0, 2};
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint8_t proto = 6;
  std::uint16_t ip_id = 0;
  std::uint16_t ip_flags = 0x4000;  // flags + fragment offset
  std::uint8_t ttl = 64;

  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t tcp_seq = 0;
  std::uint32_t tcp_ack = 0;
  std::uint16_t tcp_flags = 0;  // 9 bits
  std::uint16_t tcp_win = 0;

  std::uint8_t icmp_type = 8;
  std::uint8_t icmp_code = 0;
  std::uint16_t icmp_id = 0;
  std::uint16_t icmp_seq = 0;

  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const FrameSpec& spec);

// RFC 1071 ones'-complement sum over `data`, folded and inverted.
std::uint16_t internet_checksum(const std::uint8_t* data, std::size_t len, std::uint32_t initial = 0);

}  // namespace lucid
