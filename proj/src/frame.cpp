#include "lucid/frame.hpp"

#include "lucid/pcap.hpp"

namespace lucid {
namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  put16(b, static_cast<std::uint16_t>(v >> 16));
  put16(b, static_cast<std::uint16_t>(v));
}

void set16(std::vector<std::uint8_t>& b, std::size_t at, std::uint16_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 8);
  b[at + 1] = static_cast<std::uint8_t>(v);
}

std::uint32_t partial_sum(const std::uint8_t* data, std::size_t len, std::uint32_t sum) {
  for (std::size_t i = 0; i + 1 < len; i += 2) sum += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
  if (len % 2 == 1) sum += static_cast<std::uint32_t>(data[len - 1] << 8);
  return sum;
}

}  // namespace

std::uint16_t internet_checksum(const std::uint8_t* data, std::size_t len, std::uint32_t initial) {
  std::uint32_t sum = partial_sum(data, len, initial);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

std::vector<std::uint8_t> encode_frame(const FrameSpec& s) {
  std::vector<std::uint8_t> l4;
  switch (s.proto) {
    case ipproto::tcp:
      put16(l4, s.src_port);
      put16(l4, s.dst_port);
      put32(l4, s.tcp_seq);
      put32(l4, s.tcp_ack);
      l4.push_back(static_cast<std::uint8_t>((5 << 4) | ((s.tcp_flags >> 8) & 0x01)));
      l4.push_back(static_cast<std::uint8_t>(s.tcp_flags));
      put16(l4, s.tcp_win);
      put16(l4, 0);  // checksum
      put16(l4, 0);  // urgent pointer
      break;
    case ipproto::udp:
      put16(l4, s.src_port);
      put16(l4, s.dst_port);
      put16(l4, static_cast<std::uint16_t>(8 + s.payload.size()));
      put16(l4, 0);
      break;
    case ipproto::icmp:
      l4.push_back(s.icmp_type);
      l4.push_back(s.icmp_code);
      put16(l4, 0);
      put16(l4, s.icmp_id);
      put16(l4, s.icmp_seq);
      break;
    default:
      break;
  }
  l4.insert(l4.end(), s.payload.begin(), s.payload.end());

  if (s.proto == ipproto::tcp || s.proto == ipproto::udp) {
    std::uint32_t pseudo = 0;
    pseudo += s.src_ip >> 16;
    pseudo += s.src_ip & 0xffff;
    pseudo += s.dst_ip >> 16;
    pseudo += s.dst_ip & 0xffff;
    pseudo += s.proto;
    pseudo += static_cast<std::uint32_t>(l4.size());
    std::uint16_t sum = internet_checksum(l4.data(), l4.size(), pseudo);
    if (s.proto == ipproto::udp && sum == 0) sum = 0xffff;
    set16(l4, s.proto == ipproto::tcp ? 16 : 6, sum);
  } else if (s.proto == ipproto::icmp) {
    set16(l4, 2, internet_checksum(l4.data(), l4.size()));
  }

  std::vector<std::uint8_t> frame;
  frame.reserve(14 + 20 + l4.size());
  frame.insert(frame.end(), s.dst_mac.begin(), s.dst_mac.end());
  frame.insert(frame.end(), s.src_mac.begin(), s.src_mac.end());
  put16(frame, 0x0800);

  const std::size_t ip_at = frame.size();
  frame.push_back(0x45);
  frame.push_back(0);
  put16(frame, static_cast<std::uint16_t>(20 + l4.size()));
  put16(frame, s.ip_id);
  put16(frame, s.ip_flags);
  frame.push_back(s.ttl);
  frame.push_back(s.proto);
  put16(frame, 0);
  put32(frame, s.src_ip);
  put32(frame, s.dst_ip);
  set16(frame, ip_at + 10, internet_checksum(frame.data() + ip_at, 20));

  frame.insert(frame.end(), l4.begin(), l4.end());
  return frame;
}

}  // namespace lucid
