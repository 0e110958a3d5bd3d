#include "lucid/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace lucid {

ProtocolRegistry::ProtocolRegistry(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty() || names_.size() > 32) {
    throw std::invalid_argument("protocol registry must hold 1..32 entries");
  }
}

const ProtocolRegistry& ProtocolRegistry::standard() {
  static const ProtocolRegistry registry({"arp", "ip", "icmp", "tcp", "udp", "dns", "http", "tls",
                                          "ftp", "ssh", "smtp", "telnet", "irc"});
  return registry;
}

std::optional<std::size_t> ProtocolRegistry::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::array<double, kFeatureCount> PacketFeatures::values() const {
  return {time,
          static_cast<double>(pkt_len),
          static_cast<double>(highest_layer),
          static_cast<double>(ip_flags),
          static_cast<double>(protocols),
          static_cast<double>(tcp_len),
          static_cast<double>(tcp_ack),
          static_cast<double>(tcp_flags),
          static_cast<double>(tcp_win),
          static_cast<double>(udp_len),
          static_cast<double>(icmp_type)};
}

PacketFeatures dissect(const PacketRecord& pkt, const ProtocolRegistry& registry) {
  PacketFeatures out;
  out.time = pkt.ts();
  out.pkt_len = pkt.wire_len;

  for (const auto& layer : pkt.layers) {
    if (auto idx = registry.index_of(layer)) {
      out.protocols |= 1u << *idx;
      out.highest_layer = static_cast<std::uint32_t>(*idx + 1);
    }
  }

  if (pkt.has_layer("ip")) out.ip_flags = pkt.ip_flags;
  if (pkt.has_layer("tcp")) {
    out.tcp_len = pkt.tcp_len;
    out.tcp_ack = pkt.tcp_ack;
    out.tcp_flags = pkt.tcp_flags & 0x1ff;
    out.tcp_win = pkt.tcp_win;
  } else if (pkt.has_layer("udp")) {
    out.udp_len = pkt.udp_len;
  } else if (pkt.has_layer("icmp")) {
    out.icmp_type = pkt.icmp_type;
  }
  return out;
}

}  // namespace lucid
