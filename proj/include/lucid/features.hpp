#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lucid/pcap.hpp"

namespace lucid {

inline constexpr std::size_t kFeatureCount = 11;

// Column order of a sample matrix.
enum class Feature : std::size_t {
  time = 0,
  pkt_len,
  highest_layer,
  ip_flags,
  protocols,
  tcp_len,
  tcp_ack,
  tcp_flags,
  tcp_win,
  udp_len,
  icmp_type,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "time",    "pkt_len", "highest_layer", "ip_flags", "protocols", "tcp_len",
    "tcp_ack", "tcp_flags", "tcp_win",     "udp_len",  "icmp_type"};

// Human-readable column titles used in reports.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureTitles = {
    "Time",     "Pkt Len",   "Highest Layer", "IP Flags", "Protocols", "TCP Len",
    "TCP Ack",  "TCP Flags", "TCP Win Size",  "UDP Len",  "ICMP Type"};

constexpr std::size_t column(Feature f) { return static_cast<std::size_t>(f); }

// Ordered list of protocols recognised by the bag-of-words encoding. Bit i
// of PacketFeatures::protocols corresponds to entry i; highest_layer is the
// 1-based position of the deepest matching layer (0 when none matches).
class ProtocolRegistry {
 public:
  explicit ProtocolRegistry(std::vector<std::string> names);

  static const ProtocolRegistry& standard();

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

struct PacketFeatures {
  double time = 0.0;
  std::uint32_t pkt_len = 0;
  std::uint32_t highest_layer = 0;
  std::uint16_t ip_flags = 0;
  std::uint32_t protocols = 0;
  std::uint32_t tcp_len = 0;
  std::uint32_t tcp_ack = 0;
  std::uint16_t tcp_flags = 0;
  std::uint16_t tcp_win = 0;
  std::uint32_t udp_len = 0;
  std::uint8_t icmp_type = 0;

  std::array<double, kFeatureCount> values() const;
  bool operator==(const PacketFeatures&) const = default;
};

// Extracts the per-packet attributes. `time` is the absolute capture time;
// the windowing stage rewrites it relative to the flow's first packet.
PacketFeatures dissect(const PacketRecord& pkt, const ProtocolRegistry& registry);

}  // namespace lucid
