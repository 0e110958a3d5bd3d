#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "lucid/pcap.hpp"

namespace lucid {

struct Endpoint {
  std::uint32_t ip = 0;
  std::uint16_t port = 0;
  auto operator<=>(const Endpoint&) const = default;
};

// Bidirectional 5-tuple; the two endpoints are stored in ascending
// (ip, port) order so both directions of a conversation map to one key.
struct FlowKey {
  std::uint8_t proto = 0;
  Endpoint lo;
  Endpoint hi;

  static FlowKey make(std::uint8_t proto, Endpoint a, Endpoint b);
  static FlowKey of(const PacketRecord& pkt);

  std::string to_string() const;
  auto operator<=>(const FlowKey&) const = default;
};

enum class Label : std::uint8_t { benign = 0, ddos = 1 };

// Flow-level ground truth, one label per key.
using LabelSet = std::map<FlowKey, Label>;

// CSV with header `proto,ip_a,port_a,ip_b,port_b,label`. Label accepts 0/1
// or benign/ddos. Endpoints may appear in either order.
LabelSet read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const LabelSet& labels);

}  // namespace lucid
