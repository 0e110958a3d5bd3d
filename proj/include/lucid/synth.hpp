#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lucid/flow.hpp"

namespace lucid {

// Repetition-style attack flows: one source, constant rate, constant
// headers and sizes. Rates are packets per second.
struct DdosProfile {
  double min_rate = 50.0;
  double max_rate = 500.0;
  std::size_t min_packets = 20;
  std::size_t max_packets = 60;
};

// Bidirectional request/response sessions over several application
// protocols with randomised sizes, windows and timing. All gaps between
// consecutive packets of a session are at least min_gap seconds.
struct BenignProfile {
  double min_gap = 0.030;
  double max_rtt = 0.150;
  double mean_think = 1.0;
  std::size_t min_exchanges = 2;
  std::size_t max_exchanges = 10;
  double df_probability = 0.92;  // share of flows with Don't Fragment set
};

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t ddos_flows = 100;
  std::size_t benign_flows = 100;
  double duration = 120.0;  // seconds over which flows start
  std::int64_t epoch_ns = 1'577'836'800'000'000'000;
  DdosProfile ddos;
  BenignProfile benign;

  void validate() const;
};

struct SynthPacket {
  std::int64_t ts_ns = 0;
  std::vector<std::uint8_t> frame;
};

struct SynthTrace {
  std::vector<SynthPacket> packets;  // sorted by time, ties in generation order
  LabelSet labels;
};

SynthTrace synthesize(const SynthConfig& config);

struct SynthFiles {
  std::filesystem::path pcap;
  std::filesystem::path labels;
  std::size_t packets = 0;
  std::size_t flows = 0;
};

// Writes <prefix>.pcap (microsecond classic pcap) and <prefix>-labels.csv.
SynthFiles generate(const SynthConfig& config, const std::filesystem::path& out_prefix);

}  // namespace lucid
