#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lucid/features.hpp"
#include "lucid/flow.hpp"
#include "lucid/pcap.hpp"

namespace lucid {

// Fixed per-feature divisors. Normalisation is stateless: a value is
// divided by its divisor and clamped to [0, 1].
struct NormalizationSpec {
  std::array<double, kFeatureCount> divisors{};

  static NormalizationSpec standard(double window_seconds,
                                    const ProtocolRegistry& registry = ProtocolRegistry::standard());
  double window() const { return divisors[column(Feature::time)]; }
  bool operator==(const NormalizationSpec&) const = default;
};

// Packets of one flow inside one time window, before normalisation. `time`
// of each entry is relative to the first packet of the flow in the window.
struct RawSample {
  FlowKey key;
  std::int64_t window_start_ns = 0;
  std::int64_t first_ts_ns = 0;
  std::vector<PacketFeatures> packets;
};

using SampleId = std::pair<std::int64_t, FlowKey>;  // (window start ns, flow)
using RawSampleMap = std::map<SampleId, RawSample>;

struct FlowSample {
  FlowKey key;
  double window_start = 0.0;
  std::uint16_t pkt_count = 0;
  std::vector<float> matrix;  // n x kFeatureCount, row-major
  std::optional<Label> label;

  std::size_t rows() const { return matrix.size() / kFeatureCount; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(matrix).subspan(i * kFeatureCount, kFeatureCount);
  }
  float at(std::size_t r, Feature f) const { return matrix[r * kFeatureCount + column(f)]; }
};

struct WindowStats {
  std::size_t windows = 0;
  std::size_t packets_kept = 0;
  std::size_t packets_truncated = 0;  // dropped by the n-packet cap
};

// Groups packets into per-window, per-flow samples. The window start is a
// single scalar shared by all flows: it is set by the first packet and
// moved to a packet's timestamp whenever that packet falls after
// start + t. Packets are ordered by timestamp (ties keep input order) and
// at most n are kept per sample.
RawSampleMap build_samples(std::span<const PacketRecord> packets, double t, std::size_t n,
                           const ProtocolRegistry& registry = ProtocolRegistry::standard(),
                           WindowStats* stats = nullptr);

struct NormalizeStats {
  std::size_t clamped = 0;  // values above their divisor
};

std::vector<FlowSample> normalize_and_pad(const RawSampleMap& samples,
                                          const NormalizationSpec& spec, std::size_t n,
                                          NormalizeStats* stats = nullptr);

// Labels samples by flow key. Samples whose key is missing are removed;
// returns how many were dropped.
std::size_t apply_labels(std::vector<FlowSample>& samples, const LabelSet& labels);

struct SplitResult {
  std::vector<FlowSample> train;
  std::vector<FlowSample> val;
  std::vector<FlowSample> test;
};

// Splits at flow granularity so every sample of a flow lands in the same
// part. Throws ConfigError with fewer than 3 flows or ratios not summing to 1.
SplitResult split_dataset(std::span<const FlowSample> samples, std::array<double, 3> ratios,
                          std::uint64_t seed);

// Randomly down-samples the majority class (by flow) to the minority
// class's flow count. Throws ConfigError if a class is absent.
std::vector<FlowSample> balance(std::span<const FlowSample> samples, std::uint64_t seed);

struct ClassCounts {
  std::size_t benign = 0;
  std::size_t ddos = 0;
  std::size_t unlabeled = 0;
};
ClassCounts count_samples(std::span<const FlowSample> samples);
ClassCounts count_flows(std::span<const FlowSample> samples);

}  // namespace lucid
