#include "lucid/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "lucid/error.hpp"
#include "lucid/random.hpp"

namespace lucid {

NormalizationSpec NormalizationSpec::standard(double window_seconds,
                                              const ProtocolRegistry& registry) {
  if (!(window_seconds > 0.0) || !std::isfinite(window_seconds)) {
    throw ConfigError("time window must be a positive number of seconds");
  }
  NormalizationSpec spec;
  auto& d = spec.divisors;
  d[column(Feature::time)] = window_seconds;
  d[column(Feature::pkt_len)] = 65535.0;
  d[column(Feature::highest_layer)] = static_cast<double>(registry.size());
  d[column(Feature::ip_flags)] = 65535.0;
  d[column(Feature::protocols)] = std::ldexp(1.0, static_cast<int>(registry.size())) - 1.0;
  d[column(Feature::tcp_len)] = 65535.0;
  d[column(Feature::tcp_ack)] = 4294967295.0;
  d[column(Feature::tcp_flags)] = 511.0;
  d[column(Feature::tcp_win)] = 65535.0;
  d[column(Feature::udp_len)] = 65535.0;
  d[column(Feature::icmp_type)] = 255.0;
  return spec;
}

RawSampleMap build_samples(std::span<const PacketRecord> packets, double t, std::size_t n,
                           const ProtocolRegistry& registry, WindowStats* stats) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("time window must be > 0");
  if (n == 0) throw ConfigError("packets per sample must be >= 1");

  std::vector<std::size_t> order(packets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return packets[a].ts_ns < packets[b].ts_ns;
  });

  const auto window_ns = static_cast<std::int64_t>(std::llround(t * 1e9));
  WindowStats local;
  RawSampleMap samples;
  std::optional<std::int64_t> window_start;

  for (std::size_t idx : order) {
    const PacketRecord& pkt = packets[idx];
    if (!window_start || pkt.ts_ns > *window_start + window_ns) {
      window_start = pkt.ts_ns;
      ++local.windows;
    }
    const FlowKey key = FlowKey::of(pkt);
    auto [it, fresh] = samples.try_emplace(SampleId{*window_start, key});
    RawSample& sample = it->second;
    if (fresh) {
      sample.key = key;
      sample.window_start_ns = *window_start;
    }
    if (sample.packets.size() >= n) {
      ++local.packets_truncated;
      continue;
    }
    PacketFeatures features = dissect(pkt, registry);
    if (sample.packets.empty()) sample.first_ts_ns = pkt.ts_ns;
    features.time = static_cast<double>(pkt.ts_ns - sample.first_ts_ns) * 1e-9;
    sample.packets.push_back(features);
    ++local.packets_kept;
  }

  if (stats != nullptr) *stats = local;
  return samples;
}

std::vector<FlowSample> normalize_and_pad(const RawSampleMap& samples,
                                          const NormalizationSpec& spec, std::size_t n,
                                          NormalizeStats* stats) {
  if (n == 0 || n > 65535) throw ConfigError("packets per sample must be in [1, 65535]");
  for (double d : spec.divisors) {
    if (!(d > 0.0)) throw ConfigError("normalisation divisors must be positive");
  }

  NormalizeStats local;
  std::vector<FlowSample> out;
  out.reserve(samples.size());
  for (const auto& [id, raw] : samples) {
    if (raw.packets.empty()) continue;
    FlowSample s;
    s.key = raw.key;
    s.window_start = static_cast<double>(raw.window_start_ns) * 1e-9;
    const std::size_t used = std::min(raw.packets.size(), n);
    s.pkt_count = static_cast<std::uint16_t>(used);
    s.matrix.assign(n * kFeatureCount, 0.0f);
    for (std::size_t r = 0; r < used; ++r) {
      const auto values = raw.packets[r].values();
      for (std::size_t c = 0; c < kFeatureCount; ++c) {
        double v = values[c] / spec.divisors[c];
        if (v > 1.0) {
          ++local.clamped;
          v = 1.0;
        } else if (!(v >= 0.0)) {
          ++local.clamped;
          v = 0.0;
        }
        s.matrix[r * kFeatureCount + c] = static_cast<float>(v);
      }
    }
    out.push_back(std::move(s));
  }
  if (stats != nullptr) *stats = local;
  return out;
}

std::size_t apply_labels(std::vector<FlowSample>& samples, const LabelSet& labels) {
  std::size_t dropped = 0;
  std::erase_if(samples, [&](FlowSample& s) {
    auto it = labels.find(s.key);
    if (it == labels.end()) {
      ++dropped;
      return true;
    }
    s.label = it->second;
    return false;
  });
  return dropped;
}

namespace {

std::vector<FlowKey> distinct_keys(std::span<const FlowSample> samples) {
  std::set<FlowKey> keys;
  for (const auto& s : samples) keys.insert(s.key);
  return {keys.begin(), keys.end()};
}

}  // namespace

SplitResult split_dataset(std::span<const FlowSample> samples, std::array<double, 3> ratios,
                          std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  auto keys = distinct_keys(samples);
  if (keys.size() < 3) {
    throw ConfigError(fmt::format("cannot split {} flow(s); need at least 3", keys.size()));
  }
  Rng rng(seed);
  rng.shuffle(std::span<FlowKey>(keys));

  const auto total = static_cast<double>(keys.size());
  const auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * total));
  const auto n_val =
      std::min(keys.size() - n_train, static_cast<std::size_t>(std::llround(ratios[1] * total)));

  std::map<FlowKey, int> part;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    part[keys[i]] = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
  }
  SplitResult out;
  for (const auto& s : samples) {
    switch (part[s.key]) {
      case 0:
        out.train.push_back(s);
        break;
      case 1:
        out.val.push_back(s);
        break;
      default:
        out.test.push_back(s);
        break;
    }
  }
  return out;
}

std::vector<FlowSample> balance(std::span<const FlowSample> samples, std::uint64_t seed) {
  std::map<FlowKey, Label> flows;
  for (const auto& s : samples) {
    if (!s.label) throw ConfigError("cannot balance unlabeled samples");
    flows.emplace(s.key, *s.label);
  }
  std::vector<FlowKey> benign, ddos;
  for (const auto& [key, label] : flows) {
    (label == Label::ddos ? ddos : benign).push_back(key);
  }
  if (benign.empty() || ddos.empty()) {
    throw ConfigError("balancing needs both benign and ddos flows");
  }
  auto& majority = benign.size() > ddos.size() ? benign : ddos;
  const std::size_t keep = std::min(benign.size(), ddos.size());

  Rng rng(seed);
  rng.shuffle(std::span<FlowKey>(majority));
  majority.resize(keep);

  std::set<FlowKey> kept(benign.begin(), benign.end());
  kept.insert(ddos.begin(), ddos.end());
  std::vector<FlowSample> out;
  for (const auto& s : samples) {
    if (kept.contains(s.key)) out.push_back(s);
  }
  return out;
}

ClassCounts count_samples(std::span<const FlowSample> samples) {
  ClassCounts c;
  for (const auto& s : samples) {
    if (!s.label) {
      ++c.unlabeled;
    } else if (*s.label == Label::ddos) {
      ++c.ddos;
    } else {
      ++c.benign;
    }
  }
  return c;
}

ClassCounts count_flows(std::span<const FlowSample> samples) {
  std::map<FlowKey, std::optional<Label>> flows;
  for (const auto& s : samples) flows.emplace(s.key, s.label);
  ClassCounts c;
  for (const auto& [key, label] : flows) {
    if (!label) {
      ++c.unlabeled;
    } else if (*label == Label::ddos) {
      ++c.ddos;
    } else {
      ++c.benign;
    }
  }
  return c;
}

}  // namespace lucid
