#include "lucid/pipeline.hpp"

#include "lucid/error.hpp"

namespace lucid {

PreprocessReport preprocess_packets(std::span<const PacketRecord> packets,
                                    const LabelSet* labels, double t, std::size_t n,
                                    const NormalizationSpec* custom_spec) {
  if (n < 1 || n > 65535) throw ConfigError("n must be in [1, 65535]");
  PreprocessReport report;
  const auto spec = custom_spec != nullptr ? *custom_spec : NormalizationSpec::standard(t);
  const auto raw = build_samples(packets, t, n, ProtocolRegistry::standard(), &report.window);
  auto samples = normalize_and_pad(raw, spec, n, &report.normalize);
  if (labels != nullptr) report.unlabeled_dropped = apply_labels(samples, *labels);
  report.dataset.t = t;
  report.dataset.n = static_cast<std::uint32_t>(n);
  report.dataset.spec = spec;
  report.dataset.samples = std::move(samples);
  return report;
}

PreprocessReport preprocess(const PreprocessOptions& options) {
  if (options.pcaps.empty()) throw ConfigError("no input pcap files");
  std::optional<LabelSet> labels;
  if (options.labels) labels = read_labels_csv(*options.labels);

  std::vector<PacketRecord> packets;
  ParseStats total;
  for (const auto& path : options.pcaps) {
    Capture cap = parse_pcap(path);
    total.records += cap.stats.records;
    total.accepted += cap.stats.accepted;
    total.skipped += cap.stats.skipped;
    total.ipv6 += cap.stats.ipv6;
    total.truncated += cap.stats.truncated;
    packets.insert(packets.end(), std::make_move_iterator(cap.packets.begin()),
                   std::make_move_iterator(cap.packets.end()));
  }
  auto report = preprocess_packets(packets, labels ? &*labels : nullptr, options.t, options.n);
  report.parse = total;
  return report;
}

}  // namespace lucid
