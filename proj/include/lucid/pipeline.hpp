#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "lucid/dataset.hpp"
#include "lucid/flow.hpp"
#include "lucid/pcap.hpp"
#include "lucid/preprocess.hpp"

namespace lucid {

struct PreprocessOptions {
  std::vector<std::filesystem::path> pcaps;
  std::optional<std::filesystem::path> labels;
  double t = 100.0;
  std::size_t n = 100;
};

struct PreprocessReport {
  ParseStats parse;  // summed over input files
  WindowStats window;
  NormalizeStats normalize;
  std::size_t unlabeled_dropped = 0;
  Dataset dataset;
};

// pcap files -> windowed samples -> normalised -> labelled. Packets from
// all files form one time-ordered stream.
PreprocessReport preprocess(const PreprocessOptions& options);

// Same as preprocess() but starting from already decoded packets. When
// `spec` is null the standard divisors for window t are used.
PreprocessReport preprocess_packets(std::span<const PacketRecord> packets,
                                    const LabelSet* labels, double t, std::size_t n,
                                    const NormalizationSpec* spec = nullptr);

}  // namespace lucid
