#include "lucid/activation.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "lucid/error.hpp"

namespace lucid {

std::array<double, kFeatureCount> column_activations(
    const ModelParams<float>& model, std::span<const std::span<const float>> flows) {
  const Hyper& hp = model.hyper();
  if (hp.f != kFeatureCount) throw ConfigError("attribute: model width must match feature count");
  if (flows.empty()) throw ConfigError("attribute: no DDoS flows to analyse");

  const std::size_t len = hp.conv_len();
  std::array<double, kFeatureCount> totals{};
  for (const auto& x : flows) {
    if (x.size() != static_cast<std::size_t>(hp.n) * hp.f) {
      throw ConfigError("attribute: sample shape does not match the model");
    }
    std::array<double, kFeatureCount> per_flow{};
    for (std::size_t j = 0; j < hp.k; ++j) {
      const auto w = model.filter(j);
      for (std::size_t i = 0; i < len; ++i) {
        if (!(conv_at(model, x, j, i) > 0.0f)) continue;
        const float* rows = x.data() + i * hp.f;
        for (std::size_t c = 0; c < hp.f; ++c) {
          double part = 0.0;
          for (std::size_t r = 0; r < hp.h; ++r) {
            part += static_cast<double>(w[r * hp.f + c]) * static_cast<double>(rows[r * hp.f + c]);
          }
          if (part > 0.0) per_flow[c] += part;
        }
      }
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) totals[c] += per_flow[c];
  }
  for (auto& v : totals) v /= static_cast<double>(flows.size());
  return totals;
}

FeatureRanking attribute(const ModelParams<float>& model,
                         std::span<const std::span<const float>> flows) {
  const auto totals = column_activations(model, flows);
  FeatureRanking ranking;
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    ranking.push_back({std::string(kFeatureTitles[c]), totals[c]});
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const FeatureScore& a, const FeatureScore& b) { return a.activation > b.activation; });
  return ranking;
}

void write_ranking_csv(std::ostream& out, const FeatureRanking& ranking) {
  out << "feature,activation\n";
  for (const auto& s : ranking) out << fmt::format("{},{:.5f}\n", s.feature, s.activation);
}

void write_ranking_table(std::ostream& out, const FeatureRanking& ranking) {
  const std::size_t half = (ranking.size() + 1) / 2;
  out << fmt::format("{:<14} {:>12} | {:<14} {:>12}\n", "Feature", "Activation", "Feature",
                     "Activation");
  out << std::string(14 + 1 + 12 + 3 + 14 + 1 + 12, '-') << '\n';
  for (std::size_t i = 0; i < half; ++i) {
    out << fmt::format("{:<14} {:>12.5f}", ranking[i].feature, ranking[i].activation);
    if (half + i < ranking.size()) {
      const auto& right = ranking[half + i];
      out << fmt::format(" | {:<14} {:>12.5f}", right.feature, right.activation);
    }
    out << '\n';
  }
}

}  // namespace lucid
