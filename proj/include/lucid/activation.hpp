#pragma once

#include <array>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lucid/features.hpp"
#include "lucid/model.hpp"

namespace lucid {

struct FeatureScore {
  std::string feature;
  double activation = 0.0;
};

// Descending by activation; ties keep column order.
using FeatureRanking = std::vector<FeatureScore>;

// Per-column kernel activation totals, averaged over flows.
//
// The dense classifier is ignored. For each flow, filter and window
// position whose pre-activation is positive, column c receives
// max(0, sum_r W[r][c] * x[i+r][c]). Totals are summed over positions,
// filters and flows, then divided by the number of flows.
std::array<double, kFeatureCount> column_activations(
    const ModelParams<float>& model, std::span<const std::span<const float>> flows);

// Throws ConfigError on an empty flow set.
FeatureRanking attribute(const ModelParams<float>& model,
                         std::span<const std::span<const float>> flows);

void write_ranking_csv(std::ostream& out, const FeatureRanking& ranking);
// Two feature/value column pairs side by side.
void write_ranking_table(std::ostream& out, const FeatureRanking& ranking);

}  // namespace lucid
