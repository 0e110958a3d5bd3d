#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "lucid/flow.hpp"

namespace lucid {

// 2x2 table with DDoS as the positive class.
struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const Confusion&) const = default;
};

// A ratio with a zero denominator is reported as std::nullopt.
struct MetricsReport {
  Confusion counts;
  double acc = 0.0;
  std::optional<double> fpr;
  std::optional<double> ppv;
  std::optional<double> tpr;
  std::optional<double> f1;
};

Confusion confusion(std::span<const Label> predictions, std::span<const Label> labels);

// Throws ConfigError on an empty table.
MetricsReport metrics(const Confusion& c);

// Harmonic mean of precision and recall; nullopt when both are zero.
std::optional<double> f1_score(double ppv, double tpr);

struct ReportRow {
  std::string dataset;
  std::uint32_t n = 0;
  double t = 0.0;
  std::uint32_t k = 0;
  std::uint32_t h = 0;
  std::uint32_t m = 0;
};

inline constexpr const char* kMetricsCsvHeader = "dataset,n,t,k,h,m,acc,fpr,ppv,tpr,f1";

// One CSV line (no trailing newline); undefined ratios print as "undefined".
std::string metrics_csv_row(const ReportRow& row, const MetricsReport& report);
std::string format_metric(const std::optional<double>& v);

}  // namespace lucid
