#include "lucid/metrics.hpp"

#include <fmt/format.h>

#include "lucid/error.hpp"

namespace lucid {

Confusion confusion(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw ConfigError(fmt::format("confusion: {} predictions for {} labels", predictions.size(),
                                  labels.size()));
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == Label::ddos;
    const bool actual = labels[i] == Label::ddos;
    if (predicted && actual) {
      ++c.tp;
    } else if (!predicted && !actual) {
      ++c.tn;
    } else if (predicted) {
      ++c.fp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> f1_score(double ppv, double tpr) {
  if (ppv + tpr <= 0.0) return std::nullopt;
  return 2.0 * ppv * tpr / (ppv + tpr);
}

MetricsReport metrics(const Confusion& c) {
  if (c.total() == 0) throw ConfigError("metrics: no evaluated samples");
  MetricsReport r;
  r.counts = c;
  r.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  r.fpr = ratio(c.fp, c.fp + c.tn);
  r.ppv = ratio(c.tp, c.tp + c.fp);
  r.tpr = ratio(c.tp, c.tp + c.fn);
  if (r.ppv && r.tpr) r.f1 = f1_score(*r.ppv, *r.tpr);
  return r;
}

std::string format_metric(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("undefined");
}

std::string metrics_csv_row(const ReportRow& row, const MetricsReport& r) {
  return fmt::format("{},{},{},{},{},{},{:.6f},{},{},{},{}", row.dataset, row.n, row.t, row.k,
                     row.h, row.m, r.acc, format_metric(r.fpr), format_metric(r.ppv),
                     format_metric(r.tpr), format_metric(r.f1));
}

}  // namespace lucid
