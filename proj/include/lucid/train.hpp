#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lucid/metrics.hpp"
#include "lucid/model.hpp"
#include "lucid/preprocess.hpp"

namespace lucid {

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 2048;
  std::size_t patience = 25;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::optional<double> val_f1;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  double initial_train_loss = 0.0;  // before the first update
  double initial_val_loss = 0.0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;       // 1-based, minimum validation loss
  bool early_stopped = false;

  bool operator==(const TrainHistory&) const = default;
};

template <typename T>
struct TrainResult {
  ModelParams<T> model;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on the mean cross-entropy. Training data is reshuffled
// every epoch (the last partial batch is kept). Stops after `patience`
// epochs without a strictly lower validation loss, or at max_epochs, and
// returns the parameters of the best epoch. Throws TrainingError if the
// loss becomes non-finite.
template <typename T>
TrainResult<T> train(const Hyper& hyper, std::span<const FlowSample> train_set,
                     std::span<const FlowSample> val_set, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

// Same, starting from the given parameters instead of a fresh init.
template <typename T>
TrainResult<T> train_from(ModelParams<T> model, std::span<const FlowSample> train_set,
                          std::span<const FlowSample> val_set, const TrainConfig& config,
                          const EpochCallback& on_epoch = {});

template <typename T>
std::vector<double> predict(const ModelParams<T>& model, std::span<const FlowSample> samples);

// Mean cross-entropy of the model over labelled samples.
template <typename T>
double dataset_loss(const ModelParams<T>& model, std::span<const FlowSample> samples);

std::vector<Label> labels_of(std::span<const FlowSample> samples);
std::vector<Label> verdicts(std::span<const double> probabilities);

template <typename T>
MetricsReport evaluate(const ModelParams<T>& model, std::span<const FlowSample> samples) {
  const auto p = predict(model, samples);
  const auto predicted = verdicts(p);
  const auto actual = labels_of(samples);
  return metrics(confusion(predicted, actual));
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace lucid
