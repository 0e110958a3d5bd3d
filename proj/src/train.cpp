#include "lucid/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace lucid {

void TrainConfig::validate() const {
  if (!(adam.alpha > 0.0)) throw ConfigError("train: learning rate must be > 0");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max epochs must be >= 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("train: Adam betas must be in [0, 1)");
  }
}

std::vector<Label> labels_of(std::span<const FlowSample> samples) {
  std::vector<Label> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.label) throw ConfigError("evaluation requires labelled samples");
    out.push_back(*s.label);
  }
  return out;
}

std::vector<Label> verdicts(std::span<const double> probabilities) {
  std::vector<Label> out;
  out.reserve(probabilities.size());
  for (double p : probabilities) out.push_back(classify(p));
  return out;
}

template <typename T>
std::vector<double> predict(const ModelParams<T>& model, std::span<const FlowSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(static_cast<double>(forward(model, std::span<const float>(s.matrix))));
  }
  return out;
}

template <typename T>
double dataset_loss(const ModelParams<T>& model, std::span<const FlowSample> samples) {
  if (samples.empty()) throw ConfigError("loss over an empty sample set");
  double sum = 0.0;
  for (const auto& s : samples) {
    if (!s.label) throw ConfigError("loss requires labelled samples");
    const double p = static_cast<double>(forward(model, std::span<const float>(s.matrix)));
    sum += bce_term(p, static_cast<double>(*s.label));
  }
  return sum / static_cast<double>(samples.size());
}

namespace {

std::vector<Example<float>> examples_of(std::span<const FlowSample> samples, const Hyper& hp,
                                        const char* what) {
  if (samples.empty()) throw ConfigError(fmt::format("train: {} set is empty", what));
  std::vector<Example<float>> out;
  out.reserve(samples.size());
  const std::size_t cells = static_cast<std::size_t>(hp.n) * hp.f;
  for (const auto& s : samples) {
    if (!s.label) throw ConfigError(fmt::format("train: {} set has unlabeled samples", what));
    if (s.matrix.size() != cells) {
      throw ConfigError(fmt::format("train: {} sample shape does not match n={}", what, hp.n));
    }
    out.push_back({std::span<const float>(s.matrix), static_cast<double>(*s.label)});
  }
  return out;
}

void check_finite(double loss, std::size_t epoch, const char* what) {
  if (!std::isfinite(loss)) {
    throw TrainingError(fmt::format("train: {} loss became {} at epoch {}", what, loss, epoch));
  }
}

constexpr std::uint64_t kShuffleStream = 0x5851f42d4c957f2dULL;

}  // namespace

template <typename T>
TrainResult<T> train_from(ModelParams<T> model, std::span<const FlowSample> train_set,
                          std::span<const FlowSample> val_set, const TrainConfig& config,
                          const EpochCallback& on_epoch) {
  config.validate();
  const Hyper& hp = model.hyper();
  const auto train_examples = examples_of(train_set, hp, "training");
  const auto val_labels = labels_of(val_set);
  examples_of(val_set, hp, "validation");

  TrainResult<T> result;
  result.history.initial_train_loss = dataset_loss(model, train_set);
  result.history.initial_val_loss = dataset_loss(model, val_set);
  check_finite(result.history.initial_train_loss, 0, "training");

  Rng rng(config.seed ^ kShuffleStream);
  std::vector<std::size_t> order(train_examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  AdamState<T> adam;
  ModelParams<T> grad(hp);
  std::vector<ForwardCache<T>> caches;
  std::vector<Example<float>> batch;
  batch.reserve(config.batch_size);

  ModelParams<T> best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_examples[order[i]]);
      const double loss = loss_and_gradient(model, std::span<const Example<float>>(batch), grad, caches);
      check_finite(loss, epoch, "training");
      loss_sum += loss * static_cast<double>(batch.size());
      adam_step(model, grad, adam, config.adam);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    const auto val_p = predict(model, val_set);
    double val_sum = 0.0;
    for (std::size_t i = 0; i < val_p.size(); ++i) {
      val_sum += bce_term(val_p[i], static_cast<double>(val_labels[i]));
    }
    record.val_loss = val_sum / static_cast<double>(val_p.size());
    check_finite(record.val_loss, epoch, "validation");
    record.val_f1 = metrics(confusion(verdicts(val_p), val_labels)).f1;
    result.history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.val_loss < best_loss) {
      best_loss = record.val_loss;
      best = model;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.history.early_stopped = true;
      break;
    }
  }
  result.model = std::move(best);
  return result;
}

template <typename T>
TrainResult<T> train(const Hyper& hyper, std::span<const FlowSample> train_set,
                     std::span<const FlowSample> val_set, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  return train_from(init_model<T>(hyper, config.seed), train_set, val_set, config, on_epoch);
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << "epoch,train_loss,val_loss,val_f1,best\n";
  out << fmt::format("0,{:.9g},{:.9g},,0\n", history.initial_train_loss, history.initial_val_loss);
  for (const auto& e : history.epochs) {
    out << fmt::format("{},{:.9g},{:.9g},{},{}\n", e.epoch, e.train_loss, e.val_loss,
                       format_metric(e.val_f1), e.epoch == history.best_epoch ? 1 : 0);
  }
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

template TrainResult<float> train_from(ModelParams<float>, std::span<const FlowSample>,
                                       std::span<const FlowSample>, const TrainConfig&,
                                       const EpochCallback&);
template TrainResult<double> train_from(ModelParams<double>, std::span<const FlowSample>,
                                        std::span<const FlowSample>, const TrainConfig&,
                                        const EpochCallback&);
template TrainResult<float> train(const Hyper&, std::span<const FlowSample>,
                                  std::span<const FlowSample>, const TrainConfig&,
                                  const EpochCallback&);
template TrainResult<double> train(const Hyper&, std::span<const FlowSample>,
                                   std::span<const FlowSample>, const TrainConfig&,
                                   const EpochCallback&);
template std::vector<double> predict(const ModelParams<float>&, std::span<const FlowSample>);
template std::vector<double> predict(const ModelParams<double>&, std::span<const FlowSample>);
template double dataset_loss(const ModelParams<float>&, std::span<const FlowSample>);
template double dataset_loss(const ModelParams<double>&, std::span<const FlowSample>);

}  // namespace lucid
