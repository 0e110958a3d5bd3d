#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "lucid/error.hpp"
#include "lucid/flow.hpp"
#include "lucid/random.hpp"

namespace lucid {

// Shape of the network: input n x f, k filters of height h spanning all f
// columns, max pooling of size m along the packet axis, one sigmoid unit.
struct Hyper {
  std::uint32_t n = 100;
  std::uint32_t f = 11;
  std::uint32_t h = 3;
  std::uint32_t k = 64;
  std::uint32_t m = 98;

  // m = n - h + 1, one pooled value per filter.
  static Hyper global_pool(std::uint32_t n, std::uint32_t f, std::uint32_t h, std::uint32_t k);

  std::size_t conv_len() const { return n - h + 1; }
  std::size_t pooled_len() const { return conv_len() / m; }
  std::size_t dense_inputs() const { return static_cast<std::size_t>(k) * pooled_len(); }
  std::size_t filter_size() const { return static_cast<std::size_t>(h) * f; }

  std::size_t conv_param_count() const { return static_cast<std::size_t>(k) * (filter_size() + 1); }
  std::size_t dense_param_count() const { return dense_inputs() + 1; }
  std::size_t param_count() const { return conv_param_count() + dense_param_count(); }

  // Throws ConfigError unless 1 <= h <= n, k >= 1, f >= 1, 1 <= m <= n-h+1.
  void validate() const;
  bool operator==(const Hyper&) const = default;
};

// All trainable values in one buffer laid out as
//   conv_w [k][h][f] | conv_b [k] | dense_w [pooled][k] | dense_b.
template <typename T>
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const Hyper& hyper) : hyper_(hyper) {
    hyper_.validate();
    values_.assign(hyper_.param_count(), T{0});
  }

  const Hyper& hyper() const { return hyper_; }
  std::size_t size() const { return values_.size(); }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  std::span<T> conv_w() { return values().subspan(0, conv_w_size()); }
  std::span<const T> conv_w() const { return values().subspan(0, conv_w_size()); }
  std::span<T> conv_b() { return values().subspan(conv_w_size(), hyper_.k); }
  std::span<const T> conv_b() const { return values().subspan(conv_w_size(), hyper_.k); }
  std::span<T> dense_w() { return values().subspan(hyper_.conv_param_count(), hyper_.dense_inputs()); }
  std::span<const T> dense_w() const {
    return values().subspan(hyper_.conv_param_count(), hyper_.dense_inputs());
  }
  T& dense_b() { return values_.back(); }
  T dense_b() const { return values_.back(); }

  // Weights of filter j as a contiguous h*f block.
  std::span<const T> filter(std::size_t j) const {
    return conv_w().subspan(j * hyper_.filter_size(), hyper_.filter_size());
  }

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out(hyper_);
    std::transform(values_.begin(), values_.end(), out.values().begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  bool operator==(const ModelParams&) const = default;

 private:
  std::size_t conv_w_size() const { return static_cast<std::size_t>(hyper_.k) * hyper_.filter_size(); }

  Hyper hyper_;
  std::vector<T> values_;
};

// Glorot-uniform weights, zero biases. Conv fans follow the usual 2-D
// convolution convention: fan_in = h*f, fan_out = h*f*k.
template <typename T>
ModelParams<T> init_model(const Hyper& hyper, std::uint64_t seed) {
  ModelParams<T> model(hyper);
  Rng rng(seed);
  const double conv_fan_in = static_cast<double>(hyper.filter_size());
  const double conv_fan_out = conv_fan_in * hyper.k;
  const double conv_limit = std::sqrt(6.0 / (conv_fan_in + conv_fan_out));
  for (auto& w : model.conv_w()) w = static_cast<T>(rng.uniform(-conv_limit, conv_limit));
  const double dense_limit = std::sqrt(6.0 / (static_cast<double>(hyper.dense_inputs()) + 1.0));
  for (auto& w : model.dense_w()) w = static_cast<T>(rng.uniform(-dense_limit, dense_limit));
  return model;
}

// Intermediates of one forward pass, kept for backpropagation.
template <typename T>
struct ForwardCache {
  std::vector<T> pre;                 // [k][conv_len] pre-activation
  std::vector<T> pooled;              // [pooled_len][k]
  std::vector<std::uint32_t> argmax;  // conv position feeding each pooled value
  T logit{};
  T prob{};
};

template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

// Pre-activation of filter j at window position i.
template <typename T, typename In>
T conv_at(const ModelParams<T>& model, std::span<const In> x, std::size_t j, std::size_t i) {
  const auto w = model.filter(j);
  const In* row = x.data() + i * model.hyper().f;
  T acc = model.conv_b()[j];
  for (std::size_t q = 0; q < w.size(); ++q) acc += w[q] * static_cast<T>(row[q]);
  return acc;
}

// Probability that sample x (n*f values, row-major) is DDoS.
template <typename T, typename In>
T forward(const ModelParams<T>& model, std::span<const In> x, ForwardCache<T>* cache = nullptr) {
  const Hyper& hp = model.hyper();
  if (x.size() != static_cast<std::size_t>(hp.n) * hp.f) {
    throw ConfigError("forward: input shape does not match the model");
  }
  const std::size_t len = hp.conv_len();
  const std::size_t pooled = hp.pooled_len();
  const auto dense_w = model.dense_w();

  if (cache != nullptr) {
    cache->pre.resize(static_cast<std::size_t>(hp.k) * len);
    cache->pooled.resize(hp.dense_inputs());
    cache->argmax.resize(hp.dense_inputs());
  }
  T logit = model.dense_b();
  std::vector<T> act(len);
  for (std::size_t j = 0; j < hp.k; ++j) {
    for (std::size_t i = 0; i < len; ++i) {
      const T pre = conv_at(model, x, j, i);
      if (cache != nullptr) cache->pre[j * len + i] = pre;
      act[i] = pre > T{0} ? pre : T{0};
    }
    for (std::size_t p = 0; p < pooled; ++p) {
      std::size_t best = p * hp.m;
      for (std::size_t i = best + 1; i < (p + 1) * hp.m; ++i) {
        if (act[i] > act[best]) best = i;
      }
      const std::size_t slot = p * hp.k + j;
      logit += dense_w[slot] * act[best];
      if (cache != nullptr) {
        cache->pooled[slot] = act[best];
        cache->argmax[slot] = static_cast<std::uint32_t>(best);
      }
    }
  }
  const T prob = sigmoid(logit);
  if (cache != nullptr) {
    cache->logit = logit;
    cache->prob = prob;
  }
  return prob;
}

// DDoS iff p > 0.5.
Label classify(double p);

// Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double bce_loss(std::span<const double> p, std::span<const double> y);
double bce_term(double p, double y);

template <typename In>
struct Example {
  std::span<const In> x;
  double y = 0.0;
};

// Adds d(loss)/d(params) for one sample to `grad`, given d(loss)/d(logit).
template <typename T, typename In>
void accumulate_gradient(const ModelParams<T>& model, std::span<const In> x,
                         const ForwardCache<T>& cache, T dlogit, ModelParams<T>& grad) {
  const Hyper& hp = model.hyper();
  const std::size_t len = hp.conv_len();
  const std::size_t fs = hp.filter_size();
  const auto dense_w = model.dense_w();
  auto g_dense_w = grad.dense_w();
  auto g_conv_w = grad.conv_w();
  auto g_conv_b = grad.conv_b();

  grad.dense_b() += dlogit;
  for (std::size_t slot = 0; slot < hp.dense_inputs(); ++slot) {
    g_dense_w[slot] += dlogit * cache.pooled[slot];
    const std::size_t j = slot % hp.k;
    const std::size_t i = cache.argmax[slot];
    // ReLU passes gradient only where the pre-activation was positive.
    if (!(cache.pre[j * len + i] > T{0})) continue;
    const T dpre = dlogit * dense_w[slot];
    g_conv_b[j] += dpre;
    const In* row = x.data() + i * hp.f;
    T* gw = g_conv_w.data() + j * fs;
    for (std::size_t q = 0; q < fs; ++q) gw[q] += dpre * static_cast<T>(row[q]);
  }
}

// Gradient of the mean loss over the batch, written into `grad` (which is
// reset first). `caches` must come from forward passes over the same batch.
template <typename T, typename In>
void backward(const ModelParams<T>& model, std::span<const Example<In>> batch,
              std::span<const ForwardCache<T>> caches, ModelParams<T>& grad) {
  if (grad.hyper() != model.hyper()) grad = ModelParams<T>(model.hyper());
  std::fill(grad.values().begin(), grad.values().end(), T{0});
  const T scale = T{1} / static_cast<T>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    // d/dlogit of the cross-entropy through the sigmoid.
    const T dlogit = (caches[b].prob - static_cast<T>(batch[b].y)) * scale;
    accumulate_gradient(model, batch[b].x, caches[b], dlogit, grad);
  }
}

// Forward + backward over a batch; returns the mean loss.
template <typename T, typename In>
double loss_and_gradient(const ModelParams<T>& model, std::span<const Example<In>> batch,
                         ModelParams<T>& grad, std::vector<ForwardCache<T>>& caches) {
  caches.resize(batch.size());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const T p = forward(model, batch[b].x, &caches[b]);
    loss += bce_term(static_cast<double>(p), batch[b].y);
  }
  backward(model, batch, std::span<const ForwardCache<T>>(caches), grad);
  return loss / static_cast<double>(batch.size());
}

struct AdamConfig {
  double alpha = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update.
template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grad, AdamState<T>& state,
               const AdamConfig& cfg) {
  const std::size_t size = params.size();
  if (grad.size() != size) throw ConfigError("adam: gradient shape mismatch");
  if (state.m.size() != size) {
    state.m.assign(size, T{0});
    state.v.assign(size, T{0});
    state.step = 0;
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));
  const T alpha = static_cast<T>(cfg.alpha);
  const T eps = static_cast<T>(cfg.epsilon);
  auto p = params.values();
  const auto g = grad.values();
  for (std::size_t i = 0; i < size; ++i) {
    state.m[i] = b1 * state.m[i] + (T{1} - b1) * g[i];
    state.v[i] = b2 * state.v[i] + (T{1} - b2) * g[i] * g[i];
    const T m_hat = state.m[i] / c1;
    const T v_hat = state.v[i] / c2;
    p[i] -= alpha * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace lucid
