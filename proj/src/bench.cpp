#include "lucid/bench.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

#include "lucid/features.hpp"

namespace lucid {

void predict_batch(const ModelParams<float>& model, std::span<const float> batch,
                   std::size_t count, std::span<float> out) {
  const Hyper& hp = model.hyper();
  const std::size_t cells = static_cast<std::size_t>(hp.n) * hp.f;
  const std::size_t pooled = hp.pooled_len();
  if (batch.size() != count * cells || out.size() < count) {
    throw ConfigError("predict_batch: buffer sizes do not match the batch");
  }
  const auto dense_w = model.dense_w();
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(count), model.dense_b());

  for (std::size_t j = 0; j < hp.k; ++j) {
    for (std::size_t b = 0; b < count; ++b) {
      const auto x = batch.subspan(b * cells, cells);
      float logit = 0.0f;
      for (std::size_t p = 0; p < pooled; ++p) {
        float best = 0.0f;
        for (std::size_t i = p * hp.m; i < (p + 1) * hp.m; ++i) {
          best = std::max(best, conv_at(model, x, j, i));
        }
        logit += dense_w[p * hp.k + j] * best;
      }
      out[b] += logit;
    }
  }
  for (std::size_t b = 0; b < count; ++b) out[b] = sigmoid(out[b]);
}

std::vector<BenchReport> run_benchmark(const ModelParams<float>& model,
                                       std::span<const FlowSample> samples,
                                       std::span<const std::size_t> batch_sizes,
                                       std::size_t repeats) {
  const Hyper& hp = model.hyper();
  if (samples.empty()) throw ConfigError("benchmark: no samples");
  if (repeats < 1) throw ConfigError("benchmark: repeats must be >= 1");
  const std::size_t cells = static_cast<std::size_t>(hp.n) * hp.f;

  std::vector<float> flat;
  flat.reserve(samples.size() * cells);
  for (const auto& s : samples) {
    if (s.matrix.size() != cells) throw ConfigError("benchmark: sample shape does not match the model");
    flat.insert(flat.end(), s.matrix.begin(), s.matrix.end());
  }

  std::vector<BenchReport> reports;
  std::vector<float> out;
  for (std::size_t batch : batch_sizes) {
    if (batch < 1) throw ConfigError("benchmark: batch size must be >= 1");
    out.assign(batch, 0.0f);
    auto pass = [&] {
      for (std::size_t start = 0; start < samples.size(); start += batch) {
        const std::size_t count = std::min(batch, samples.size() - start);
        predict_batch(model, std::span<const float>(flat).subspan(start * cells, count * cells),
                      count, out);
      }
    };
    pass();  // warm-up
    std::vector<double> times;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      pass();
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    BenchReport rep;
    rep.batch_size = batch;
    rep.samples = samples.size();
    rep.seconds = std::max(times[times.size() / 2], 1e-9);
    rep.samples_per_sec = static_cast<double>(samples.size()) / rep.seconds;
    rep.packets_per_sec = rep.samples_per_sec * hp.n;
    rep.bytes_per_sample_f32 = memory_per_sample(hp.n, hp.f, 4);
    rep.bytes_per_sample_f64 = memory_per_sample(hp.n, hp.f, 8);
    reports.push_back(rep);
  }
  return reports;
}

void write_bench_csv_row(std::ostream& out, const BenchReport& r) {
  out << fmt::format("{},{},{:.6f},{:.1f},{:.1f},{},{}\n", r.batch_size, r.samples, r.seconds,
                     r.samples_per_sec, r.packets_per_sec, r.bytes_per_sample_f32,
                     r.bytes_per_sample_f64);
}

}  // namespace lucid
