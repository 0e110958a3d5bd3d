#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "lucid/model.hpp"
#include "lucid/preprocess.hpp"

namespace lucid {

// Bytes needed to hold one n x f sample with values of `width` bytes.
constexpr std::size_t memory_per_sample(std::size_t n, std::size_t f, std::size_t width) {
  return n * f * width;
}

struct BenchReport {
  std::size_t batch_size = 0;
  std::size_t samples = 0;        // samples classified per repetition
  double seconds = 0.0;           // median wall-clock per repetition
  double samples_per_sec = 0.0;
  double packets_per_sec = 0.0;   // samples_per_sec * n
  std::size_t bytes_per_sample_f32 = 0;
  std::size_t bytes_per_sample_f64 = 0;
};

// Classifies `count` contiguous samples (count * n * f floats). Loops run
// filter-major across the batch so each filter is reused while hot.
void predict_batch(const ModelParams<float>& model, std::span<const float> batch,
                   std::size_t count, std::span<float> out);

// Times inference over `samples` for each batch size. One warm-up pass is
// discarded, then the median of `repeats` timed passes is reported.
std::vector<BenchReport> run_benchmark(const ModelParams<float>& model,
                                       std::span<const FlowSample> samples,
                                       std::span<const std::size_t> batch_sizes,
                                       std::size_t repeats = 3);

inline constexpr const char* kBenchCsvHeader =
    "batch_size,samples,seconds,samples_per_sec,packets_per_sec,bytes_per_sample_f32,"
    "bytes_per_sample_f64";
void write_bench_csv_row(std::ostream& out, const BenchReport& report);

}  // namespace lucid
