#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "lucid/model.hpp"
#include "lucid/preprocess.hpp"

namespace lucid {

// Model file ("LUCM", version 1), little-endian:
//   magic[4] version:u16 n:u32 f:u32 h:u32 k:u32 m:u32
//   f x divisor:f64
//   conv_w (k*h*f f32, filter-major) conv_b (k f32)
//   dense_w (k*pooled f32) dense_b (f32)
struct Checkpoint {
  ModelParams<float> model;
  NormalizationSpec spec;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

std::size_t checkpoint_size(const Hyper& hyper);

std::vector<std::uint8_t> encode_checkpoint(const ModelParams<float>& model,
                                            const NormalizationSpec& spec);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_model(const ModelParams<float>& model, const NormalizationSpec& spec,
                const std::filesystem::path& path);
Checkpoint load_model(const std::filesystem::path& path);

}  // namespace lucid
