#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lucid/preprocess.hpp"

namespace lucid {

// Preprocessed samples plus the parameters that produced them.
//
// On-disk layout ("LUCD", version 1), little-endian throughout:
//   magic[4] version:u16 t:f64 n:u32 f:u32
//   f x (name_len:u8 name[name_len])
//   f x divisor:f64
//   count:u64
//   count x (proto:u8 ip_lo:u32 port_lo:u16 ip_hi:u32 port_hi:u16
//            window_start:f64 pkt_count:u16 label:u8 matrix: n*f x f32)
// label 255 marks an unlabeled sample.
struct Dataset {
  double t = 0.0;
  std::uint32_t n = 0;
  NormalizationSpec spec;
  std::vector<FlowSample> samples;
};

inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::uint8_t kUnlabeled = 255;

std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace lucid
