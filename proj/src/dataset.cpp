#include "lucid/dataset.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "lucid/byte_io.hpp"

namespace lucid {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path));
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError(fmt::format("error writing '{}'", path));
}

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  const std::size_t cells = static_cast<std::size_t>(ds.n) * kFeatureCount;
  ByteWriter w;
  w.bytes("LUCD");
  w.u16(kDatasetVersion);
  w.f64(ds.t);
  w.u32(ds.n);
  w.u32(static_cast<std::uint32_t>(kFeatureCount));
  for (auto name : kFeatureNames) {
    w.u8(static_cast<std::uint8_t>(name.size()));
    w.bytes(name);
  }
  for (double d : ds.spec.divisors) w.f64(d);
  w.u64(ds.samples.size());
  for (const auto& s : ds.samples) {
    if (s.matrix.size() != cells) {
      throw FormatError(fmt::format("dataset: sample matrix has {} cells, expected {}",
                                    s.matrix.size(), cells));
    }
    w.u8(s.key.proto);
    w.u32(s.key.lo.ip);
    w.u16(s.key.lo.port);
    w.u32(s.key.hi.ip);
    w.u16(s.key.hi.port);
    w.f64(s.window_start);
    w.u16(s.pkt_count);
    w.u8(s.label ? static_cast<std::uint8_t>(*s.label) : kUnlabeled);
    for (float v : s.matrix) w.f32(v);
  }
  return w.take();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "dataset");
  if (r.bytes(4) != "LUCD") throw FormatError("dataset: bad magic");
  if (const auto version = r.u16(); version != kDatasetVersion) {
    throw FormatError(fmt::format("dataset: unsupported version {}", version));
  }
  Dataset ds;
  ds.t = r.f64();
  ds.n = r.u32();
  const std::uint32_t f = r.u32();
  if (f != kFeatureCount) {
    throw FormatError(fmt::format("dataset: {} features, expected {}", f, kFeatureCount));
  }
  if (ds.n == 0 || ds.n > 65535) throw FormatError("dataset: invalid packets-per-sample");
  for (std::size_t i = 0; i < f; ++i) {
    const auto len = r.u8();
    if (r.bytes(len) != kFeatureNames[i]) {
      throw FormatError("dataset: feature names do not match this build");
    }
  }
  for (auto& d : ds.spec.divisors) d = r.f64();

  const std::uint64_t count = r.u64();
  const std::size_t cells = static_cast<std::size_t>(ds.n) * kFeatureCount;
  const std::size_t record = 1 + 4 + 2 + 4 + 2 + 8 + 2 + 1 + 4 * cells;
  if (count > r.remaining() / record) throw FormatError("dataset: sample count exceeds file size");
  ds.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    FlowSample s;
    s.key.proto = r.u8();
    s.key.lo.ip = r.u32();
    s.key.lo.port = r.u16();
    s.key.hi.ip = r.u32();
    s.key.hi.port = r.u16();
    s.window_start = r.f64();
    s.pkt_count = r.u16();
    const auto label = r.u8();
    if (label == 0 || label == 1) {
      s.label = static_cast<Label>(label);
    } else if (label != kUnlabeled) {
      throw FormatError(fmt::format("dataset: invalid label {}", label));
    }
    s.matrix.resize(cells);
    for (auto& v : s.matrix) v = r.f32();
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw FormatError("dataset: trailing bytes");
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  write_file(path.string(), encode_dataset(ds));
}

Dataset read_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file(path.string()));
}

}  // namespace lucid
