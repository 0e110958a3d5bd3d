#include "lucid/checkpoint.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lucid/byte_io.hpp"
#include "lucid/features.hpp"

namespace lucid {

std::size_t checkpoint_size(const Hyper& hyper) {
  return 4 + 2 + 5 * 4 + 8 * static_cast<std::size_t>(hyper.f) + 4 * hyper.param_count();
}

std::vector<std::uint8_t> encode_checkpoint(const ModelParams<float>& model,
                                            const NormalizationSpec& spec) {
  const Hyper& hp = model.hyper();
  if (hp.f != kFeatureCount) throw ConfigError("checkpoint: model width must match feature count");
  ByteWriter w;
  w.bytes("LUCM");
  w.u16(kCheckpointVersion);
  for (std::uint32_t v : {hp.n, hp.f, hp.h, hp.k, hp.m}) w.u32(v);
  for (double d : spec.divisors) w.f64(d);
  for (float v : model.values()) w.f32(v);
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model");
  if (r.bytes(4) != "LUCM") throw FormatError("model: bad magic");
  if (const auto version = r.u16(); version != kCheckpointVersion) {
    throw FormatError(fmt::format("model: unsupported version {}", version));
  }
  Hyper hp;
  hp.n = r.u32();
  hp.f = r.u32();
  hp.h = r.u32();
  hp.k = r.u32();
  hp.m = r.u32();
  if (hp.f != kFeatureCount) throw FormatError("model: feature count mismatch");
  try {
    hp.validate();
  } catch (const ConfigError& e) {
    throw FormatError(fmt::format("model: inconsistent shape ({})", e.what()));
  }
  if (bytes.size() != checkpoint_size(hp)) {
    throw FormatError(fmt::format("model: file is {} bytes, shape implies {}", bytes.size(),
                                  checkpoint_size(hp)));
  }
  Checkpoint cp;
  for (auto& d : cp.spec.divisors) {
    d = r.f64();
    if (!(d > 0.0)) throw FormatError("model: invalid normalisation divisor");
  }
  cp.model = ModelParams<float>(hp);
  for (auto& v : cp.model.values()) {
    v = r.f32();
    if (!std::isfinite(v)) throw FormatError("model: non-finite parameter");
  }
  return cp;
}

void save_model(const ModelParams<float>& model, const NormalizationSpec& spec,
                const std::filesystem::path& path) {
  write_file(path.string(), encode_checkpoint(model, spec));
}

Checkpoint load_model(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path.string()));
}

}  // namespace lucid
