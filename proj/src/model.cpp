#include "lucid/model.hpp"

#include <fmt/format.h>

namespace lucid {

Hyper Hyper::global_pool(std::uint32_t n, std::uint32_t f, std::uint32_t h, std::uint32_t k) {
  Hyper hp{n, f, h, k, 0};
  if (h >= 1 && h <= n) hp.m = n - h + 1;
  hp.validate();
  return hp;
}

void Hyper::validate() const {
  if (n < 1) throw ConfigError("model: n must be >= 1");
  if (f < 1) throw ConfigError("model: f must be >= 1");
  if (h < 1 || h > n) throw ConfigError(fmt::format("model: need 1 <= h <= n (h={}, n={})", h, n));
  if (k < 1) throw ConfigError("model: k must be >= 1");
  if (m < 1 || m > n - h + 1) {
    throw ConfigError(fmt::format("model: need 1 <= m <= n-h+1 (m={}, n-h+1={})", m, n - h + 1));
  }
}

Label classify(double p) { return p > 0.5 ? Label::ddos : Label::benign; }

double bce_term(double p, double y) {
  constexpr double kEps = 1e-12;
  p = std::clamp(p, kEps, 1.0 - kEps);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

double bce_loss(std::span<const double> p, std::span<const double> y) {
  if (p.empty() || p.size() != y.size()) {
    throw ConfigError("bce_loss: batch must be non-empty with matching labels");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += bce_term(p[i], y[i]);
  return sum / static_cast<double>(p.size());
}

}  // namespace lucid
