#include "lucid/flow.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "lucid/error.hpp"

namespace lucid {

FlowKey FlowKey::make(std::uint8_t proto, Endpoint a, Endpoint b) {
  if (b < a) std::swap(a, b);
  return FlowKey{proto, a, b};
}

FlowKey FlowKey::of(const PacketRecord& pkt) {
  return make(pkt.proto, {pkt.src_ip, pkt.src_port}, {pkt.dst_ip, pkt.dst_port});
}

std::string FlowKey::to_string() const {
  return fmt::format("{},{},{},{},{}", proto, format_ipv4(lo.ip), lo.port, format_ipv4(hi.ip),
                     hi.port);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_uint(std::string_view s, T& out, unsigned long long max) {
  unsigned long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v > max) return false;
  out = static_cast<T>(v);
  return true;
}

}  // namespace

LabelSet read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open label file '{}'", path.string()));

  LabelSet labels;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 6 && fields[0] == "proto") continue;
    }
    auto fail = [&](std::string_view what) {
      return FormatError(
          fmt::format("{}:{}: {} in '{}'", path.string(), lineno, what, line));
    };
    if (fields.size() != 6) throw fail("expected 6 fields");

    std::uint8_t proto = 0;
    Endpoint a, b;
    if (!parse_uint(fields[0], proto, 255)) throw fail("bad protocol");
    if (!parse_ipv4(fields[1], a.ip) || !parse_ipv4(fields[3], b.ip)) throw fail("bad address");
    if (!parse_uint(fields[2], a.port, 65535) || !parse_uint(fields[4], b.port, 65535)) {
      throw fail("bad port");
    }
    Label label;
    if (fields[5] == "0" || fields[5] == "benign" || fields[5] == "BENIGN") {
      label = Label::benign;
    } else if (fields[5] == "1" || fields[5] == "ddos" || fields[5] == "DDOS") {
      label = Label::ddos;
    } else {
      throw fail("bad label");
    }
    const auto key = FlowKey::make(proto, a, b);
    auto [it, inserted] = labels.emplace(key, label);
    if (!inserted && it->second != label) throw fail("conflicting label for flow");
  }
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
  return labels;
}

void write_labels_csv(const std::filesystem::path& path, const LabelSet& labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write label file '{}'", path.string()));
  out << "proto,ip_a,port_a,ip_b,port_b,label\n";
  for (const auto& [key, label] : labels) {
    out << key.to_string() << ',' << static_cast<int>(label) << '\n';
  }
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

}  // namespace lucid
