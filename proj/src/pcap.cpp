#include "lucid/pcap.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <iterator>

#include <fmt/format.h>

#include "lucid/error.hpp"

namespace lucid {
namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherArp = 0x0806;
constexpr std::uint16_t kEtherIpv6 = 0x86dd;
constexpr std::uint16_t kEtherVlan = 0x8100;
constexpr std::uint16_t kEtherQinQ = 0x88a8;

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t{b[at]} | (std::uint32_t{b[at + 1]} << 8) |
         (std::uint32_t{b[at + 2]} << 16) | (std::uint32_t{b[at + 3]} << 24);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v, bool big_endian) {
  for (int i = 0; i < 4; ++i) {
    const int shift = big_endian ? 24 - 8 * i : 8 * i;
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v, bool big_endian) {
  if (big_endian) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  } else {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  }
}

// Application protocol guessed from well-known ports.
const char* app_for_port(std::uint16_t port, bool tcp) {
  switch (port) {
    case 20:
    case 21:
      return tcp ? "ftp" : nullptr;
    case 22:
      return tcp ? "ssh" : nullptr;
    case 23:
      return tcp ? "telnet" : nullptr;
    case 25:
    case 587:
      return tcp ? "smtp" : nullptr;
    case 53:
      return "dns";
    case 80:
    case 8080:
      return tcp ? "http" : nullptr;
    case 443:
      return tcp ? "tls" : nullptr;
    default:
      break;
  }
  if (tcp && port >= 6660 && port <= 6669) return "irc";
  return nullptr;
}

bool looks_like_http(std::span<const std::uint8_t> payload) {
  static constexpr std::array<std::string_view, 6> kMarkers = {"GET ",  "POST ",   "HEAD ",
                                                               "PUT ",  "DELETE ", "HTTP/"};
  for (auto marker : kMarkers) {
    if (payload.size() >= marker.size() &&
        std::equal(marker.begin(), marker.end(), payload.begin(),
                   [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
      return true;
    }
  }
  return false;
}

void add_application_layer(PacketRecord& rec, std::span<const std::uint8_t> payload,
                           std::size_t payload_len, bool tcp) {
  if (payload_len == 0) return;
  if (tcp && looks_like_http(payload)) {
    rec.layers.emplace_back("http");
    return;
  }
  const char* app = app_for_port(rec.dst_port, tcp);
  if (app == nullptr) app = app_for_port(rec.src_port, tcp);
  if (app != nullptr) rec.layers.emplace_back(app);
}

bool decode_arp(std::span<const std::uint8_t> b, PacketRecord& rec) {
  // Ethernet/IPv4 ARP only: htype 1, ptype 0x0800, hlen 6, plen 4.
  if (b.size() < 28 || be16(b, 2) != kEtherIpv4 || b[4] != 6 || b[5] != 4) return false;
  rec.layers.emplace_back("arp");
  rec.src_ip = be32(b, 14);
  rec.dst_ip = be32(b, 24);
  return true;
}

bool decode_ipv4(std::span<const std::uint8_t> b, PacketRecord& rec) {
  if (b.size() < 20 || (b[0] >> 4) != 4) return false;
  const std::size_t ihl = static_cast<std::size_t>(b[0] & 0x0f) * 4;
  if (ihl < 20 || b.size() < ihl) return false;

  rec.layers.emplace_back("ip");
  rec.ip_total_len = be16(b, 2);
  rec.ip_flags = be16(b, 6);
  rec.proto = b[9];
  rec.src_ip = be32(b, 12);
  rec.dst_ip = be32(b, 16);

  // Non-first fragments carry no transport header.
  if ((rec.ip_flags & 0x1fff) != 0) return true;

  // Trust the IP length over the capture length so Ethernet padding is
  // not counted as payload.
  const std::size_t ip_len = std::max<std::size_t>(rec.ip_total_len, ihl);
  const auto l4 = b.subspan(ihl, std::min(b.size(), ip_len) - ihl);
  const std::size_t l4_len = ip_len - ihl;

  switch (rec.proto) {
    case ipproto::tcp: {
      if (l4.size() < 20) return false;
      const std::size_t doff = static_cast<std::size_t>(l4[12] >> 4) * 4;
      if (doff < 20 || l4.size() < doff) return false;
      rec.layers.emplace_back("tcp");
      rec.src_port = be16(l4, 0);
      rec.dst_port = be16(l4, 2);
      rec.tcp_ack = be32(l4, 8);
      rec.tcp_flags = static_cast<std::uint16_t>(((l4[12] & 0x01) << 8) | l4[13]);
      rec.tcp_win = be16(l4, 14);
      rec.tcp_len = static_cast<std::uint32_t>(l4_len > doff ? l4_len - doff : 0);
      add_application_layer(rec, l4.subspan(doff), rec.tcp_len, true);
      break;
    }
    case ipproto::udp: {
      if (l4.size() < 8) return false;
      rec.layers.emplace_back("udp");
      rec.src_port = be16(l4, 0);
      rec.dst_port = be16(l4, 2);
      const std::uint16_t length = be16(l4, 4);
      rec.udp_len = length > 8 ? length - 8u : 0u;
      add_application_layer(rec, l4.subspan(8), rec.udp_len, false);
      break;
    }
    case ipproto::icmp: {
      if (l4.size() < 4) return false;
      rec.layers.emplace_back("icmp");
      rec.icmp_type = l4[0];
      break;
    }
    default:
      break;
  }
  return true;
}

}  // namespace

bool PacketRecord::has_layer(std::string_view name) const {
  return std::find(layers.begin(), layers.end(), name) != layers.end();
}

bool decode_frame(LinkType link, std::span<const std::uint8_t> frame, std::uint32_t wire_len,
                  PacketRecord& rec, bool* is_ipv6) {
  if (is_ipv6 != nullptr) *is_ipv6 = false;
  rec.layers.clear();
  rec.wire_len = wire_len;

  std::uint16_t ethertype = 0;
  std::size_t offset = 0;
  switch (link) {
    case LinkType::ethernet:
      if (frame.size() < 14) return false;
      rec.layers.emplace_back("eth");
      ethertype = be16(frame, 12);
      offset = 14;
      while (ethertype == kEtherVlan || ethertype == kEtherQinQ) {
        if (frame.size() < offset + 4) return false;
        ethertype = be16(frame, offset + 2);
        offset += 4;
      }
      break;
    case LinkType::linux_sll:
      if (frame.size() < 16) return false;
      rec.layers.emplace_back("sll");
      ethertype = be16(frame, 14);
      offset = 16;
      break;
    case LinkType::raw:
    case LinkType::ipv4:
      if (frame.empty()) return false;
      ethertype = (frame[0] >> 4) == 6 ? kEtherIpv6 : kEtherIpv4;
      break;
  }

  const auto payload = frame.subspan(offset);
  switch (ethertype) {
    case kEtherIpv4:
      return decode_ipv4(payload, rec);
    case kEtherArp:
      return decode_arp(payload, rec);
    case kEtherIpv6:
      if (is_ipv6 != nullptr) *is_ipv6 = true;
      return false;
    default:
      return false;
  }
}

Capture parse_pcap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGlobalHeaderSize) {
    throw FormatError("pcap: file shorter than the 24-byte global header");
  }
  Capture cap;
  const std::uint32_t magic_le = le32(bytes, 0);
  const std::uint32_t magic_be = be32(bytes, 0);
  bool big_endian = false;
  if (magic_le == kMagicMicro || magic_le == kMagicNano) {
    cap.nanosecond = magic_le == kMagicNano;
  } else if (magic_be == kMagicMicro || magic_be == kMagicNano) {
    big_endian = true;
    cap.nanosecond = magic_be == kMagicNano;
  } else {
    throw FormatError(fmt::format("pcap: unknown magic 0x{:08x}", magic_le));
  }
  auto u32 = [&](std::size_t at) { return big_endian ? be32(bytes, at) : le32(bytes, at); };

  const std::uint32_t link = u32(20) & 0x0fffffff;
  switch (link) {
    case 1:
    case 101:
    case 113:
    case 228:
      cap.link_type = static_cast<LinkType>(link);
      break;
    default:
      throw FormatError(fmt::format("pcap: unsupported link type {}", link));
  }

  std::size_t pos = kGlobalHeaderSize;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < kRecordHeaderSize) {
      cap.stats.truncated = 1;
      break;
    }
    const std::uint32_t sec = u32(pos);
    const std::uint32_t frac = u32(pos + 4);
    const std::uint32_t caplen = u32(pos + 8);
    const std::uint32_t wire_len = u32(pos + 12);
    pos += kRecordHeaderSize;
    ++cap.stats.records;
    if (bytes.size() - pos < caplen) {
      cap.stats.truncated = 1;
      break;
    }
    const auto frame = bytes.subspan(pos, caplen);
    pos += caplen;

    PacketRecord rec;
    rec.ts_ns = static_cast<std::int64_t>(sec) * 1'000'000'000 +
                static_cast<std::int64_t>(frac) * (cap.nanosecond ? 1 : 1000);
    bool ipv6 = false;
    if (decode_frame(cap.link_type, frame, std::max(wire_len, caplen), rec, &ipv6)) {
      cap.packets.push_back(std::move(rec));
      ++cap.stats.accepted;
    } else {
      ++cap.stats.skipped;
      if (ipv6) ++cap.stats.ipv6;
    }
  }
  return cap;
}

Capture parse_pcap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
  return parse_pcap(std::span<const std::uint8_t>(bytes));
}

std::vector<std::uint8_t> PcapWriter::global_header(const PcapWriterOptions& o) {
  std::vector<std::uint8_t> out;
  out.reserve(kGlobalHeaderSize);
  put32(out, o.nanosecond ? kMagicNano : kMagicMicro, o.big_endian);
  put16(out, 2, o.big_endian);
  put16(out, 4, o.big_endian);
  put32(out, 0, o.big_endian);  // thiszone
  put32(out, 0, o.big_endian);  // sigfigs
  put32(out, o.snaplen, o.big_endian);
  put32(out, static_cast<std::uint32_t>(o.link_type), o.big_endian);
  return out;
}

std::vector<std::uint8_t> PcapWriter::record(const PcapWriterOptions& o, std::int64_t ts_ns,
                                             std::span<const std::uint8_t> frame,
                                             std::uint32_t wire_len) {
  std::vector<std::uint8_t> out;
  out.reserve(kRecordHeaderSize + frame.size());
  const auto sec = static_cast<std::uint32_t>(ts_ns / 1'000'000'000);
  const auto ns = static_cast<std::uint32_t>(ts_ns % 1'000'000'000);
  put32(out, sec, o.big_endian);
  put32(out, o.nanosecond ? ns : ns / 1000, o.big_endian);
  put32(out, static_cast<std::uint32_t>(frame.size()), o.big_endian);
  put32(out, wire_len, o.big_endian);
  out.insert(out.end(), frame.begin(), frame.end());
  return out;
}

PcapWriter::PcapWriter(const std::filesystem::path& path, PcapWriterOptions options)
    : out_(path, std::ios::binary | std::ios::trunc), options_(options) {
  if (!out_) throw IoError(fmt::format("cannot write '{}'", path.string()));
  const auto header = global_header(options_);
  out_.write(reinterpret_cast<const char*>(header.data()),
             static_cast<std::streamsize>(header.size()));
}

void PcapWriter::write(std::int64_t ts_ns, std::span<const std::uint8_t> frame) {
  write(ts_ns, frame, static_cast<std::uint32_t>(frame.size()));
}

void PcapWriter::write(std::int64_t ts_ns, std::span<const std::uint8_t> frame,
                       std::uint32_t wire_len) {
  const auto rec = record(options_, ts_ns, frame, wire_len);
  out_.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  if (!out_) throw IoError("pcap: write failed");
  ++count_;
}

void PcapWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError("pcap: close failed");
}

std::string format_ipv4(std::uint32_t ip) {
  return fmt::format("{}.{}.{}.{}", ip >> 24, (ip >> 16) & 0xff, (ip >> 8) & 0xff, ip & 0xff);
}

bool parse_ipv4(std::string_view text, std::uint32_t& ip) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || next == p || part > 255) return false;
    value = (value << 8) | part;
    p = next;
    if (octet < 3) {
      if (p == end || *p != '.') return false;
      ++p;
    }
  }
  if (p != end) return false;
  ip = value;
  return true;
}

}  // namespace lucid
