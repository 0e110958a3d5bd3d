#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace lucid {

// Link-layer types understood by the decoder.
enum class LinkType : std::uint32_t {
  ethernet = 1,
  raw = 101,
  linux_sll = 113,
  ipv4 = 228,
};

namespace ipproto {
inline constexpr std::uint8_t icmp = 1;
inline constexpr std::uint8_t tcp = 6;
inline constexpr std::uint8_t udp = 17;
}  // namespace ipproto

// One decoded packet. Header fields that do not apply to the packet's
// protocols stay zero.
struct PacketRecord {
  std::int64_t ts_ns = 0;  // capture time, nanoseconds since the epoch
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t proto = 0;
  std::vector<std::string> layers;

  std::uint32_t wire_len = 0;     // original frame length
  std::uint16_t ip_total_len = 0;
  std::uint16_t ip_flags = 0;     // 3 flag bits + 13-bit fragment offset
  std::uint32_t tcp_len = 0;      // TCP payload bytes
  std::uint32_t tcp_ack = 0;
  std::uint16_t tcp_flags = 0;    // 9 bits, NS..FIN
  std::uint16_t tcp_win = 0;
  std::uint32_t udp_len = 0;      // UDP payload bytes
  std::uint8_t icmp_type = 0;

  double ts() const { return static_cast<double>(ts_ns) * 1e-9; }
  bool has_layer(std::string_view name) const;
};

struct ParseStats {
  std::size_t records = 0;   // per-record headers read
  std::size_t accepted = 0;
  std::size_t skipped = 0;   // records that failed decoding (includes ipv6)
  std::size_t ipv6 = 0;
  std::size_t truncated = 0; // 1 when the final record was cut short
};

struct Capture {
  LinkType link_type = LinkType::ethernet;
  bool nanosecond = false;
  std::vector<PacketRecord> packets;
  ParseStats stats;
};

// Reads a classic libpcap file (either byte order, micro- or nanosecond
// timestamps). Throws IoError if the file cannot be read and FormatError
// on a bad global header.
Capture parse_pcap(const std::filesystem::path& path);
Capture parse_pcap(std::span<const std::uint8_t> bytes);

// Decodes one captured frame. Returns false when the frame is not an
// accepted IPv4/ARP packet; *is_ipv6 is set for IPv6 frames.
bool decode_frame(LinkType link, std::span<const std::uint8_t> frame, std::uint32_t wire_len,
                  PacketRecord& out, bool* is_ipv6 = nullptr);

struct PcapWriterOptions {
  LinkType link_type = LinkType::ethernet;
  bool nanosecond = false;
  bool big_endian = false;
  std::uint32_t snaplen = 65535;
};

class PcapWriter {
 public:
  PcapWriter(const std::filesystem::path& path, PcapWriterOptions options = {});

  void write(std::int64_t ts_ns, std::span<const std::uint8_t> frame);
  void write(std::int64_t ts_ns, std::span<const std::uint8_t> frame, std::uint32_t wire_len);
  std::size_t count() const { return count_; }
  void close();

  // Serialises the same layout into memory; used by tests.
  static std::vector<std::uint8_t> global_header(const PcapWriterOptions& options);
  static std::vector<std::uint8_t> record(const PcapWriterOptions& options, std::int64_t ts_ns,
                                          std::span<const std::uint8_t> frame,
                                          std::uint32_t wire_len);

 private:
  std::ofstream out_;
  PcapWriterOptions options_;
  std::size_t count_ = 0;
};

std::string format_ipv4(std::uint32_t ip);
// Parses dotted-quad notation; returns false on malformed input.
bool parse_ipv4(std::string_view text, std::uint32_t& ip);

}  // namespace lucid
