#include "lucid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <fmt/format.h>

#include "lucid/error.hpp"
#include "lucid/frame.hpp"
#include "lucid/pcap.hpp"
#include "lucid/random.hpp"

namespace lucid {

void SynthConfig::validate() const {
  if (ddos_flows < 1 || benign_flows < 1) throw ConfigError("synth: flow counts must be >= 1");
  if (!(duration > 0.0)) throw ConfigError("synth: duration must be > 0");
  if (!(ddos.min_rate > 0.0) || ddos.max_rate < ddos.min_rate) {
    throw ConfigError("synth: invalid DDoS rate range");
  }
  if (ddos.min_packets < 1 || ddos.max_packets < ddos.min_packets) {
    throw ConfigError("synth: invalid DDoS packet range");
  }
  if (!(benign.min_gap > 0.0) || benign.max_rtt < benign.min_gap || !(benign.mean_think > 0.0)) {
    throw ConfigError("synth: invalid benign timing");
  }
  if (benign.min_exchanges < 1 || benign.max_exchanges < benign.min_exchanges) {
    throw ConfigError("synth: invalid benign exchange range");
  }
}

namespace {

constexpr std::uint32_t ip(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  return (std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d;
}

std::vector<std::uint8_t> filler(std::size_t size, std::uint8_t byte = 'x') {
  return std::vector<std::uint8_t>(size, byte);
}

std::vector<std::uint8_t> text_payload(std::string_view head, std::size_t size) {
  std::vector<std::uint8_t> out(head.begin(), head.end());
  if (out.size() < size) out.resize(size, 'a');
  return out;
}

enum class Attack { syn_flood, http_flood, udp_flood, icmp_flood };
enum class Service { http, tls, ssh, smtp, ftp, telnet, dns, ping };

struct Session {
  FrameSpec client;  // template for client -> server packets
  FrameSpec server;  // template for server -> client packets
};

class Generator {
 public:
  explicit Generator(const SynthConfig& config) : cfg_(config), rng_(config.seed) {}

  SynthTrace run() {
    for (std::size_t i = 0; i < cfg_.ddos_flows; ++i) ddos_flow();
    for (std::size_t i = 0; i < cfg_.benign_flows; ++i) benign_flow();

    std::vector<std::size_t> order(pending_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pending_[a].ts_ns < pending_[b].ts_ns;
    });
    SynthTrace trace;
    trace.packets.reserve(order.size());
    for (std::size_t i : order) trace.packets.push_back(std::move(pending_[i]));
    trace.labels = std::move(labels_);
    return trace;
  }

 private:
  // Microsecond-aligned so the written pcap round-trips exactly.
  std::int64_t to_ns(double seconds) const {
    return cfg_.epoch_ns + std::llround(seconds * 1e6) * 1000;
  }

  void emit(double at, const FrameSpec& spec) {
    pending_.push_back({to_ns(at), encode_frame(spec)});
  }

  bool claim(std::uint8_t proto, Endpoint a, Endpoint b, Label label) {
    const auto key = FlowKey::make(proto, a, b);
    if (labels_.contains(key)) return false;
    labels_.emplace(key, label);
    return true;
  }

  std::uint16_t ephemeral_port() { return static_cast<std::uint16_t>(rng_.between(32768, 60999)); }

  void ddos_flow() {
    const auto& p = cfg_.ddos;
    const auto attack = static_cast<Attack>(rng_.index(4));
    const std::size_t count = static_cast<std::size_t>(
        rng_.between(static_cast<std::int64_t>(p.min_packets), static_cast<std::int64_t>(p.max_packets)));
    const double rate = rng_.uniform(p.min_rate, p.max_rate);
    const double interval = std::llround(1e6 / rate) * 1e-6;

    FrameSpec spec;
    spec.ip_flags = 0x4000;
    spec.ttl = static_cast<std::uint8_t>(rng_.between(48, 128));
    spec.dst_ip = ip(192, 168, 10, static_cast<std::uint8_t>(50 + rng_.index(4)));
    do {
      spec.src_ip = ip(172, static_cast<std::uint8_t>(16 + rng_.index(16)),
                       static_cast<std::uint8_t>(rng_.index(256)),
                       static_cast<std::uint8_t>(1 + rng_.index(254)));
      spec.src_port = ephemeral_port();
      switch (attack) {
        case Attack::syn_flood:
          spec.proto = ipproto::tcp;
          spec.dst_port = 80;
          spec.tcp_flags = 0x002;
          spec.tcp_win = 512;
          spec.tcp_seq = static_cast<std::uint32_t>(rng_.next());
          break;
        case Attack::http_flood:
          spec.proto = ipproto::tcp;
          spec.dst_port = 80;
          spec.tcp_flags = 0x018;
          spec.tcp_win = 1024;
          spec.tcp_seq = static_cast<std::uint32_t>(rng_.next());
          spec.tcp_ack = static_cast<std::uint32_t>(rng_.next());
          spec.payload = text_payload("GET / HTTP/1.1\r\nHost: 192.168.10.50\r\n\r\n", 40);
          break;
        case Attack::udp_flood:
          spec.proto = ipproto::udp;
          spec.dst_port = static_cast<std::uint16_t>(rng_.between(1024, 65535));
          spec.payload = filler(512, 0);
          break;
        case Attack::icmp_flood:
          spec.proto = ipproto::icmp;
          spec.src_port = 0;
          spec.dst_port = 0;
          spec.icmp_type = 8;
          spec.icmp_id = static_cast<std::uint16_t>(rng_.index(65536));
          spec.payload = filler(64, 0x41);
          break;
      }
    } while (!claim(spec.proto, {spec.src_ip, spec.src_port}, {spec.dst_ip, spec.dst_port}, Label::ddos));

    const double span = interval * static_cast<double>(count - 1);
    const double start = rng_.uniform(0.0, std::max(cfg_.duration - span, 1e-3));
    for (std::size_t i = 0; i < count; ++i) {
      spec.ip_id = static_cast<std::uint16_t>(spec.ip_id + 1);
      if (attack == Attack::icmp_flood) spec.icmp_seq = static_cast<std::uint16_t>(i);
      emit(start + interval * static_cast<double>(i), spec);
    }
  }

  double gap() {
    const auto& b = cfg_.benign;
    return rng_.uniform(b.min_gap, b.max_rtt);
  }

  double think() { return cfg_.benign.min_gap * 4 + rng_.exponential(cfg_.benign.mean_think); }

  std::uint16_t jitter_window(std::uint16_t base) {
    const auto w = static_cast<std::int64_t>(base) + rng_.between(-2048, 2048);
    return static_cast<std::uint16_t>(std::clamp<std::int64_t>(w, 1024, 65535));
  }

  void benign_flow() {
    static constexpr Service kServices[] = {Service::http, Service::tls,    Service::ssh,
                                            Service::smtp, Service::ftp,    Service::telnet,
                                            Service::dns,  Service::ping};
    const Service service = kServices[rng_.index(std::size(kServices))];
    const auto& b = cfg_.benign;

    Session s;
    s.client.ip_flags = rng_.chance(b.df_probability) ? 0x4000 : 0x0000;
    s.server.ip_flags = s.client.ip_flags;
    s.client.ttl = 64;
    s.server.ttl = static_cast<std::uint8_t>(rng_.between(40, 128));

    std::uint16_t server_port = 0;
    std::uint8_t proto = ipproto::tcp;
    switch (service) {
      case Service::http: server_port = rng_.chance(0.8) ? 80 : 8080; break;
      case Service::tls: server_port = 443; break;
      case Service::ssh: server_port = 22; break;
      case Service::smtp: server_port = rng_.chance(0.7) ? 25 : 587; break;
      case Service::ftp: server_port = 21; break;
      case Service::telnet: server_port = 23; break;
      case Service::dns: server_port = 53; proto = ipproto::udp; break;
      case Service::ping: proto = ipproto::icmp; break;
    }
    do {
      s.client.src_ip = ip(192, 168, static_cast<std::uint8_t>(1 + rng_.index(8)),
                           static_cast<std::uint8_t>(2 + rng_.index(250)));
      s.client.dst_ip = rng_.chance(0.5)
                            ? ip(203, 0, 113, static_cast<std::uint8_t>(1 + rng_.index(254)))
                            : ip(198, 51, 100, static_cast<std::uint8_t>(1 + rng_.index(254)));
      s.client.src_port = proto == ipproto::icmp ? 0 : ephemeral_port();
      s.client.dst_port = server_port;
    } while (!claim(proto, {s.client.src_ip, s.client.src_port},
                    {s.client.dst_ip, s.client.dst_port}, Label::benign));
    s.client.proto = s.server.proto = proto;
    s.server.src_ip = s.client.dst_ip;
    s.server.dst_ip = s.client.src_ip;
    s.server.src_port = s.client.dst_port;
    s.server.dst_port = s.client.src_port;
    s.server.src_mac = s.client.dst_mac;
    s.server.dst_mac = s.client.src_mac;
    s.client.ip_id = static_cast<std::uint16_t>(rng_.index(65536));
    s.server.ip_id = static_cast<std::uint16_t>(rng_.index(65536));

    const std::size_t exchanges = static_cast<std::size_t>(rng_.between(
        static_cast<std::int64_t>(b.min_exchanges), static_cast<std::int64_t>(b.max_exchanges)));
    double now = rng_.uniform(0.0, cfg_.duration);

    if (proto == ipproto::udp) {
      dns_session(s, exchanges, now);
    } else if (proto == ipproto::icmp) {
      ping_session(s, exchanges, now);
    } else {
      tcp_session(s, service, exchanges, now);
    }
  }

  void send(FrameSpec& spec, double at) {
    spec.ip_id = static_cast<std::uint16_t>(spec.ip_id + 1);
    emit(at, spec);
  }

  void dns_session(Session& s, std::size_t queries, double now) {
    for (std::size_t q = 0; q < queries; ++q) {
      s.client.payload = filler(static_cast<std::size_t>(rng_.between(28, 80)), 0x01);
      send(s.client, now);
      now += gap();
      s.server.payload = filler(static_cast<std::size_t>(rng_.between(60, 400)), 0x02);
      send(s.server, now);
      now += think();
    }
  }

  void ping_session(Session& s, std::size_t pings, double now) {
    const auto id = static_cast<std::uint16_t>(rng_.index(65536));
    const std::size_t size = static_cast<std::size_t>(rng_.between(32, 120));
    s.client.icmp_type = 8;
    s.server.icmp_type = 0;
    s.client.icmp_id = s.server.icmp_id = id;
    s.client.payload = s.server.payload = filler(size, 0x61);
    for (std::size_t i = 0; i < pings; ++i) {
      s.client.icmp_seq = s.server.icmp_seq = static_cast<std::uint16_t>(i + 1);
      send(s.client, now);
      now += gap();
      send(s.server, now);
      now += std::max(0.2, rng_.uniform(0.5, 1.5));
    }
  }

  std::vector<std::uint8_t> request_payload(Service service, std::size_t size) {
    switch (service) {
      case Service::http: return text_payload("GET /index.html HTTP/1.1\r\nHost: example\r\n", size);
      case Service::smtp: return text_payload("MAIL FROM:<user@example.org>\r\n", size);
      case Service::ftp: return text_payload("RETR file.bin\r\n", size);
      case Service::ssh: return text_payload("SSH-2.0-OpenSSH", size);
      default: return filler(size, 0x17);
    }
  }

  std::vector<std::uint8_t> response_payload(Service service, std::size_t size) {
    if (service == Service::http) return text_payload("HTTP/1.1 200 OK\r\n", size);
    return filler(size, 0x18);
  }

  void tcp_session(Session& s, Service service, std::size_t exchanges, double now) {
    std::uint32_t cseq = static_cast<std::uint32_t>(rng_.next());
    std::uint32_t sseq = static_cast<std::uint32_t>(rng_.next());
    const auto cwin = static_cast<std::uint16_t>(rng_.between(8192, 65535));
    const auto swin = static_cast<std::uint16_t>(rng_.between(4096, 65535));

    auto client_send = [&](std::uint16_t flags, std::size_t size, bool request) {
      s.client.tcp_flags = flags;
      s.client.tcp_seq = cseq;
      s.client.tcp_ack = (flags & 0x010) ? sseq : 0;
      s.client.tcp_win = jitter_window(cwin);
      s.client.payload = size == 0 ? std::vector<std::uint8_t>{}
                                   : (request ? request_payload(service, size) : filler(size));
      send(s.client, now);
      cseq += static_cast<std::uint32_t>(size) + ((flags & 0x003) ? 1u : 0u);
    };
    auto server_send = [&](std::uint16_t flags, std::size_t size) {
      s.server.tcp_flags = flags;
      s.server.tcp_seq = sseq;
      s.server.tcp_ack = cseq;
      s.server.tcp_win = jitter_window(swin);
      s.server.payload = size == 0 ? std::vector<std::uint8_t>{} : response_payload(service, size);
      send(s.server, now);
      sseq += static_cast<std::uint32_t>(size) + ((flags & 0x003) ? 1u : 0u);
    };

    client_send(0x002, 0, false);  // SYN
    now += gap();
    server_send(0x012, 0);  // SYN/ACK
    now += gap();
    client_send(0x010, 0, false);
    now += think();
    for (std::size_t e = 0; e < exchanges; ++e) {
      client_send(0x018, static_cast<std::size_t>(rng_.between(40, 700)), true);
      now += gap();
      const auto segments = rng_.between(1, 3);
      for (std::int64_t seg = 0; seg < segments; ++seg) {
        server_send(0x018, static_cast<std::size_t>(rng_.between(100, 1460)));
        now += gap();
      }
      client_send(0x010, 0, false);  // delayed ACK
      now += think();
    }
    client_send(0x011, 0, false);  // FIN/ACK
    now += gap();
    server_send(0x011, 0);
    now += gap();
    client_send(0x010, 0, false);
  }

  const SynthConfig& cfg_;
  Rng rng_;
  std::vector<SynthPacket> pending_;
  LabelSet labels_;
};

}  // namespace

SynthTrace synthesize(const SynthConfig& config) {
  config.validate();
  return Generator(config).run();
}

SynthFiles generate(const SynthConfig& config, const std::filesystem::path& out_prefix) {
  const SynthTrace trace = synthesize(config);
  SynthFiles files;
  files.pcap = out_prefix.string() + ".pcap";
  files.labels = out_prefix.string() + "-labels.csv";
  PcapWriter writer(files.pcap);
  for (const auto& p : trace.packets) writer.write(p.ts_ns, p.frame);
  writer.close();
  write_labels_csv(files.labels, trace.labels);
  files.packets = trace.packets.size();
  files.flows = trace.labels.size();
  return files;
}

}  // namespace lucid
