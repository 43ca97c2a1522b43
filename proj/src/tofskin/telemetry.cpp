#include "tofskin/telemetry.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <fstream>

#include "tofskin/errors.hpp"

namespace tofskin {

namespace {

inline void put_u16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
}
inline void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
inline std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

sockaddr_in resolve(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos)
    throw NetworkError("address must be host:port, got " + address);
  const std::string host = address.substr(0, colon);
  const std::string port = address.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* info = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &info);
  if (rc != 0 || info == nullptr)
    throw NetworkError("cannot resolve " + address + ": " + gai_strerror(rc));
  sockaddr_in out{};
  std::memcpy(&out, info->ai_addr, sizeof(out));
  ::freeaddrinfo(info);
  return out;
}

}  // namespace

std::array<std::uint8_t, kFrameWireSize> encode_frame(const ToFFrame& frame) {
  std::array<std::uint8_t, kFrameWireSize> bytes{};
  bytes[0] = kMagic0;
  bytes[1] = kMagic1;
  bytes[2] = kProtocolVersion;
  bytes[3] = frame.sensor_index;
  put_u32(&bytes[4], frame.sequence);
  put_u64(&bytes[8], frame.timestamp_us);
  for (std::size_t z = 0; z < 64; ++z) put_u16(&bytes[16 + 2 * z], frame.ranges_mm[z]);
  return bytes;
}

const char* to_string(DecodeError err) {
  switch (err) {
    case DecodeError::ok: return "ok";
    case DecodeError::short_datagram: return "short datagram";
    case DecodeError::bad_magic: return "bad magic";
    case DecodeError::bad_version: return "unsupported version";
  }
  return "unknown";
}

DecodeError decode_frame(std::span<const std::uint8_t> bytes, ToFFrame& out) {
  if (bytes.size() < kFrameWireSize) return DecodeError::short_datagram;
  if (bytes[0] != kMagic0 || bytes[1] != kMagic1) return DecodeError::bad_magic;
  if (bytes[2] != kProtocolVersion) return DecodeError::bad_version;
  out.sensor_index = bytes[3];
  out.sequence = get_u32(&bytes[4]);
  out.timestamp_us = get_u64(&bytes[8]);
  for (std::size_t z = 0; z < 64; ++z) out.ranges_mm[z] = get_u16(&bytes[16 + 2 * z]);
  return DecodeError::ok;
}

std::uint64_t SessionStats::frames_received() const {
  std::uint64_t n = 0;
  for (const auto& [idx, s] : sensors) n += s.received;
  return n;
}

std::uint64_t SessionStats::total_gaps() const {
  std::uint64_t n = 0;
  for (const auto& [idx, s] : sensors) n += s.gaps();
  return n;
}

void SessionStats::note_frame(const ToFFrame& frame) {
  auto& s = sensors[frame.sensor_index];
  if (s.received == 0) {
    s.min_sequence = s.max_sequence = frame.sequence;
  } else {
    s.min_sequence = std::min(s.min_sequence, frame.sequence);
    s.max_sequence = std::max(s.max_sequence, frame.sequence);
  }
  ++s.received;
}

void SessionStats::note_error(DecodeError err) {
  switch (err) {
    case DecodeError::short_datagram: ++short_datagrams; break;
    case DecodeError::bad_magic: ++bad_magic; break;
    case DecodeError::bad_version: ++bad_version; break;
    case DecodeError::ok: break;
  }
}

SendReport emit_frames(std::span<const ToFFrame> frames, const std::string& destination,
                       double rate_hz) {
  const sockaddr_in dest = resolve(destination);
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) throw NetworkError(std::string("socket: ") + std::strerror(errno));

  SendReport report;
  const auto start = std::chrono::steady_clock::now();
  for (const ToFFrame& frame : frames) {
    if (rate_hz > 0.0) {
      const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(frame.sequence / rate_hz));
      std::this_thread::sleep_until(due);
    }
    const auto bytes = encode_frame(frame);
    ++report.attempted;
    const ssize_t n = ::sendto(fd, bytes.data(), bytes.size(), 0,
                               reinterpret_cast<const sockaddr*>(&dest), sizeof(dest));
    if (n == static_cast<ssize_t>(bytes.size()))
      ++report.sent;
    else
      ++report.failed;
  }
  ::close(fd);
  return report;
}

FrameCollector::FrameCollector(const std::string& listen_address) {
  const sockaddr_in addr = resolve(listen_address);
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw NetworkError(std::string("socket: ") + std::strerror(errno));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string msg = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw NetworkError("cannot bind " + listen_address + ": " + msg);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  receiver_ = std::thread(&FrameCollector::run, this);
}

FrameCollector::~FrameCollector() { stop(); }

void FrameCollector::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  ready_.notify_all();
  if (receiver_.joinable()) receiver_.join();
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void FrameCollector::run() {
  std::uint8_t buffer[2048];
  while (true) {
    {
      std::lock_guard lock(mutex_);
      if (stopping_) return;
    }
    pollfd pfd{fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 50);
    if (rc <= 0) continue;
    const ssize_t n = ::recvfrom(fd_, buffer, sizeof(buffer), 0, nullptr, nullptr);
    if (n <= 0) continue;
    ToFFrame frame;
    const DecodeError err = decode_frame({buffer, static_cast<std::size_t>(n)}, frame);
    std::lock_guard lock(mutex_);
    if (err == DecodeError::ok) {
      stats_.note_frame(frame);
      queue_.push_back(frame);
      ready_.notify_all();
    } else {
      stats_.note_error(err);
    }
  }
}

std::optional<ToFFrame> FrameCollector::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  if (!ready_.wait_for(lock, timeout, [&] { return !queue_.empty() || stopping_; }))
    return std::nullopt;
  if (queue_.empty()) return std::nullopt;
  ToFFrame frame = queue_.front();
  queue_.pop_front();
  return frame;
}

SessionStats FrameCollector::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

std::pair<std::vector<ToFFrame>, SessionStats> collect(const std::string& listen_address,
                                                       std::size_t frame_budget,
                                                       std::chrono::milliseconds duration) {
  FrameCollector collector(listen_address);
  std::vector<ToFFrame> frames;
  const auto deadline = std::chrono::steady_clock::now() + duration;
  while (std::chrono::steady_clock::now() < deadline) {
    if (frame_budget > 0 && frames.size() >= frame_budget) break;
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    auto frame = collector.pop(std::min(remaining, std::chrono::milliseconds(100)));
    if (frame) frames.push_back(*frame);
  }
  collector.stop();
  return {std::move(frames), collector.stats()};
}

void write_frame_file(const std::filesystem::path& path, std::span<const ToFFrame> frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write frame file: " + path.string());
  for (const ToFFrame& frame : frames) {
    const auto bytes = encode_frame(frame);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ToFFrame> read_frame_file(const std::filesystem::path& path, SessionStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frame file: " + path.string());
  std::vector<ToFFrame> frames;
  std::uint8_t buffer[kFrameWireSize];
  while (in.read(reinterpret_cast<char*>(buffer), kFrameWireSize)) {
    ToFFrame frame;
    const DecodeError err = decode_frame({buffer, kFrameWireSize}, frame);
    if (err == DecodeError::ok) {
      frames.push_back(frame);
      if (stats) stats->note_frame(frame);
    } else if (stats) {
      stats->note_error(err);
    }
  }
  if (in.gcount() > 0 && stats) stats->note_error(DecodeError::short_datagram);
  return frames;
}

}  // namespace tofskin
