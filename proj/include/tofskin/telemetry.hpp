#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tofskin/types.hpp"

namespace tofskin {

// One sensor reading: an 8x8 grid of ranges in millimeters, row-major
// (row*8+col), 0xFFFF meaning no target.
struct ToFFrame {
  std::uint8_t sensor_index = 0;
  std::uint32_t sequence = 0;
  std::uint64_t timestamp_us = 0;
  std::array<std::uint16_t, 64> ranges_mm{};

  bool operator==(const ToFFrame&) const = default;
};

// Wire layout, little-endian: magic "TF" (0x54 0x46), version 0x01,
// sensor_index u8, sequence u32, timestamp_us u64, 64 x range u16.
inline constexpr std::size_t kFrameWireSize = 144;
inline constexpr std::uint8_t kMagic0 = 0x54;
inline constexpr std::uint8_t kMagic1 = 0x46;
inline constexpr std::uint8_t kProtocolVersion = 0x01;

std::array<std::uint8_t, kFrameWireSize> encode_frame(const ToFFrame& frame);

enum class DecodeError { ok, short_datagram, bad_magic, bad_version };
const char* to_string(DecodeError err);

DecodeError decode_frame(std::span<const std::uint8_t> bytes, ToFFrame& out);

struct SessionStats {
  struct PerSensor {
    std::uint64_t received = 0;
    std::uint32_t min_sequence = 0;
    std::uint32_t max_sequence = 0;

    // Sequence discontinuities, assuming no wraparound or duplicates.
    std::uint64_t gaps() const {
      if (received == 0) return 0;
      const std::uint64_t span = static_cast<std::uint64_t>(max_sequence) - min_sequence + 1;
      return span > received ? span - received : 0;
    }
  };
  std::map<int, PerSensor> sensors;
  std::uint64_t short_datagrams = 0;
  std::uint64_t bad_magic = 0;
  std::uint64_t bad_version = 0;

  std::uint64_t frames_received() const;
  std::uint64_t decode_errors() const { return short_datagrams + bad_magic + bad_version; }
  std::uint64_t total_gaps() const;
  void note_frame(const ToFFrame& frame);
  void note_error(DecodeError err);
};

struct SendReport {
  std::uint64_t attempted = 0;
  std::uint64_t sent = 0;
  std::uint64_t failed = 0;
};

// One datagram per frame, best effort. rate_hz > 0 paces sends so each
// sensor's frames go out 1/rate_hz apart (scheduled by sequence number);
// rate_hz <= 0 sends as fast as possible.
SendReport emit_frames(std::span<const ToFFrame> frames, const std::string& destination,
                       double rate_hz);

// Receives datagrams on a background thread and hands decoded frames to any
// number of consumers in arrival order. Malformed datagrams are counted,
// never fatal.
class FrameCollector {
 public:
  explicit FrameCollector(const std::string& listen_address);
  ~FrameCollector();
  FrameCollector(const FrameCollector&) = delete;
  FrameCollector& operator=(const FrameCollector&) = delete;

  std::optional<ToFFrame> pop(std::chrono::milliseconds timeout);
  SessionStats stats() const;
  std::uint16_t port() const { return port_; }
  void stop();

 private:
  void run();

  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::thread receiver_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<ToFFrame> queue_;
  SessionStats stats_;
  bool stopping_ = false;
};

// Convenience wrapper: collect until the frame budget is reached or the
// duration elapses (whichever comes first; a zero budget means duration-only).
std::pair<std::vector<ToFFrame>, SessionStats> collect(const std::string& listen_address,
                                                       std::size_t frame_budget,
                                                       std::chrono::milliseconds duration);

// Flat file of concatenated wire records.
void write_frame_file(const std::filesystem::path& path, std::span<const ToFFrame> frames);
std::vector<ToFFrame> read_frame_file(const std::filesystem::path& path,
                                      SessionStats* stats = nullptr);

}  // namespace tofskin
