#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "powersense/core.hpp"

namespace powersense {

// Wire layout: u32 sequence, f64 timestamp, then complex64 payload
// (subcarrier-major), all little-endian. One CSI sample per datagram.
struct Datagram {
  std::uint32_t seq = 0;
  CsiRecord record;
};

std::vector<std::uint8_t> encode_datagram(std::uint32_t seq, const CsiRecord& rec);
// Throws Error(MalformedDatagram) unless the size matches `payload_len`.
Datagram decode_datagram(std::span<const std::uint8_t> bytes, std::size_t payload_len);

// Either a record at `seq` or a run of `missing` lost samples starting at `seq`.
struct StreamEvent {
  std::uint64_t seq = 0;
  std::uint64_t missing = 0;
  std::optional<CsiRecord> record;

  bool is_gap() const { return !record.has_value(); }
};

// Restores sequence order within a window of datagrams. Late and duplicate
// datagrams are dropped. When the window overflows, or on flush, the missing
// sequence numbers before the oldest buffered datagram are declared a gap.
class ReorderBuffer {
 public:
  explicit ReorderBuffer(std::size_t window) : window_(window) {}

  std::vector<StreamEvent> push(std::uint64_t seq, CsiRecord rec);
  std::vector<StreamEvent> flush();

  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t gaps() const { return gaps_; }
  std::uint64_t missing() const { return missing_; }

 private:
  void drain(std::vector<StreamEvent>& out);
  void skip_to_oldest(std::vector<StreamEvent>& out);

  std::size_t window_;
  std::optional<std::uint64_t> expected_;
  std::map<std::uint64_t, CsiRecord> pending_;
  std::uint64_t dropped_ = 0;
  std::uint64_t gaps_ = 0;
  std::uint64_t missing_ = 0;
};

// Socket reader thread feeding a bounded queue. When the queue is full the
// oldest `drop_chunk` datagrams are discarded.
class UdpReceiver {
 public:
  // `bind` is "host:port" or ":port".
  UdpReceiver(const std::string& bind, std::size_t payload_len, std::size_t capacity = 4096,
              std::size_t drop_chunk = 128);
  ~UdpReceiver();
  UdpReceiver(const UdpReceiver&) = delete;
  UdpReceiver& operator=(const UdpReceiver&) = delete;

  std::uint16_t port() const { return port_; }
  // Waits up to `timeout_s`; nullopt on timeout.
  std::optional<Datagram> pop(double timeout_s);
  void stop();

  std::uint64_t malformed() const { return malformed_; }
  std::uint64_t overflow_drops() const { return overflow_drops_; }

 private:
  void run();

  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::size_t payload_len_;
  std::size_t capacity_;
  std::size_t drop_chunk_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Datagram> queue_;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> malformed_{0};
  std::atomic<std::uint64_t> overflow_drops_{0};
  std::thread thread_;
};

class UdpSender {
 public:
  explicit UdpSender(const std::string& dest);
  ~UdpSender();
  UdpSender(const UdpSender&) = delete;
  UdpSender& operator=(const UdpSender&) = delete;

  void send(std::span<const std::uint8_t> bytes);

 private:
  int fd_ = -1;
  std::vector<std::uint8_t> addr_;
};

}  // namespace powersense
