#include "powersense/udp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "bytes.hpp"
#include "powersense/error.hpp"

namespace powersense {

namespace {

constexpr std::size_t kDatagramHeader = 4 + 8;

sockaddr_in resolve(const std::string& spec, bool passive) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidConfig, "address must be host:port, got '" + spec + "'");
  std::string host = spec.substr(0, colon);
  const std::string port = spec.substr(colon + 1);
  if (host.empty()) host = passive ? "0.0.0.0" : "127.0.0.1";
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (const int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0 || res == nullptr) {
    throw Error(Errc::Io, "cannot resolve '" + spec + "': " + gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  freeaddrinfo(res);
  return addr;
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

std::vector<std::uint8_t> encode_datagram(std::uint32_t seq, const CsiRecord& rec) {
  std::vector<std::uint8_t> out;
  out.reserve(kDatagramHeader + 8 * rec.payload.size());
  bytes::put_u32(out, seq);
  bytes::put_f64(out, rec.timestamp);
  for (const auto& v : rec.payload) {
    bytes::put_f32(out, v.real());
    bytes::put_f32(out, v.imag());
  }
  return out;
}

Datagram decode_datagram(std::span<const std::uint8_t> data, std::size_t payload_len) {
  if (data.size() != kDatagramHeader + 8 * payload_len) {
    throw Error(Errc::MalformedDatagram, "datagram of " + std::to_string(data.size()) + " bytes, expected " +
                                             std::to_string(kDatagramHeader + 8 * payload_len));
  }
  bytes::Cursor c(data);
  Datagram d;
  d.seq = c.u32();
  d.record.timestamp = c.f64();
  d.record.payload.resize(payload_len);
  for (auto& v : d.record.payload) {
    const float re = c.f32();
    const float im = c.f32();
    v = {re, im};
  }
  return d;
}

// --- ReorderBuffer ----------------------------------------------------------

void ReorderBuffer::drain(std::vector<StreamEvent>& out) {
  while (!pending_.empty() && pending_.begin()->first == *expected_) {
    out.push_back({*expected_, 0, std::move(pending_.begin()->second)});
    pending_.erase(pending_.begin());
    ++*expected_;
  }
}

void ReorderBuffer::skip_to_oldest(std::vector<StreamEvent>& out) {
  const std::uint64_t oldest = pending_.begin()->first;
  out.push_back({*expected_, oldest - *expected_, std::nullopt});
  ++gaps_;
  missing_ += oldest - *expected_;
  expected_ = oldest;
  drain(out);
}

std::vector<StreamEvent> ReorderBuffer::push(std::uint64_t seq, CsiRecord rec) {
  std::vector<StreamEvent> out;
  if (!expected_) expected_ = seq;
  if (seq < *expected_ || pending_.contains(seq)) {
    ++dropped_;
    return out;
  }
  pending_.emplace(seq, std::move(rec));
  drain(out);
  while (pending_.size() > window_) skip_to_oldest(out);
  return out;
}

std::vector<StreamEvent> ReorderBuffer::flush() {
  std::vector<StreamEvent> out;
  while (!pending_.empty()) skip_to_oldest(out);
  return out;
}

// --- UdpReceiver ------------------------------------------------------------

UdpReceiver::UdpReceiver(const std::string& bind, std::size_t payload_len, std::size_t capacity,
                         std::size_t drop_chunk)
    : payload_len_(payload_len), capacity_(capacity), drop_chunk_(std::max<std::size_t>(drop_chunk, 1)) {
  const sockaddr_in addr = resolve(bind, true);
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw Error(Errc::Io, "socket: " + errno_text());
  int rcvbuf = 4 << 20;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
  timeval tv{0, 100000};
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string msg = "bind " + bind + ": " + errno_text();
    ::close(fd_);
    throw Error(Errc::Io, msg);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  thread_ = std::thread([this] { run(); });
}

UdpReceiver::~UdpReceiver() {
  stop();
  if (fd_ >= 0) ::close(fd_);
}

void UdpReceiver::stop() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
  cv_.notify_all();
}

void UdpReceiver::run() {
  std::vector<std::uint8_t> buf(65536);
  while (!stop_) {
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0) continue;  // timeout or interrupt; re-check stop flag
    Datagram d;
    try {
      d = decode_datagram({buf.data(), static_cast<std::size_t>(n)}, payload_len_);
    } catch (const Error&) {
      ++malformed_;
      continue;
    }
    {
      std::lock_guard lock(mu_);
      if (queue_.size() >= capacity_) {
        const std::size_t drop = std::min(drop_chunk_, queue_.size());
        queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(drop));
        overflow_drops_ += drop;
      }
      queue_.push_back(std::move(d));
    }
    cv_.notify_one();
  }
}

std::optional<Datagram> UdpReceiver::pop(double timeout_s) {
  std::unique_lock lock(mu_);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  if (!cv_.wait_until(lock, deadline, [this] { return !queue_.empty() || stop_; }) || queue_.empty()) {
    return std::nullopt;
  }
  Datagram d = std::move(queue_.front());
  queue_.pop_front();
  return d;
}

// --- UdpSender --------------------------------------------------------------

UdpSender::UdpSender(const std::string& dest) {
  const sockaddr_in addr = resolve(dest, false);
  addr_.resize(sizeof(addr));
  std::memcpy(addr_.data(), &addr, sizeof(addr));
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw Error(Errc::Io, "socket: " + errno_text());
}

UdpSender::~UdpSender() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSender::send(std::span<const std::uint8_t> data) {
  const ssize_t n = ::sendto(fd_, data.data(), data.size(), 0, reinterpret_cast<const sockaddr*>(addr_.data()),
                             static_cast<socklen_t>(addr_.size()));
  if (n < 0 || static_cast<std::size_t>(n) != data.size()) throw Error(Errc::Io, "sendto: " + errno_text());
}

}  // namespace powersense
