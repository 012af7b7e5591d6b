#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <string>

#include "p2pbeam/errors.hpp"
#include "p2pbeam/telemetry.hpp"

namespace p2pbeam {

namespace {

constexpr int kMaxAttempts = 3;

std::optional<sockaddr_in> parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) return std::nullopt;
  std::string host = address.substr(0, colon);
  if (host == "localhost") host = "127.0.0.1";
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (...) {
    return std::nullopt;
  }
  if (port <= 0 || port > 65535) return std::nullopt;
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) return std::nullopt;
  return sa;
}

}  // namespace

SimClient::~SimClient() {
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
  if (fd_ >= 0) ::close(fd_);
}

void SimClient::join() {
  if (thread_.joinable()) thread_.join();
}

SenderCounters SimClient::counters() const {
  return {sent_.load(), failed_.load(), retries_.load(), feedback_.load()};
}

std::optional<SectorCommand> SimClient::last_feedback() const {
  std::lock_guard lock(feedback_mutex_);
  return last_feedback_;
}

void SimClient::run(std::vector<ImuSample> stream, double rate_hz, const std::stop_token& stop) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto period = std::chrono::duration<double>(1.0 / rate_hz);
  sockaddr_in dest{};
  if (address_ok_) std::memcpy(&dest, address_.data(), sizeof(dest));

  for (std::size_t k = 0; k < stream.size() && !stop.stop_requested(); ++k) {
    std::this_thread::sleep_until(start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(k)));
    ImuSample s = stream[k];
    s.client_id = client_id_;
    s.seq = static_cast<std::uint32_t>(k);
    const auto bytes = encode(s);

    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      if (attempt > 0) {
        retries_.fetch_add(1, std::memory_order_relaxed);
        std::this_thread::sleep_for(std::chrono::microseconds(500 << attempt));
      }
      if (!address_ok_ || fd_ < 0) continue;
      const ssize_t n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&dest),
                                 sizeof(dest));
      ok = n == static_cast<ssize_t>(bytes.size());
    }
    (ok ? sent_ : failed_).fetch_add(1, std::memory_order_relaxed);

    // Drain any beam feedback without blocking.
    if (fd_ >= 0) {
      std::array<std::byte, 64> buf{};
      for (;;) {
        const ssize_t n = ::recv(fd_, buf.data(), buf.size(), MSG_DONTWAIT);
        if (n < 0) break;
        try {
          const auto cmd = decode_sector_command(std::span<const std::byte>(buf.data(), static_cast<std::size_t>(n)));
          std::lock_guard lock(feedback_mutex_);
          last_feedback_ = cmd;
          feedback_.fetch_add(1, std::memory_order_relaxed);
        } catch (const DecodeError&) {
        }
      }
    }
  }
  done_.store(true, std::memory_order_release);
}

std::unique_ptr<SimClient> run_sim_client(ClientId client_id, std::vector<ImuSample> imu_stream,
                                          const std::string& server_address, double rate_hz) {
  if (!(rate_hz > 0.0)) throw ValidationError("rate_hz", "must be > 0");
  std::unique_ptr<SimClient> client(new SimClient());
  client->client_id_ = client_id;
  if (auto sa = parse_address(server_address)) {
    client->address_.resize(sizeof(sockaddr_in));
    std::memcpy(client->address_.data(), &*sa, sizeof(sockaddr_in));
    client->address_ok_ = true;
  }
  client->fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  SimClient* raw = client.get();
  client->thread_ = std::jthread(
      [raw, stream = std::move(imu_stream), rate_hz](std::stop_token st) mutable { raw->run(std::move(stream), rate_hz, st); });
  return client;
}

}  // namespace p2pbeam
