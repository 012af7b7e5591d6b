#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "p2pbeam/latest_store.hpp"
#include "p2pbeam/sources.hpp"
#include "p2pbeam/wire.hpp"

namespace p2pbeam {

struct PortBinding {
  ClientId client_id = 0;
  std::uint16_t port = 0;  // 0 picks an ephemeral port
};

struct ServerCounters {
  std::uint64_t received = 0;
  std::uint64_t accepted = 0;
  std::uint64_t reordered = 0;  // lower seq than the stored one, dropped
  std::uint64_t malformed = 0;  // wrong length, non-finite, or foreign client id
  std::uint64_t feedback_sent = 0;
};

// Multithreaded IMU receiver: one UDP socket and receive thread per client port,
// all publishing into a shared LatestStore.
class TelemetryServer {
 public:
  ~TelemetryServer();
  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  LatestStore& store() { return store_; }
  const LatestStore& store() const { return store_; }
  std::uint16_t port(ClientId id) const;
  ServerCounters counters(ClientId id) const;
  ServerCounters totals() const;

  // Sends a sector command to the address the client last transmitted from.
  // Returns false if the client has not been heard from yet.
  bool send_feedback(const SectorCommand& cmd);

  void stop();

 private:
  friend std::unique_ptr<TelemetryServer> serve(const std::vector<PortBinding>&, const std::string&);

  struct Endpoint;
  TelemetryServer(std::vector<ClientId> clients);
  void receive_loop(Endpoint& ep, const std::stop_token& stop);
  Endpoint& endpoint(ClientId id);
  const Endpoint& endpoint(ClientId id) const;

  LatestStore store_;
  std::vector<std::unique_ptr<Endpoint>> endpoints_;
};

// Binds every port (distinct ports required) and starts the receive threads.
// Throws NetworkError if a bind fails.
std::unique_ptr<TelemetryServer> serve(const std::vector<PortBinding>& bindings,
                                       const std::string& bind_address = "127.0.0.1");

struct SenderCounters {
  std::uint64_t sent = 0;
  std::uint64_t failed = 0;
  std::uint64_t retries = 0;
  std::uint64_t feedback_received = 0;
};

// Simulated IMU client: streams samples to the server at a fixed rate on its
// own thread, numbering them seq = 0, 1, 2, ...
class SimClient {
 public:
  ~SimClient();
  SimClient(const SimClient&) = delete;
  SimClient& operator=(const SimClient&) = delete;

  void join();
  bool done() const { return done_.load(std::memory_order_acquire); }
  SenderCounters counters() const;
  std::optional<SectorCommand> last_feedback() const;

 private:
  friend std::unique_ptr<SimClient> run_sim_client(ClientId, std::vector<ImuSample>, const std::string&, double);

  SimClient() = default;
  void run(std::vector<ImuSample> stream, double rate_hz, const std::stop_token& stop);

  ClientId client_id_ = 0;
  int fd_ = -1;
  bool address_ok_ = false;
  std::vector<std::byte> address_;  // sockaddr_in bytes
  std::atomic<std::uint64_t> sent_{0}, failed_{0}, retries_{0}, feedback_{0};
  std::atomic<bool> done_{false};
  mutable std::mutex feedback_mutex_;
  std::optional<SectorCommand> last_feedback_;
  std::jthread thread_;
};

// IMU source fed by a live TelemetryServer. A request for samples up to
// t_end blocks until the wall clock has passed start + t_end + slack, then
// drains the server backlog.
class NetworkImuSource : public BufferedImuSource {
 public:
  NetworkImuSource(TelemetryServer& server, std::int64_t start_ns, double slack_s = 0.05)
      : server_(server), start_ns_(start_ns), slack_s_(slack_s) {}
  std::vector<ImuSample> samples(ClientId client, double t_end) override;
  ImuFeedCounters counters() const override;

 private:
  TelemetryServer& server_;
  std::int64_t start_ns_;
  double slack_s_;
};

// server_address is "host:port" (IPv4 dotted quad or "localhost").
std::unique_ptr<SimClient> run_sim_client(ClientId client_id, std::vector<ImuSample> imu_stream,
                                          const std::string& server_address, double rate_hz);

}  // namespace p2pbeam
