#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>
#include <string>

#include "p2pbeam/errors.hpp"
#include "p2pbeam/telemetry.hpp"

namespace p2pbeam {

struct TelemetryServer::Endpoint {
  ClientId client_id = 0;
  int fd = -1;
  std::uint16_t port = 0;
  std::atomic<std::uint64_t> received{0}, accepted{0}, reordered{0}, malformed{0}, feedback_sent{0};
  std::mutex peer_mutex;
  std::optional<sockaddr_in> peer;
  std::jthread thread;
};

TelemetryServer::TelemetryServer(std::vector<ClientId> clients) : store_(std::move(clients)) {}

TelemetryServer::~TelemetryServer() { stop(); }

void TelemetryServer::stop() {
  for (auto& ep : endpoints_) {
    if (ep->thread.joinable()) {
      ep->thread.request_stop();
      ep->thread.join();
    }
  }
  for (auto& ep : endpoints_) {
    if (ep->fd >= 0) {
      ::close(ep->fd);
      ep->fd = -1;
    }
  }
}

TelemetryServer::Endpoint& TelemetryServer::endpoint(ClientId id) {
  return const_cast<Endpoint&>(static_cast<const TelemetryServer&>(*this).endpoint(id));
}

const TelemetryServer::Endpoint& TelemetryServer::endpoint(ClientId id) const {
  for (const auto& ep : endpoints_)
    if (ep->client_id == id) return *ep;
  throw LookupError("unknown client_id " + std::to_string(id));
}

std::uint16_t TelemetryServer::port(ClientId id) const { return endpoint(id).port; }

ServerCounters TelemetryServer::counters(ClientId id) const {
  const Endpoint& ep = endpoint(id);
  return {ep.received.load(), ep.accepted.load(), ep.reordered.load(), ep.malformed.load(), ep.feedback_sent.load()};
}

ServerCounters TelemetryServer::totals() const {
  ServerCounters t;
  for (const auto& ep : endpoints_) {
    const auto c = counters(ep->client_id);
    t.received += c.received;
    t.accepted += c.accepted;
    t.reordered += c.reordered;
    t.malformed += c.malformed;
    t.feedback_sent += c.feedback_sent;
  }
  return t;
}

bool TelemetryServer::send_feedback(const SectorCommand& cmd) {
  Endpoint& ep = endpoint(cmd.client_id);
  std::optional<sockaddr_in> peer;
  {
    std::lock_guard lock(ep.peer_mutex);
    peer = ep.peer;
  }
  if (!peer) return false;
  const auto bytes = encode(cmd);
  const ssize_t n = ::sendto(ep.fd, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&*peer),
                             sizeof(sockaddr_in));
  if (n != static_cast<ssize_t>(bytes.size())) return false;
  ep.feedback_sent.fetch_add(1, std::memory_order_relaxed);
  return true;
}

void TelemetryServer::receive_loop(Endpoint& ep, const std::stop_token& stop) {
  std::array<std::byte, 2048> buf{};
  while (!stop.stop_requested()) {
    pollfd pfd{ep.fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 20);
    if (ready <= 0) continue;
    sockaddr_in from{};
    socklen_t from_len = sizeof(from);
    const ssize_t n =
        ::recvfrom(ep.fd, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &from_len);
    if (n < 0) continue;
    ep.received.fetch_add(1, std::memory_order_relaxed);
    ImuSample sample;
    try {
      sample = decode(std::span<const std::byte>(buf.data(), static_cast<std::size_t>(n)));
    } catch (const DecodeError&) {
      ep.malformed.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    if (sample.client_id != ep.client_id) {
      ep.malformed.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    {
      std::lock_guard lock(ep.peer_mutex);
      ep.peer = from;
    }
    if (store_.publish(sample, steady_now_ns()) == PublishResult::kAccepted)
      ep.accepted.fetch_add(1, std::memory_order_relaxed);
    else
      ep.reordered.fetch_add(1, std::memory_order_relaxed);
  }
}

std::unique_ptr<TelemetryServer> serve(const std::vector<PortBinding>& bindings, const std::string& bind_address) {
  std::set<std::uint16_t> ports;
  std::vector<ClientId> ids;
  for (const auto& b : bindings) {
    if (b.port != 0 && !ports.insert(b.port).second)
      throw ValidationError("ports", "port " + std::to_string(b.port) + " bound twice");
    ids.push_back(b.client_id);
  }
  in_addr addr{};
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr) != 1)
    throw NetworkError("invalid bind address " + bind_address);

  std::unique_ptr<TelemetryServer> server(new TelemetryServer(ids));
  for (const auto& b : bindings) {
    auto ep = std::make_unique<TelemetryServer::Endpoint>();
    ep->client_id = b.client_id;
    ep->fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (ep->fd < 0) throw NetworkError(std::string("socket: ") + std::strerror(errno));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(b.port);
    sa.sin_addr = addr;
    if (::bind(ep->fd, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
      const std::string err = std::strerror(errno);
      ::close(ep->fd);
      throw NetworkError("bind " + bind_address + ":" + std::to_string(b.port) + ": " + err);
    }
    socklen_t len = sizeof(sa);
    ::getsockname(ep->fd, reinterpret_cast<sockaddr*>(&sa), &len);
    ep->port = ntohs(sa.sin_port);
    server->endpoints_.push_back(std::move(ep));
  }
  for (auto& ep : server->endpoints_) {
    TelemetryServer::Endpoint* raw = ep.get();
    TelemetryServer* self = server.get();
    raw->thread = std::jthread([self, raw](std::stop_token st) { self->receive_loop(*raw, st); });
  }
  return server;
}

}  // namespace p2pbeam
