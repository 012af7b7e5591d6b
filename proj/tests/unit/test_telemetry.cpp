#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <random>
#include <thread>

#include "p2pbeam/errors.hpp"
#include "p2pbeam/latest_store.hpp"
#include "p2pbeam/telemetry.hpp"
#include "p2pbeam/wire.hpp"

using namespace p2pbeam;
using namespace std::chrono_literals;

namespace {

float f32_at(const ImuDatagram& d, std::size_t offset) {
  float f = 0.0f;
  std::memcpy(&f, d.data() + offset, sizeof f);
  return f;
}

// Payload fully determined by seq so a mixed read is detectable.
ImuSample stamped(ClientId id, std::uint32_t seq) {
  ImuSample s;
  s.client_id = id;
  s.seq = seq;
  s.timestamp_s = seq * 1e-3;
  s.accel_mps2 = Vec3(seq, 2.0 * seq, 3.0 * seq);
  s.gyro_radps = Vec3(-1.0 * seq, -2.0 * seq, 0.5 * seq);
  return s;
}

bool consistent(const ImuSample& s) { return s == stamped(s.client_id, s.seq); }

void send_raw(std::uint16_t port, const void* data, std::size_t n) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  ::inet_pton(AF_INET, "127.0.0.1", &sa.sin_addr);
  ::sendto(fd, data, n, 0, reinterpret_cast<const sockaddr*>(&sa), sizeof sa);
  ::close(fd);
}

template <class Pred>
bool wait_for(Pred pred, std::chrono::milliseconds limit = 2000ms) {
  const auto end = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < end) {
    if (pred()) return true;
    std::this_thread::sleep_for(2ms);
  }
  return pred();
}

}  // namespace

TEST(Wire, ZeroSample) {
  const ImuSample zero;
  const auto d = encode(zero);
  EXPECT_EQ(d.size(), 40u);
  for (auto b : d) EXPECT_EQ(b, std::byte{0});
  EXPECT_EQ(decode(d), zero);
}

TEST(Wire, AccelOffsets) {
  ImuSample s;
  s.client_id = 1;
  s.seq = 0x01020304;
  s.accel_mps2 = Vec3(0, 0, 9.81);
  const auto d = encode(s);
  EXPECT_EQ(f32_at(d, 16), 0.0f);
  EXPECT_EQ(f32_at(d, 20), 0.0f);
  EXPECT_EQ(f32_at(d, 24), 9.81f);
  EXPECT_EQ(d[4], std::byte{0x04});  // little-endian seq
  EXPECT_EQ(d[7], std::byte{0x01});
}

TEST(Wire, RandomRoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 5.0);
  std::uniform_int_distribution<std::uint32_t> u;
  for (int i = 0; i < 1000; ++i) {
    ImuSample s;
    s.client_id = u(rng) % 4;
    s.seq = u(rng);
    s.timestamp_s = std::abs(g(rng)) * 100;
    s.accel_mps2 = Vec3(g(rng), g(rng), g(rng));
    s.gyro_radps = Vec3(g(rng), g(rng), g(rng));
    const ImuSample q = quantize(s);
    EXPECT_EQ(decode(encode(q)), q);
    EXPECT_EQ(decode(encode(s)).timestamp_s, s.timestamp_s);
  }
}

TEST(Wire, WrongLengthAndNonFinite) {
  std::array<std::byte, 39> short_buf{};
  EXPECT_THROW(decode(short_buf), DecodeError);
  ImuSample s;
  s.accel_mps2.x() = std::numeric_limits<double>::infinity();
  EXPECT_THROW(decode(encode(s)), DecodeError);
}

TEST(Wire, SectorCommandRoundTrip) {
  const SectorCommand c{1, 42, -12.5f, 39};
  const auto d = encode(c);
  EXPECT_EQ(d.size(), 16u);
  EXPECT_EQ(decode_sector_command(d), c);
  std::array<std::byte, 15> bad{};
  EXPECT_THROW(decode_sector_command(bad), DecodeError);
}

TEST(LatestStore, AbsentBeforeData) {
  LatestStore store({0, 1});
  const auto snap = store.snapshot();
  ASSERT_EQ(snap.size(), 2u);
  for (const auto& e : snap) EXPECT_FALSE(e.sample.has_value());
  store.publish(stamped(0, 1), steady_now_ns());
  store.publish(stamped(1, 1), steady_now_ns());
  for (const auto& e : store.snapshot()) {
    ASSERT_TRUE(e.sample.has_value());
    EXPECT_GE(e.age_s, 0.0);
  }
}

TEST(LatestStore, KeepsHighestSeq) {
  LatestStore store({0});
  EXPECT_EQ(store.publish(stamped(0, 5), 1), PublishResult::kAccepted);
  EXPECT_EQ(store.publish(stamped(0, 3), 2), PublishResult::kStale);
  EXPECT_EQ(store.read(0)->sample.seq, 5u);
  EXPECT_EQ(store.drain(0).size(), 1u);
  EXPECT_TRUE(store.drain(0).empty());
}

TEST(LatestStore, NoTornReadsUnderConcurrentWrites) {
  LatestStore store({0, 1});
  std::atomic<bool> stop{false};
  std::vector<std::jthread> writers;
  for (ClientId id = 0; id < 2; ++id)
    writers.emplace_back([&, id] {
      for (std::uint32_t seq = 1; !stop.load(std::memory_order_relaxed); ++seq) {
        store.publish(stamped(id, seq), steady_now_ns());
        if (seq % 64 == 0) store.drain(id);
      }
    });
  // Writers may not have been scheduled yet.
  ASSERT_TRUE(wait_for([&] { return store.read(0) && store.read(1); }));
  int present = 0;
  std::uint32_t last[2] = {0, 0};
  for (int i = 0; i < 10000; ++i) {
    for (const auto& e : store.snapshot()) {
      if (!e.sample) continue;
      ++present;
      ASSERT_TRUE(consistent(*e.sample)) << "seq " << e.sample->seq;
      ASSERT_GE(e.sample->seq, last[e.client_id]);
      last[e.client_id] = e.sample->seq;
    }
  }
  stop = true;
  writers.clear();
  EXPECT_GT(present, 0);
}

TEST(TelemetryServer, LoopbackDeliveryAndCounters) {
  auto server = serve({{0, 0}, {1, 0}});
  ASSERT_NE(server->port(0), server->port(1));
  for (ClientId id = 0; id < 2; ++id)
    for (std::uint32_t seq : {1u, 2u, 7u, 4u}) {
      const auto d = encode(stamped(id, seq));
      send_raw(server->port(id), d.data(), d.size());
    }
  ASSERT_TRUE(wait_for([&] { return server->totals().received == 8; }));
  for (ClientId id = 0; id < 2; ++id) {
    EXPECT_EQ(server->store().read(id)->sample.seq, 7u);
    EXPECT_EQ(server->counters(id).reordered, 1u);
    EXPECT_EQ(server->counters(id).accepted, 3u);
  }
  server->stop();
}

TEST(TelemetryServer, MalformedDatagramIsCounted) {
  auto server = serve({{0, 0}, {1, 0}});
  std::array<std::byte, 39> junk{};
  send_raw(server->port(0), junk.data(), junk.size());
  ASSERT_TRUE(wait_for([&] { return server->counters(0).received == 1; }));
  EXPECT_EQ(server->counters(0).malformed, 1u);
  EXPECT_FALSE(server->store().read(0).has_value());
  // A well-formed datagram for the wrong client is malformed on this port too.
  const auto d = encode(stamped(1, 3));
  send_raw(server->port(0), d.data(), d.size());
  ASSERT_TRUE(wait_for([&] { return server->counters(0).received == 2; }));
  EXPECT_EQ(server->counters(0).malformed, 2u);
}

TEST(TelemetryServer, DuplicatePortsRejected) {
  auto first = serve({{0, 0}});
  EXPECT_THROW(serve({{0, first->port(0)}, {1, 0}}), NetworkError);
}

TEST(SimClient, StreamsToServerAndReceivesFeedback) {
  auto server = serve({{0, 0}, {1, 0}});
  std::vector<std::unique_ptr<SimClient>> clients;
  const auto t0 = std::chrono::steady_clock::now();
  for (ClientId id = 0; id < 2; ++id) {
    std::vector<ImuSample> stream;
    for (std::uint32_t k = 0; k < 100; ++k) stream.push_back(stamped(id, k));
    clients.push_back(run_sim_client(id, stream, "127.0.0.1:" + std::to_string(server->port(id)), 100.0));
  }
  ASSERT_TRUE(wait_for([&] { return server->store().read(0).has_value(); }));
  EXPECT_TRUE(server->send_feedback({0, 3, 12.0f, 39}));
  for (auto& c : clients) c->join();
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_GT(elapsed, 0.95);
  EXPECT_LT(elapsed, 3.0);
  ASSERT_TRUE(wait_for([&] { return server->totals().received == 200; }));
  for (ClientId id = 0; id < 2; ++id) {
    EXPECT_EQ(clients[id]->counters().sent, 100u);
    EXPECT_EQ(clients[id]->counters().failed, 0u);
    EXPECT_EQ(server->store().read(id)->sample.seq, 99u);
  }
  ASSERT_TRUE(clients[0]->last_feedback().has_value());
  EXPECT_EQ(clients[0]->last_feedback()->sector, 39u);
  EXPECT_FALSE(clients[1]->last_feedback().has_value());
}

TEST(SimClient, UnusableAddressCountsFailures) {
  std::vector<ImuSample> stream;
  for (std::uint32_t k = 0; k < 20; ++k) stream.push_back(stamped(0, k));
  auto c = run_sim_client(0, stream, "256.0.0.1:9001", 1000.0);
  c->join();
  EXPECT_EQ(c->counters().sent, 0u);
  EXPECT_EQ(c->counters().failed, 20u);
  EXPECT_GT(c->counters().retries, 0u);
}

TEST(SimClient, RejectsNonPositiveRate) {
  EXPECT_THROW(run_sim_client(0, {}, "127.0.0.1:9001", 0.0), ValidationError);
}
