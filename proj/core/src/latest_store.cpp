#include "p2pbeam/latest_store.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <string>
#include <thread>

#include "p2pbeam/errors.hpp"

namespace p2pbeam {

std::int64_t steady_now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

LatestStore::LatestStore(std::vector<ClientId> clients, std::size_t backlog_capacity)
    : clients_(std::move(clients)), backlog_capacity_(backlog_capacity) {
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    if (std::count(clients_.begin(), clients_.end(), clients_[i]) > 1)
      throw ValidationError("clients", "duplicate client id " + std::to_string(clients_[i]));
    slots_.push_back(std::make_unique<Slot>());
  }
}

bool LatestStore::has_client(ClientId id) const {
  return std::find(clients_.begin(), clients_.end(), id) != clients_.end();
}

LatestStore::Slot& LatestStore::slot(ClientId id) {
  return const_cast<Slot&>(static_cast<const LatestStore&>(*this).slot(id));
}

const LatestStore::Slot& LatestStore::slot(ClientId id) const {
  auto it = std::find(clients_.begin(), clients_.end(), id);
  if (it == clients_.end()) throw LookupError("unknown client_id " + std::to_string(id));
  return *slots_[static_cast<std::size_t>(it - clients_.begin())];
}

PublishResult LatestStore::publish(const ImuSample& s, std::int64_t received_ns) {
  Slot& sl = slot(s.client_id);
  if (sl.last_seq && s.seq < *sl.last_seq) return PublishResult::kStale;
  sl.last_seq = s.seq;

  const std::array<std::uint64_t, kWords> w{
      (static_cast<std::uint64_t>(s.client_id) << 32) | s.seq,
      std::bit_cast<std::uint64_t>(s.timestamp_s),
      std::bit_cast<std::uint64_t>(s.accel_mps2.x()),
      std::bit_cast<std::uint64_t>(s.accel_mps2.y()),
      std::bit_cast<std::uint64_t>(s.accel_mps2.z()),
      std::bit_cast<std::uint64_t>(s.gyro_radps.x()),
      std::bit_cast<std::uint64_t>(s.gyro_radps.y()),
      std::bit_cast<std::uint64_t>(s.gyro_radps.z()),
      static_cast<std::uint64_t>(received_ns),
  };
  const std::uint64_t v = sl.version.load(std::memory_order_relaxed);
  sl.version.store(v + 1, std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_release);
  for (std::size_t i = 0; i < kWords; ++i) sl.words[i].store(w[i], std::memory_order_relaxed);
  sl.version.store(v + 2, std::memory_order_release);

  {
    std::lock_guard lock(sl.backlog_mutex);
    if (sl.backlog.size() >= backlog_capacity_) {
      sl.backlog.pop_front();
      ++sl.overflows;
    }
    sl.backlog.push_back(s);
  }
  return PublishResult::kAccepted;
}

std::optional<LatestEntry> LatestStore::read(ClientId id) const {
  const Slot& sl = slot(id);
  std::array<std::uint64_t, kWords> w{};
  std::uint64_t v1 = 0;
  for (;;) {
    v1 = sl.version.load(std::memory_order_acquire);
    if ((v1 & 1u) == 0) {
      for (std::size_t i = 0; i < kWords; ++i) w[i] = sl.words[i].load(std::memory_order_relaxed);
      std::atomic_thread_fence(std::memory_order_acquire);
      if (sl.version.load(std::memory_order_relaxed) == v1) break;
    }
    std::this_thread::yield();
  }
  if (v1 == 0) return std::nullopt;

  LatestEntry e;
  e.sample.client_id = static_cast<ClientId>(w[0] >> 32);
  e.sample.seq = static_cast<std::uint32_t>(w[0] & 0xffffffffu);
  e.sample.timestamp_s = std::bit_cast<double>(w[1]);
  e.sample.accel_mps2 = Vec3(std::bit_cast<double>(w[2]), std::bit_cast<double>(w[3]), std::bit_cast<double>(w[4]));
  e.sample.gyro_radps = Vec3(std::bit_cast<double>(w[5]), std::bit_cast<double>(w[6]), std::bit_cast<double>(w[7]));
  e.received_ns = static_cast<std::int64_t>(w[8]);
  return e;
}

std::vector<SnapshotEntry> LatestStore::snapshot(std::int64_t now_ns) const {
  std::vector<SnapshotEntry> out;
  out.reserve(clients_.size());
  for (ClientId id : clients_) {
    SnapshotEntry e;
    e.client_id = id;
    if (auto latest = read(id)) {
      e.sample = latest->sample;
      e.age_s = std::max<double>(0.0, static_cast<double>(now_ns - latest->received_ns) * 1e-9);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ImuSample> LatestStore::drain(ClientId id) {
  Slot& sl = slot(id);
  std::lock_guard lock(sl.backlog_mutex);
  std::vector<ImuSample> out(sl.backlog.begin(), sl.backlog.end());
  sl.backlog.clear();
  return out;
}

std::uint64_t LatestStore::backlog_overflows(ClientId id) const {
  const Slot& sl = slot(id);
  std::lock_guard lock(sl.backlog_mutex);
  return sl.overflows;
}

}  // namespace p2pbeam
