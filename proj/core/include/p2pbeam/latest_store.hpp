#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "p2pbeam/types.hpp"

namespace p2pbeam {

struct LatestEntry {
  ImuSample sample;
  std::int64_t received_ns = 0;  // steady-clock receive time
};

struct SnapshotEntry {
  ClientId client_id = 0;
  std::optional<ImuSample> sample;  // empty: nothing received yet
  double age_s = 0.0;
};

enum class PublishResult { kAccepted, kStale };

std::int64_t steady_now_ns();

// Per-client latest-sample slots. Each slot is a sequence lock: one writer per
// slot, any number of lock-free readers, and a reader never observes a
// half-written sample. Accepted samples are also queued in a bounded backlog
// that the frame loop drains.
class LatestStore {
 public:
  explicit LatestStore(std::vector<ClientId> clients, std::size_t backlog_capacity = 8192);
  LatestStore(const LatestStore&) = delete;
  LatestStore& operator=(const LatestStore&) = delete;

  bool has_client(ClientId id) const;
  const std::vector<ClientId>& clients() const { return clients_; }

  // Writer side. Samples with seq below the stored one are rejected.
  PublishResult publish(const ImuSample& sample, std::int64_t received_ns);

  std::optional<LatestEntry> read(ClientId id) const;
  std::vector<SnapshotEntry> snapshot(std::int64_t now_ns) const;
  std::vector<SnapshotEntry> snapshot() const { return snapshot(steady_now_ns()); }

  // Accepted samples since the previous drain, oldest first.
  std::vector<ImuSample> drain(ClientId id);
  std::uint64_t backlog_overflows(ClientId id) const;

 private:
  static constexpr std::size_t kWords = 9;

  struct Slot {
    std::atomic<std::uint64_t> version{0};
    std::array<std::atomic<std::uint64_t>, kWords> words{};
    // Writer-only state.
    std::optional<std::uint32_t> last_seq;
    // Backlog.
    mutable std::mutex backlog_mutex;
    std::deque<ImuSample> backlog;
    std::uint64_t overflows = 0;
  };

  Slot& slot(ClientId id);
  const Slot& slot(ClientId id) const;

  std::vector<ClientId> clients_;
  std::vector<std::unique_ptr<Slot>> slots_;
  std::size_t backlog_capacity_;
};

}  // namespace p2pbeam
