#include <chrono>
#include <thread>

#include "p2pbeam/telemetry.hpp"

namespace p2pbeam {

std::vector<ImuSample> NetworkImuSource::samples(ClientId client, double t_end) {
  const auto due = start_ns_ + static_cast<std::int64_t>((t_end + slack_s_) * 1e9);
  const auto now = steady_now_ns();
  if (now < due) std::this_thread::sleep_for(std::chrono::nanoseconds(due - now));
  for (ClientId id : server_.store().clients())
    for (const auto& s : server_.store().drain(id)) push(s);
  return BufferedImuSource::samples(client, t_end);
}

ImuFeedCounters NetworkImuSource::counters() const {
  const ServerCounters c = server_.totals();
  return {c.reordered, c.malformed};
}

}  // namespace p2pbeam
