#include "p2pbeam/sources.hpp"

#include "p2pbeam/capture.hpp"
#include "p2pbeam/wire.hpp"

namespace p2pbeam {

ScenarioImuSource::ScenarioImuSource(const Scenario& scenario)
    : scenario_(scenario), consumed_until_(scenario.client_count(), 0.0) {}

std::vector<ImuSample> ScenarioImuSource::samples(ClientId client, double t_end) {
  double& from = consumed_until_.at(client);
  if (t_end <= from) return {};
  std::vector<ImuSample> out = scenario_.imu_samples(client, from, t_end);
  for (auto& s : out) s = quantize(s);
  from = t_end;
  return out;
}

std::vector<ImuSample> BufferedImuSource::samples(ClientId client, double t_end) {
  std::vector<ImuSample> out;
  auto& q = pending_[client];
  while (!q.empty() && q.front().timestamp_s <= t_end) {
    out.push_back(q.front());
    q.pop_front();
  }
  return out;
}

std::vector<PointCloudFrame> RecordingRadarSource::window(std::int64_t frame_index) {
  auto w = inner_.window(frame_index);
  for (std::size_t i = 0; i < w.size(); ++i) writer_.write_radar(w[i], static_cast<std::uint32_t>(i));
  return w;
}

std::vector<ImuSample> RecordingImuSource::samples(ClientId client, double t_end) {
  auto s = inner_.samples(client, t_end);
  for (const auto& x : s) writer_.write_imu(x);
  return s;
}

}  // namespace p2pbeam
