#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <vector>

#include "p2pbeam/scenario.hpp"
#include "p2pbeam/types.hpp"

namespace p2pbeam {

class CaptureWriter;

// Supplies every radar measurement instant of a frame window.
class RadarSource {
 public:
  virtual ~RadarSource() = default;
  virtual std::vector<PointCloudFrame> window(std::int64_t frame_index) = 0;
};

struct ImuFeedCounters {
  std::uint64_t reordered = 0;
  std::uint64_t malformed = 0;
};

// Supplies IMU samples in timestamp order; each sample is returned once.
class ImuSource {
 public:
  virtual ~ImuSource() = default;
  // All not-yet-returned samples of `client` with timestamp <= t_end.
  virtual std::vector<ImuSample> samples(ClientId client, double t_end) = 0;
  virtual ImuFeedCounters counters() const { return {}; }
};

class ScenarioRadarSource : public RadarSource {
 public:
  explicit ScenarioRadarSource(const Scenario& scenario) : scenario_(scenario) {}
  std::vector<PointCloudFrame> window(std::int64_t frame_index) override {
    return scenario_.sample_radar_window(frame_index);
  }

 private:
  const Scenario& scenario_;
};

// In-process IMU feed. Samples pass through the wire codec so they match what
// the network path would deliver.
class ScenarioImuSource : public ImuSource {
 public:
  explicit ScenarioImuSource(const Scenario& scenario);
  std::vector<ImuSample> samples(ClientId client, double t_end) override;

 private:
  const Scenario& scenario_;
  std::vector<double> consumed_until_;
};

// Buffers samples and hands them out by timestamp.
class BufferedImuSource : public ImuSource {
 public:
  void push(const ImuSample& s) { pending_[s.client_id].push_back(s); }
  std::vector<ImuSample> samples(ClientId client, double t_end) override;

 protected:
  std::map<ClientId, std::deque<ImuSample>> pending_;
};

// Tees everything read from the wrapped sources into a capture file.
class RecordingRadarSource : public RadarSource {
 public:
  RecordingRadarSource(RadarSource& inner, CaptureWriter& writer) : inner_(inner), writer_(writer) {}
  std::vector<PointCloudFrame> window(std::int64_t frame_index) override;

 private:
  RadarSource& inner_;
  CaptureWriter& writer_;
};

class RecordingImuSource : public ImuSource {
 public:
  RecordingImuSource(ImuSource& inner, CaptureWriter& writer) : inner_(inner), writer_(writer) {}
  std::vector<ImuSample> samples(ClientId client, double t_end) override;
  ImuFeedCounters counters() const override { return inner_.counters(); }

 private:
  ImuSource& inner_;
  CaptureWriter& writer_;
};

}  // namespace p2pbeam
