#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "p2pbeam/sources.hpp"
#include "p2pbeam/types.hpp"

namespace p2pbeam {

// Capture files are a concatenation of records:
//   u32 LE payload length | payload
// where payload[0] is a tag:
//   0 config   : UTF-8 scenario config JSON
//   1 radar    : i64 frame_index | f64 timestamp_s | u32 instant | u32 n | n x (f64 x, y, z, doppler)
//   2 imu      : 40-byte IMU datagram
enum class CaptureTag : std::uint8_t { kConfig = 0, kRadar = 1, kImu = 2 };

class CaptureWriter {
 public:
  explicit CaptureWriter(const std::filesystem::path& path);
  void write_config(const std::string& config_json);
  void write_radar(const PointCloudFrame& frame, std::uint32_t instant);
  void write_imu(const ImuSample& sample);
  void flush() { out_.flush(); }

 private:
  void write_record(CaptureTag tag, const std::vector<std::byte>& body);
  std::ofstream out_;
};

struct Capture {
  std::string config_json;
  std::map<std::int64_t, std::vector<PointCloudFrame>> radar;  // per frame, instants in order
  std::vector<ImuSample> imu;                                  // in recorded order
};

// Throws DecodeError on truncated or unknown records.
Capture read_capture(const std::filesystem::path& path);

class CaptureRadarSource : public RadarSource {
 public:
  explicit CaptureRadarSource(const Capture& capture) : capture_(capture) {}
  std::vector<PointCloudFrame> window(std::int64_t frame_index) override;

 private:
  const Capture& capture_;
};

class CaptureImuSource : public BufferedImuSource {
 public:
  explicit CaptureImuSource(const Capture& capture);
};

}  // namespace p2pbeam
