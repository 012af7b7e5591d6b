#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "p2pbeam/beam.hpp"
#include "p2pbeam/cluster_tracking.hpp"
#include "p2pbeam/clustering.hpp"
#include "p2pbeam/identification.hpp"
#include "p2pbeam/imu.hpp"
#include "p2pbeam/kalman.hpp"
#include "p2pbeam/scenario.hpp"
#include "p2pbeam/sources.hpp"
#include "p2pbeam/wire.hpp"

namespace p2pbeam {

enum class RunMode { kAlgorithm, kBeamscan, kBoth };

RunMode parse_run_mode(const std::string& text);
std::string to_string(RunMode mode);

struct PipelineConfig {
  DbscanParams dbscan;
  double doppler_zero_tol = 1e-3;
  ThresholdParams threshold;
  KalmanConfig kalman;
  double gate_sigma = 3.0;
  int reacquire_limit = 3;
  IdentificationPolicy identification;
  ImuTrackerConfig imu;
  SectorTable sectors;
  double beam_elevation_deg = 0.0;
  int scan_group_size = 4;
  double scan_gain_noise_sigma = 10.0;
};

// Defaults tied to the scenario: v_mean = client speed, v_std = 0.2 * speed,
// Kalman interval = frame time.
PipelineConfig default_pipeline_config(const ScenarioConfig& scenario);

struct FilteredPose {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  bool predicted_only = false;
};

struct ImuSnapshot {
  std::uint32_t seq = 0;
  double timestamp_s = 0.0;
  double yaw_rad = 0.0;
  Vec2 velocity = Vec2::Zero();
};

struct FrameErrorFlags {
  bool error_flag_in = false;      // carried in from the previous frame
  bool identification_ran = false;
  bool identification_error = false;
  std::array<bool, 2> lost{false, false};
  std::array<bool, 2> reacquired{false, false};
  std::array<bool, 2> reacquire_failed{false, false};
  bool geometry_error = false;
  bool error_flag_out = false;     // raised for the next frame
};

struct GainProxy {
  std::optional<double> algorithm;
  std::optional<double> baseline;
};

struct FrameTiming {
  double frame_start_s = 0.0;
  double radar_timestamp_s = 0.0;
};

struct FrameReport {
  std::int64_t frame_index = 0;
  std::size_t cluster_count = 0;
  std::size_t rejected_clusters = 0;
  std::array<std::optional<int>, 2> bindings;
  std::array<std::optional<FilteredPose>, 2> filtered_poses;
  std::array<std::optional<ImuSnapshot>, 2> imu;
  std::array<std::optional<BeamDecision>, 2> beam_decisions;
  std::array<GainProxy, 2> gain_proxy;
  std::array<std::optional<int>, 2> baseline_sectors;
  std::array<std::optional<int>, 2> baseline_frames_spent;
  FrameErrorFlags error_flags;
  FrameTiming timing;
  double compute_s = 0.0;  // wall clock, not logged
};

// Frame-loop state machine: IMU fusion, clustering, cluster update, client
// identification, Kalman smoothing and beam selection. Exactly two clients.
class Pipeline {
 public:
  Pipeline(const ScenarioConfig& scenario, PipelineConfig config);

  FrameReport run_frame(std::int64_t frame_index, const std::vector<PointCloudFrame>& radar_window, ImuSource& imu);

  // Fault injection: drops both bindings and raises the error flag, as a
  // failed identification would.
  void inject_error();

  const PipelineConfig& config() const { return config_; }
  const ClusterFrame& clusters() const { return prev_; }
  const std::array<std::optional<int>, 2>& bindings() const { return bound_; }
  const std::array<std::optional<KalmanState>, 2>& kalman() const { return kf_; }
  const ImuTracker& imu_tracker(ClientId id) const { return imu_.at(id); }
  std::uint64_t identification_errors() const { return identification_errors_; }

 private:
  struct ImuWindowStats {
    Vec2 mean_velocity = Vec2::Zero();
    std::size_t count = 0;
    std::optional<ImuSample> latest;
  };

  ImuWindowStats advance_imu(ClientId id, ImuSource& source, double t_radar, double t_frame_end);
  std::optional<int> nearest_in_gate(const KalmanState& predicted, const ClusterFrame& frame, int exclude) const;

  ScenarioConfig scenario_;
  PipelineConfig config_;
  double threshold_m_ = 0.0;
  LabelAllocator labels_;
  ClusterFrame prev_;
  std::vector<ImuTracker> imu_;
  std::array<Vec2, 2> imu_velocity_{Vec2::Zero(), Vec2::Zero()};
  std::array<double, 2> yaw_at_radar_{0.0, 0.0};
  std::array<std::optional<int>, 2> bound_;
  std::array<std::optional<KalmanState>, 2> kf_;
  std::array<ReacquireMonitor, 2> monitors_;
  std::array<int, 2> missed_{0, 0};  // consecutive frames without a measurement
  bool error_flag_ = false;
  std::uint64_t identification_errors_ = 0;
};

struct IntersectionRow {
  ClientId client_id = 0;
  int intersection = 0;  // 1-based waypoint index along the path
  std::int64_t frame_index = 0;
  bool mutual_beamspace = false;
  std::optional<double> algorithm_gain;
  std::optional<double> baseline_gain;
  std::optional<int> baseline_frames_spent;
};

struct BeamStats {
  std::uint64_t decisions = 0;
  std::uint64_t mutual_beamspace = 0;
  std::uint64_t eligible = 0;  // mutual beamspace and bearing error < half a sector pitch
  std::uint64_t sector_match = 0;
  double mean_frames_spent = 0.0;
};

struct RunReport {
  std::array<double, 2> rms_error_m{0.0, 0.0};
  std::optional<double> mean_gain_algorithm;
  std::optional<double> mean_gain_baseline;
  std::uint64_t identification_error_count = 0;
  std::uint64_t dropped_datagrams = 0;
  std::uint64_t malformed_datagrams = 0;
  std::int64_t frames_processed = 0;
  BeamStats beam;
  std::vector<IntersectionRow> intersections;
  double max_compute_s = 0.0;  // wall clock, not logged
};

struct RunOptions {
  RunMode mode = RunMode::kAlgorithm;
  std::optional<PipelineConfig> pipeline;
  std::function<void(const FrameReport&)> on_frame;
  std::function<void(const SectorCommand&)> on_sector;
  // Frames at which an identification error is injected.
  std::vector<std::int64_t> inject_errors_at;
};

// Runs every frame of the scenario against the given sources and scores the
// result against ground truth.
RunReport run_scenario(const Scenario& scenario, RadarSource& radar, ImuSource& imu, const RunOptions& options);
// In-process simulation (deterministic for a fixed seed).
RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options);

}  // namespace p2pbeam
