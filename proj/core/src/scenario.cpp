#include "p2pbeam/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "p2pbeam/errors.hpp"
#include "rng.hpp"

namespace p2pbeam {

namespace {

enum Stream : std::uint64_t {
  kClientStream = 1,
  kDistractorStream = 2,
  kClutterStream = 3,
  kImuStream = 4,
};

bool finite2(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

void validate_path(const PathSpec& p, const std::string& field) {
  if (p.waypoints.size() < 2) throw ValidationError(field + ".waypoints", "need at least 2 waypoints");
  for (std::size_t i = 0; i < p.waypoints.size(); ++i) {
    if (!finite2(p.waypoints[i])) throw ValidationError(field + ".waypoints", "non-finite waypoint");
    if (i > 0 && (p.waypoints[i] - p.waypoints[i - 1]).norm() == 0.0)
      throw ValidationError(field + ".waypoints", "consecutive waypoints must be distinct");
  }
  if (!(p.speed_mps >= 0.0) || !std::isfinite(p.speed_mps))
    throw ValidationError(field + ".speed_mps", "must be >= 0");
  if (!(p.initial_hold_s >= 0.0) || !std::isfinite(p.initial_hold_s))
    throw ValidationError(field + ".initial_hold_s", "must be >= 0");
}

}  // namespace

void validate(const ScenarioConfig& c) {
  if (!(c.frame_time_s > 0.0) || !std::isfinite(c.frame_time_s))
    throw ValidationError("frame_time_s", "must be > 0");
  if (!(c.duration_s >= c.frame_time_s) || !std::isfinite(c.duration_s))
    throw ValidationError("duration_s", "must be >= frame_time_s");
  if (!(c.noise_sigma_m >= 0.0)) throw ValidationError("noise_sigma_m", "must be >= 0");
  if (!(c.body_radius_m >= 0.0)) throw ValidationError("body_radius_m", "must be >= 0");
  if (c.points_per_client_per_frame < 1)
    throw ValidationError("points_per_client_per_frame", "must be >= 1");
  if (c.clients.empty()) throw ValidationError("clients", "at least one client required");
  for (std::size_t i = 0; i < c.clients.size(); ++i)
    validate_path(c.clients[i], "clients[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < c.distractors.size(); ++i)
    validate_path(c.distractors[i], "distractors[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < c.clutter.size(); ++i) {
    const auto& o = c.clutter[i];
    const std::string f = "clutter[" + std::to_string(i) + "]";
    if (!finite2(o.position)) throw ValidationError(f + ".position", "non-finite");
    if (o.point_count < 0) throw ValidationError(f + ".point_count", "must be >= 0");
    if (!(o.radius_m >= 0.0)) throw ValidationError(f + ".radius_m", "must be >= 0");
  }
  if (!c.radar_pose.position.allFinite() || !std::isfinite(c.radar_pose.mounting_height_m))
    throw ValidationError("radar_pose", "non-finite pose");
  if (c.radar.instants_per_frame < 2)
    throw ValidationError("radar.instants_per_frame", "need >= 2 measurement instants per frame");
  if (!(c.radar.doppler_noise_mps >= 0.0))
    throw ValidationError("radar.doppler_noise_mps", "must be >= 0");
  if (!(c.radar.fov_deg > 0.0 && c.radar.fov_deg <= 360.0))
    throw ValidationError("radar.fov_deg", "must be in (0, 360]");
  if (!(c.radar.max_range_m > 0.0)) throw ValidationError("radar.max_range_m", "must be > 0");
  if (!(c.imu.rate_hz > 0.0) || !std::isfinite(c.imu.rate_hz))
    throw ValidationError("imu.rate_hz", "must be > 0");
  if (!(c.imu.accel_noise_mps2 >= 0.0)) throw ValidationError("imu.accel_noise_mps2", "must be >= 0");
  if (!(c.imu.gyro_noise_radps >= 0.0)) throw ValidationError("imu.gyro_noise_radps", "must be >= 0");
  if (!c.imu.accel_bias_mps2.allFinite()) throw ValidationError("imu.accel_bias_mps2", "non-finite");
  if (!c.imu.gyro_bias_radps.allFinite()) throw ValidationError("imu.gyro_bias_radps", "non-finite");
}

// ---------------------------------------------------------------------------
// PathTrack

PathTrack::PathTrack(PathSpec spec) : spec_(std::move(spec)) {
  validate_path(spec_, "path");
  const auto& w = spec_.waypoints;
  cumulative_.assign(w.size(), 0.0);
  unwrapped_.resize(w.size() - 1);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const Vec2 d = w[k + 1] - w[k];
    cumulative_[k + 1] = cumulative_[k] + d.norm();
    const double h = std::atan2(d.y(), d.x());
    unwrapped_[k] = k == 0 ? h : unwrapped_[k - 1] + wrap_pi(h - wrap_pi(unwrapped_[k - 1]));
  }
}

double PathTrack::motion_end_s() const {
  if (spec_.speed_mps <= 0.0) return std::numeric_limits<double>::infinity();
  return spec_.initial_hold_s + length() / spec_.speed_mps;
}

double PathTrack::distance_at(double t) const {
  if (spec_.speed_mps <= 0.0) return 0.0;
  return std::clamp((t - spec_.initial_hold_s) * spec_.speed_mps, 0.0, length());
}

std::size_t PathTrack::segment_at(double s) const {
  const std::size_t nseg = unwrapped_.size();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t k = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return std::min(k, nseg - 1);
}

Vec2 PathTrack::position(double t) const {
  const double s = distance_at(t);
  const std::size_t k = segment_at(s);
  const auto& w = spec_.waypoints;
  const Vec2 d = w[k + 1] - w[k];
  const double seg = cumulative_[k + 1] - cumulative_[k];
  if (s >= cumulative_[k + 1]) return w[k + 1];
  return w[k] + d * ((s - cumulative_[k]) / seg);
}

Vec2 PathTrack::velocity(double t) const {
  if (spec_.speed_mps <= 0.0 || t < spec_.initial_hold_s || t >= motion_end_s()) return Vec2::Zero();
  const std::size_t k = segment_at(distance_at(t));
  const Vec2 d = spec_.waypoints[k + 1] - spec_.waypoints[k];
  return d.normalized() * spec_.speed_mps;
}

double PathTrack::unwrapped_heading(double t) const {
  if (spec_.speed_mps <= 0.0 || t < spec_.initial_hold_s) return unwrapped_.front();
  if (t >= motion_end_s()) return unwrapped_.back();
  return unwrapped_[segment_at(distance_at(t))];
}

double PathTrack::heading(double t) const { return wrap_pi(unwrapped_heading(t)); }

double PathTrack::waypoint_time(std::size_t i) const {
  if (i >= spec_.waypoints.size()) throw RangeError("waypoint index out of range");
  if (spec_.speed_mps <= 0.0) return i == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return spec_.initial_hold_s + cumulative_[i] / spec_.speed_mps;
}

double PathTrack::heading_integral(double t0, double t1) const {
  if (t1 < t0) return -heading_integral(t1, t0);
  const std::size_t nseg = unwrapped_.size();
  if (spec_.speed_mps <= 0.0 || nseg == 1) return unwrapped_.front() * (t1 - t0);
  // Segment k's heading holds on [tau_k, tau_{k+1}); tau_0 = -inf, tau_nseg = +inf.
  double total = 0.0;
  for (std::size_t k = 0; k < nseg; ++k) {
    const double lo = k == 0 ? -std::numeric_limits<double>::infinity() : waypoint_time(k);
    const double hi = k + 1 == nseg ? std::numeric_limits<double>::infinity() : waypoint_time(k + 1);
    const double a = std::max(lo, t0);
    const double b = std::min(hi, t1);
    if (b > a) total += unwrapped_[k] * (b - a);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Scenario

Scenario::Scenario(ScenarioConfig config) : config_(std::move(config)) {
  validate(config_);
  for (const auto& p : config_.clients) clients_.emplace_back(p);
  for (const auto& p : config_.distractors) distractors_.emplace_back(p);

  // Static world: clutter points are drawn once and reused for every frame.
  const Vec3 origin = config_.radar_pose.origin();
  for (std::size_t i = 0; i < config_.clutter.size(); ++i) {
    const auto& obj = config_.clutter[i];
    if (!visible(obj.position)) continue;
    auto rng = detail::make_rng(config_.seed, kClutterStream, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < obj.point_count; ++k) {
      const double r = obj.radius_m * std::sqrt(unit(rng));
      const double a = 2.0 * std::numbers::pi * unit(rng);
      const double z = 0.75 + 0.2 * (unit(rng) - 0.5);
      const Vec3 p(obj.position.x() + r * std::cos(a), obj.position.y() + r * std::sin(a), z);
      const Vec3 rel = p - origin;
      clutter_points_.push_back({rel.x(), rel.y(), rel.z(), 0.0});
    }
  }
}

Scenario build_scenario(const ScenarioConfig& config) { return Scenario(config); }

const PathTrack& Scenario::client_track(ClientId id) const {
  if (id >= clients_.size()) throw LookupError("unknown client_id " + std::to_string(id));
  return clients_[id];
}

std::int64_t Scenario::frame_count() const {
  return static_cast<std::int64_t>(std::floor(config_.duration_s / config_.frame_time_s + 1e-9));
}

double Scenario::frame_start(std::int64_t frame_index) const {
  return static_cast<double>(frame_index) * config_.frame_time_s;
}

double Scenario::instant_time(std::int64_t frame_index, int instant) const {
  const int k = config_.radar.instants_per_frame;
  return frame_start(frame_index) + config_.frame_time_s * static_cast<double>(instant + 1) / k;
}

GroundTruthPose Scenario::client_truth(ClientId id, double t) const {
  if (!(t >= 0.0 && t <= config_.duration_s + 1e-12))
    throw RangeError("t = " + std::to_string(t) + " outside [0, duration]");
  const auto& track = client_track(id);
  return {id, track.position(t), track.velocity(t), track.heading(t)};
}

std::vector<GroundTruthPose> Scenario::ground_truth(double t) const {
  std::vector<GroundTruthPose> out;
  out.reserve(clients_.size());
  for (ClientId id = 0; id < clients_.size(); ++id) out.push_back(client_truth(id, t));
  return out;
}

bool Scenario::visible(const Vec2& p) const {
  const Vec3 o = config_.radar_pose.origin();
  const Vec2 d = p - Vec2(o.x(), o.y());
  const double range = d.norm();
  if (range > config_.radar.max_range_m) return false;
  if (config_.radar.fov_deg >= 360.0 || range == 0.0) return true;
  const double az = rad_to_deg(std::atan2(d.y(), d.x()));
  return std::abs(wrap_deg(az - config_.radar.boresight_deg)) <= config_.radar.fov_deg / 2.0;
}

void Scenario::emit_body(std::vector<RadarPoint>& out, const PathTrack& track, double t,
                         std::uint64_t stream, std::int64_t frame_index, int instant) const {
  const Vec2 p = track.position(t);
  if (!visible(p)) return;
  const Vec2 v = track.velocity(t);
  const Vec3 origin = config_.radar_pose.origin();

  auto rng = detail::make_rng(config_.seed, stream, static_cast<std::uint64_t>(frame_index),
                              static_cast<std::uint64_t>(instant));
  std::uniform_real_distribution<double> arc(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  // Radar-facing half of the body outline.
  const Vec2 to_radar = Vec2(origin.x(), origin.y()) - p;
  const double facing = to_radar.norm() > 0.0 ? std::atan2(to_radar.y(), to_radar.x()) : 0.0;
  const double r = config_.body_radius_m;
  const double sigma = config_.noise_sigma_m;
  const double dsigma = config_.radar.doppler_noise_mps;
  const Vec3 vel3(v.x(), v.y(), 0.0);

  for (int i = 0; i < config_.points_per_client_per_frame; ++i) {
    const double a = facing + arc(rng);
    Vec3 world(p.x() + r * std::cos(a), p.y() + r * std::sin(a), kBodyCenterHeight);
    const double nx = std_normal(rng), ny = std_normal(rng), nz = std_normal(rng), nd = std_normal(rng);
    world += sigma * Vec3(nx, ny, nz);
    const Vec3 rel = world - origin;
    const double range = rel.norm();
    const double radial = range > 0.0 ? vel3.dot(rel / range) : 0.0;
    out.push_back({rel.x(), rel.y(), rel.z(), radial + dsigma * nd});
  }
}

PointCloudFrame Scenario::sample_point_cloud(std::int64_t frame_index, int instant) const {
  if (frame_index < 0 || frame_index >= frame_count())
    throw RangeError("frame " + std::to_string(frame_index) + " outside scenario");
  if (instant < 0 || instant >= config_.radar.instants_per_frame)
    throw RangeError("instant " + std::to_string(instant) + " outside frame window");

  PointCloudFrame frame;
  frame.frame_index = frame_index;
  frame.timestamp_s = instant_time(frame_index, instant);
  const double t = frame.timestamp_s;
  const std::size_t n_bodies = clients_.size() + distractors_.size();
  frame.points.reserve(n_bodies * static_cast<std::size_t>(config_.points_per_client_per_frame) +
                       clutter_points_.size());
  for (std::size_t i = 0; i < clients_.size(); ++i)
    emit_body(frame.points, clients_[i], t, kClientStream + 16 * i, frame_index, instant);
  for (std::size_t i = 0; i < distractors_.size(); ++i)
    emit_body(frame.points, distractors_[i], t, kDistractorStream + 16 * i, frame_index, instant);
  frame.points.insert(frame.points.end(), clutter_points_.begin(), clutter_points_.end());
  return frame;
}

std::vector<PointCloudFrame> Scenario::sample_radar_window(std::int64_t frame_index) const {
  std::vector<PointCloudFrame> out;
  for (int j = 0; j < config_.radar.instants_per_frame; ++j)
    out.push_back(sample_point_cloud(frame_index, j));
  return out;
}

ImuSample Scenario::imu_at(ClientId id, double t, std::uint32_t seq, std::uint64_t key) const {
  const auto& track = client_track(id);
  const double h = kImuDiffWindow;
  // Motion is box-smoothed over h; each sample reports the mean rate over the
  // preceding sample period, so summed samples telescope to the exact change.
  const double dt = imu_period();
  const auto smoothed_yaw = [&](double x) { return track.heading_integral(x - h / 2, x + h / 2) / h; };
  const auto smoothed_vel = [&](double x) -> Vec2 { return (track.position(x + h / 2) - track.position(x - h / 2)) / h; };
  const Vec2 a_world = (smoothed_vel(t) - smoothed_vel(t - dt)) / dt;
  const double yaw = smoothed_yaw(t);
  const double yaw_rate = (yaw - smoothed_yaw(t - dt)) / dt;

  // Body frame: x forward along the (smoothed) heading, z up.
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec3 a_body(c * a_world.x() + s * a_world.y(), -s * a_world.x() + c * a_world.y(), kGravity);

  const auto& imu = config_.imu;
  auto rng = detail::make_rng(config_.seed, kImuStream + 16 * id, key);
  std::normal_distribution<double> n(0.0, 1.0);
  ImuSample out;
  out.client_id = id;
  out.seq = seq;
  out.timestamp_s = t;
  out.accel_mps2 = a_body + imu.accel_bias_mps2 + imu.accel_noise_mps2 * Vec3(n(rng), n(rng), n(rng));
  out.gyro_radps = Vec3(0.0, 0.0, yaw_rate) + imu.gyro_bias_radps +
                   imu.gyro_noise_radps * Vec3(n(rng), n(rng), n(rng));
  return out;
}

ImuSample Scenario::sample_imu(ClientId id, double t) const {
  client_track(id);
  if (!(t >= 0.0 && t <= config_.duration_s + 1e-12))
    throw RangeError("t = " + std::to_string(t) + " outside [0, duration]");
  const double n = t * config_.imu.rate_hz;
  const double rn = std::round(n);
  if (std::abs(n - rn) < 1e-9) {
    const auto seq = static_cast<std::uint32_t>(rn);
    return imu_at(id, t, seq, seq);
  }
  return imu_at(id, t, static_cast<std::uint32_t>(std::floor(n)), std::bit_cast<std::uint64_t>(t) | (1ull << 63));
}

std::vector<ImuSample> Scenario::imu_samples(ClientId id, double t0, double t1) const {
  client_track(id);
  const double rate = config_.imu.rate_hz;
  const auto first = static_cast<std::int64_t>(std::floor(t0 * rate + 1e-9)) + 1;
  const auto last = static_cast<std::int64_t>(std::floor(std::min(t1, config_.duration_s) * rate + 1e-9));
  std::vector<ImuSample> out;
  for (std::int64_t n = std::max<std::int64_t>(first, 0); n <= last; ++n) {
    const auto seq = static_cast<std::uint32_t>(n);
    out.push_back(imu_at(id, static_cast<double>(n) / rate, seq, seq));
  }
  return out;
}

}  // namespace p2pbeam
