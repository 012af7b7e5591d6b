#include "p2pbeam/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "p2pbeam/errors.hpp"
#include "p2pbeam/metrics.hpp"

namespace p2pbeam {

RunMode parse_run_mode(const std::string& text) {
  if (text == "algorithm") return RunMode::kAlgorithm;
  if (text == "beamscan") return RunMode::kBeamscan;
  if (text == "both") return RunMode::kBoth;
  throw ValidationError("mode", "unknown mode '" + text + "' (expected algorithm, beamscan or both)");
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kAlgorithm:
      return "algorithm";
    case RunMode::kBeamscan:
      return "beamscan";
    case RunMode::kBoth:
      return "both";
  }
  return "algorithm";
}

PipelineConfig default_pipeline_config(const ScenarioConfig& scenario) {
  PipelineConfig cfg;
  double speed = 0.0;
  for (const auto& c : scenario.clients) speed = std::max(speed, c.speed_mps);
  cfg.threshold.v_mean_mps = speed;
  cfg.threshold.v_std_mps = 0.2 * speed;
  cfg.kalman.dt_nominal_s = scenario.frame_time_s;
  return cfg;
}

Pipeline::Pipeline(const ScenarioConfig& scenario, PipelineConfig config)
    : scenario_(scenario), config_(std::move(config)), monitors_{ReacquireMonitor(config_.reacquire_limit),
                                                                 ReacquireMonitor(config_.reacquire_limit)} {
  validate(scenario_);
  if (scenario_.clients.size() != 2) throw ValidationError("clients", "the pipeline tracks exactly two clients");
  validate(config_.dbscan);
  validate(config_.kalman);
  validate(config_.sectors);
  if (!(config_.gate_sigma > 0.0)) throw ValidationError("gate_sigma", "must be > 0");
  if (config_.reacquire_limit < 1) throw ValidationError("reacquire_limit", "must be >= 1");
  threshold_m_ = displacement_threshold(config_.threshold, scenario_.frame_time_s);
  for (ClientId id = 0; id < 2; ++id) {
    PathTrack track(scenario_.clients[id]);
    imu_.emplace_back(id, track.heading(0.0), config_.imu);
  }
}

void Pipeline::inject_error() {
  bound_ = {};
  error_flag_ = true;
  ++identification_errors_;
}

Pipeline::ImuWindowStats Pipeline::advance_imu(ClientId id, ImuSource& source, double t_radar, double) {
  ImuWindowStats stats;
  ImuTracker& tracker = imu_.at(id);
  Vec2 sum = Vec2::Zero();
  for (const auto& s : source.samples(id, t_radar)) {
    tracker.process(s);
    sum += tracker.horizontal_velocity();
    ++stats.count;
    stats.latest = s;
  }
  stats.mean_velocity = stats.count > 0 ? Vec2(sum / static_cast<double>(stats.count)) : tracker.horizontal_velocity();
  return stats;
}

std::optional<int> Pipeline::nearest_in_gate(const KalmanState& predicted, const ClusterFrame& frame,
                                             int exclude) const {
  std::optional<int> best;
  double best_sigma = std::numeric_limits<double>::infinity();
  for (const auto& c : frame.clusters) {
    if (c.label == exclude) continue;
    const double s = innovation_sigma(predicted, c.core_point, config_.kalman);
    if (s <= config_.gate_sigma && s < best_sigma) {
      best_sigma = s;
      best = c.label;
    }
  }
  return best;
}

FrameReport Pipeline::run_frame(std::int64_t frame_index, const std::vector<PointCloudFrame>& radar_window,
                                ImuSource& imu) {
  if (radar_window.size() < 2) throw ContractError("radar window needs at least two measurement instants");
  FrameReport report;
  report.frame_index = frame_index;
  const PointCloudFrame& radar = radar_window[radar_window.size() - 2];
  const double t_radar = radar.timestamp_s;
  const double t_end = static_cast<double>(frame_index + 1) * scenario_.frame_time_s;
  report.timing.frame_start_s = static_cast<double>(frame_index) * scenario_.frame_time_s;
  report.timing.radar_timestamp_s = t_radar;

  FrameErrorFlags& flags = report.error_flags;
  flags.error_flag_in = error_flag_;

  // IMU up to the radar instant.
  for (ClientId id = 0; id < 2; ++id) {
    const ImuWindowStats st = advance_imu(id, imu, t_radar, t_end);
    imu_velocity_[id] = st.mean_velocity;
    yaw_at_radar_[id] = imu_[id].yaw();
    if (st.latest) {
      report.imu[id] = ImuSnapshot{st.latest->seq, st.latest->timestamp_s, yaw_at_radar_[id], imu_[id].horizontal_velocity()};
    }
  }

  // Clustering and cluster update.
  const DbscanResult db = dbscan(radar.points, config_.dbscan);
  const std::vector<Cluster> moving = filter_background(db.clusters, config_.doppler_zero_tol);
  ClusterFrame curr = update_clusters(prev_, moving, threshold_m_, scenario_.frame_time_s, labels_, frame_index);
  report.cluster_count = curr.clusters.size();
  report.rejected_clusters = curr.rejected;

  const double dt = scenario_.frame_time_s;
  std::array<std::optional<KalmanState>, 2> predicted;
  for (int i = 0; i < 2; ++i) {
    if (kf_[i]) predicted[i] = kf_predict(*kf_[i], dt, config_.kalman);
    if (bound_[i] && curr.find(*bound_[i]) == nullptr) flags.lost[i] = true;
  }
  const bool error_now = error_flag_ || flags.lost[0] || flags.lost[1];

  // Client identification.
  std::array<bool, 2> fresh_kf{false, false};
  bool identification_ok = false;
  if (should_identify({frame_index, error_now}, config_.identification)) {
    flags.identification_ran = true;
    std::vector<LabeledVelocity> velocities;
    for (const auto& c : curr.clusters)
      if (c.velocity_mps) velocities.push_back({c.label, *c.velocity_mps});
    try {
      const ClientBinding b = identify_clients(velocities, imu_velocity_, frame_index);
      const bool authoritative = frame_index >= config_.identification.first_frame &&
                                 frame_index <= config_.identification.last_frame;
      bool accept = true;
      if (!authoritative) {
        for (int i = 0; i < 2; ++i) {
          const int proposed = b.bound_labels[i];
          if (bound_[i] && *bound_[i] == proposed) continue;
          if (!predicted[i]) continue;
          const bool gate_ok =
              innovation_sigma(*predicted[i], curr.find(proposed)->core_point, config_.kalman) <= config_.gate_sigma;
          const bool stale = !bound_[i] && missed_[i] >= config_.reacquire_limit;
          if (!gate_ok && !stale) accept = false;
        }
      }
      if (accept) {
        identification_ok = true;
        for (int i = 0; i < 2; ++i) {
          const int label = b.bound_labels[i];
          const Cluster* c = curr.find(label);
          const bool keep = predicted[i] && innovation_sigma(*predicted[i], c->core_point, config_.kalman) <=
                                                config_.gate_sigma;
          if (!keep) {
            KalmanState s = kf_init(c->core_point, imu_velocity_[i], config_.kalman);
            s.last_t = t_radar;
            kf_[i] = s;
            fresh_kf[i] = true;
            monitors_[i].reset();
            missed_[i] = 0;
          }
          bound_[i] = label;
        }
      } else {
        flags.identification_error = true;
        ++identification_errors_;
      }
    } catch (const IdentificationError&) {
      flags.identification_error = true;
      ++identification_errors_;
    }
  }

  // Kalman smoothing with gated reacquisition.
  bool escalate = false;
  for (int i = 0; i < 2; ++i) {
    if (!kf_[i] || fresh_kf[i]) continue;
    const int other = bound_[1 - i].value_or(-1);
    std::optional<int> label = bound_[i];
    ReacquireAction action = ReacquireAction::kReacquire;
    if (label) {
      if (const Cluster* c = curr.find(*label))
        action = kf_reacquire(*predicted[i], c->core_point, config_.gate_sigma, config_.kalman);
    }
    if (action == ReacquireAction::kReacquire) {
      const std::optional<int> found = nearest_in_gate(*predicted[i], curr, other);
      if (found) {
        flags.reacquired[i] = true;
        label = found;
        action = ReacquireAction::kAccept;
      }
    }
    KalmanState next;
    if (action == ReacquireAction::kAccept) {
      bound_[i] = *label;
      missed_[i] = 0;
      next = kf_step(*kf_[i], curr.find(*label)->core_point, dt, config_.kalman);
    } else {
      bound_[i].reset();
      ++missed_[i];
      next = *predicted[i];
      next.predicted_only = true;
    }
    next.last_t = t_radar;
    kf_[i] = next;
    if (monitors_[i].record(action)) {
      flags.reacquire_failed[i] = true;
      escalate = true;
      ++identification_errors_;
      monitors_[i].reset();
    }
  }

  // Re-anchor inertial velocity on the radar track while both are healthy.
  for (int i = 0; i < 2; ++i) {
    report.bindings[i] = bound_[i];
    if (!kf_[i]) continue;
    report.filtered_poses[i] = FilteredPose{kf_[i]->position(), kf_[i]->velocity(), kf_[i]->predicted_only};
    if (bound_[i] && !kf_[i]->predicted_only && imu_[i].calibrated()) imu_[i].reanchor_velocity(kf_[i]->velocity());
  }

  // Beam selection.
  if (kf_[0] && kf_[1]) {
    for (int i = 0; i < 2; ++i) {
      try {
        BeamDecision d;
        d.client_id = static_cast<ClientId>(i);
        d.bearing_deg = beam_angle(kf_[i]->position(), yaw_at_radar_[i], kf_[1 - i]->position());
        d.elevation_deg = config_.beam_elevation_deg;
        d.in_beamspace = in_beamspace(d.bearing_deg);
        const SectorChoice sc = angle_to_sector(d.bearing_deg, d.elevation_deg, config_.sectors);
        d.sector = sc.sector;
        d.clamped = sc.clamped;
        report.beam_decisions[i] = d;
      } catch (const GeometryError&) {
        flags.geometry_error = true;
      }
    }
  }

  // Remaining IMU samples of the frame window.
  for (ClientId id = 0; id < 2; ++id)
    for (const auto& s : imu.samples(id, t_end)) imu_[id].process(s);

  const bool unbound = !bound_[0] || !bound_[1];
  if (identification_ok)
    error_flag_ = escalate || (unbound && frame_index >= config_.identification.first_frame);
  else
    error_flag_ = escalate || (error_now && frame_index >= config_.identification.first_frame) ||
                  (unbound && frame_index > config_.identification.last_frame);
  flags.error_flag_out = error_flag_;
  prev_ = std::move(curr);
  return report;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Truth {
  Vec2 position[2];
  double heading[2];
};

}  // namespace

RunReport run_scenario(const Scenario& scenario, RadarSource& radar, ImuSource& imu, const RunOptions& options) {
  const ScenarioConfig& cfg = scenario.config();
  Pipeline pipeline(cfg, options.pipeline ? *options.pipeline : default_pipeline_config(cfg));
  const SectorTable& table = pipeline.config().sectors;
  const bool want_alg = options.mode != RunMode::kBeamscan;
  const bool want_scan = options.mode != RunMode::kAlgorithm;
  const double half_pitch = 0.5 * table.az_pitch();

  RunReport run;
  std::array<std::vector<Vec2>, 2> tracks;
  std::vector<FrameReport> kept;  // only the fields needed for intersections
  double alg_sum = 0.0, scan_sum = 0.0, spent_sum = 0.0;
  std::uint64_t gain_n = 0, spent_n = 0;

  const std::int64_t frames = scenario.frame_count();
  for (std::int64_t f = 0; f < frames; ++f) {
    if (std::find(options.inject_errors_at.begin(), options.inject_errors_at.end(), f) !=
        options.inject_errors_at.end())
      pipeline.inject_error();
    const auto window = radar.window(f);
    const auto t0 = std::chrono::steady_clock::now();
    FrameReport rep = pipeline.run_frame(f, window, imu);
    rep.compute_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.max_compute_s = std::max(run.max_compute_s, rep.compute_s);

    const double t = rep.timing.radar_timestamp_s;
    Truth truth{};
    for (int i = 0; i < 2; ++i) {
      const GroundTruthPose g = scenario.client_truth(static_cast<ClientId>(i), t);
      truth.position[i] = g.position;
      truth.heading[i] = g.heading;
    }
    std::array<double, 2> true_bearing{};
    for (int i = 0; i < 2; ++i)
      true_bearing[i] = beam_angle(truth.position[i], truth.heading[i], truth.position[1 - i]);
    const bool mutual = in_beamspace(true_bearing[0]) && in_beamspace(true_bearing[1]);

    for (int i = 0; i < 2; ++i) {
      if (rep.filtered_poses[i]) tracks[i].push_back(rep.filtered_poses[i]->position);
      if (!rep.beam_decisions[i]) continue;
      const BeamDecision& d = *rep.beam_decisions[i];
      const double el = d.elevation_deg;
      ++run.beam.decisions;
      if (want_alg) rep.gain_proxy[i].algorithm = simulate_gain(d.sector, true_bearing[i], el, table);
      if (want_scan) {
        const std::uint64_t seed = mix(cfg.seed ^ mix(static_cast<std::uint64_t>(f) * 2 + static_cast<std::uint64_t>(i)));
        const BeamScanResult r = beam_scan_baseline(true_bearing[i], el, table, pipeline.config().scan_group_size,
                                                    pipeline.config().scan_gain_noise_sigma, seed);
        rep.gain_proxy[i].baseline = simulate_gain(r.sector, true_bearing[i], el, table);
        rep.baseline_sectors[i] = r.sector;
        rep.baseline_frames_spent[i] = r.frames_spent;
        spent_sum += r.frames_spent;
        ++spent_n;
      }
      if (!mutual) continue;
      ++run.beam.mutual_beamspace;
      if (rep.gain_proxy[i].algorithm) alg_sum += *rep.gain_proxy[i].algorithm;
      if (rep.gain_proxy[i].baseline) scan_sum += *rep.gain_proxy[i].baseline;
      ++gain_n;
      if (std::abs(wrap_deg(d.bearing_deg - true_bearing[i])) < half_pitch) {
        ++run.beam.eligible;
        if (d.sector == angle_to_sector(true_bearing[i], el, table).sector) ++run.beam.sector_match;
      }
    }

    if (options.on_sector) {
      for (int i = 0; i < 2; ++i) {
        const auto& d = rep.beam_decisions[i];
        if (!d || !d->in_beamspace) continue;
        options.on_sector(SectorCommand{d->client_id, static_cast<std::uint32_t>(f), static_cast<float>(d->bearing_deg),
                                        static_cast<std::uint32_t>(d->sector)});
      }
    }
    if (options.on_frame) options.on_frame(rep);
    kept.push_back(std::move(rep));
  }

  run.frames_processed = frames;
  run.identification_error_count = pipeline.identification_errors();
  const ImuFeedCounters counters = imu.counters();
  run.dropped_datagrams = counters.reordered;
  run.malformed_datagrams = counters.malformed;
  for (int i = 0; i < 2; ++i)
    run.rms_error_m[i] = tracks[i].empty() ? 0.0 : compute_rms(tracks[i], cfg.clients[i]);
  if (gain_n > 0) {
    if (want_alg) run.mean_gain_algorithm = alg_sum / static_cast<double>(gain_n);
    if (want_scan) run.mean_gain_baseline = scan_sum / static_cast<double>(gain_n);
  }
  if (spent_n > 0) run.beam.mean_frames_spent = spent_sum / static_cast<double>(spent_n);

  // Path vertices after the start: the frame whose radar instant is nearest the vertex time.
  if (options.mode == RunMode::kBoth && frames > 0) {
    for (int i = 0; i < 2; ++i) {
      const PathTrack& track = scenario.client_track(static_cast<ClientId>(i));
      const std::size_t n = track.spec().waypoints.size();
      for (std::size_t w = 1; w < n; ++w) {
        const double tw = track.waypoint_time(w);
        std::int64_t best = 0;
        double best_dt = std::numeric_limits<double>::infinity();
        for (const auto& rep : kept) {
          const double d = std::abs(rep.timing.radar_timestamp_s - tw);
          if (d < best_dt) {
            best_dt = d;
            best = rep.frame_index;
          }
        }
        const FrameReport& rep = kept[static_cast<std::size_t>(best)];
        IntersectionRow row;
        row.client_id = static_cast<ClientId>(i);
        row.intersection = static_cast<int>(w);
        row.frame_index = best;
        const double t = rep.timing.radar_timestamp_s;
        const GroundTruthPose a = scenario.client_truth(0, t);
        const GroundTruthPose b = scenario.client_truth(1, t);
        row.mutual_beamspace = in_beamspace(beam_angle(a.position, a.heading, b.position)) &&
                               in_beamspace(beam_angle(b.position, b.heading, a.position));
        row.algorithm_gain = rep.gain_proxy[i].algorithm;
        row.baseline_gain = rep.gain_proxy[i].baseline;
        row.baseline_frames_spent = rep.baseline_frames_spent[i];
        run.intersections.push_back(row);
      }
    }
  }
  return run;
}

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const Scenario scenario(config);
  ScenarioRadarSource radar(scenario);
  ScenarioImuSource imu(scenario);
  return run_scenario(scenario, radar, imu, options);
}

}  // namespace p2pbeam
