#include "p2pbeam/report.hpp"

#include <json.hpp>

#include "p2pbeam/errors.hpp"
#include "p2pbeam/metrics.hpp"

namespace p2pbeam {

using Json = nlohmann::ordered_json;

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json vec2(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Json per_client(const auto& fn) {
  Json out = Json::array();
  for (int i = 0; i < 2; ++i) out.push_back(fn(i));
  return out;
}

}  // namespace

std::string frame_report_json(const FrameReport& r) {
  Json j;
  j["type"] = "frame";
  j["frame_index"] = r.frame_index;
  j["cluster_count"] = r.cluster_count;
  j["rejected_clusters"] = r.rejected_clusters;
  j["bindings"] = per_client([&](int i) { return opt(r.bindings[i]); });
  j["filtered_pose"] = per_client([&](int i) -> Json {
    if (!r.filtered_poses[i]) return nullptr;
    const auto& p = *r.filtered_poses[i];
    Json o;
    o["position"] = vec2(p.position);
    o["velocity"] = vec2(p.velocity);
    o["predicted_only"] = p.predicted_only;
    return o;
  });
  j["imu"] = per_client([&](int i) -> Json {
    if (!r.imu[i]) return nullptr;
    const auto& s = *r.imu[i];
    Json o;
    o["seq"] = s.seq;
    o["timestamp_s"] = s.timestamp_s;
    o["yaw_rad"] = s.yaw_rad;
    o["velocity"] = vec2(s.velocity);
    return o;
  });
  j["beam_decisions"] = per_client([&](int i) -> Json {
    if (!r.beam_decisions[i]) return nullptr;
    const auto& d = *r.beam_decisions[i];
    Json o;
    o["client_id"] = d.client_id;
    o["sector"] = d.sector;
    o["bearing_deg"] = d.bearing_deg;
    o["elevation_deg"] = d.elevation_deg;
    o["in_beamspace"] = d.in_beamspace;
    o["clamped"] = d.clamped;
    return o;
  });
  j["gain_proxy"] = per_client([&](int i) {
    Json o;
    o["algorithm"] = opt(r.gain_proxy[i].algorithm);
    o["baseline"] = opt(r.gain_proxy[i].baseline);
    o["baseline_sector"] = opt(r.baseline_sectors[i]);
    o["baseline_frames_spent"] = opt(r.baseline_frames_spent[i]);
    return o;
  });
  const FrameErrorFlags& f = r.error_flags;
  Json e;
  e["error_flag_in"] = f.error_flag_in;
  e["identification_ran"] = f.identification_ran;
  e["identification_error"] = f.identification_error;
  e["lost"] = Json::array({f.lost[0], f.lost[1]});
  e["reacquired"] = Json::array({f.reacquired[0], f.reacquired[1]});
  e["reacquire_failed"] = Json::array({f.reacquire_failed[0], f.reacquire_failed[1]});
  e["geometry_error"] = f.geometry_error;
  e["error_flag_out"] = f.error_flag_out;
  j["error_flags"] = e;
  Json t;
  t["frame_start_s"] = r.timing.frame_start_s;
  t["radar_timestamp_s"] = r.timing.radar_timestamp_s;
  j["timing"] = t;
  return j.dump();
}

std::string run_report_json(const RunReport& r) {
  Json j;
  j["type"] = "run";
  j["frames_processed"] = r.frames_processed;
  j["rms_error_m"] = Json::array({r.rms_error_m[0], r.rms_error_m[1]});
  Json g;
  g["algorithm"] = opt(r.mean_gain_algorithm);
  g["baseline"] = opt(r.mean_gain_baseline);
  j["mean_gain_proxy"] = g;
  j["identification_error_count"] = r.identification_error_count;
  j["dropped_datagrams"] = r.dropped_datagrams;
  j["malformed_datagrams"] = r.malformed_datagrams;
  Json b;
  b["decisions"] = r.beam.decisions;
  b["mutual_beamspace"] = r.beam.mutual_beamspace;
  b["eligible"] = r.beam.eligible;
  b["sector_match"] = r.beam.sector_match;
  b["mean_baseline_frames_spent"] = r.beam.mean_frames_spent;
  j["beam"] = b;
  Json rows = Json::array();
  for (const auto& row : r.intersections) {
    Json o;
    o["client_id"] = row.client_id;
    o["intersection"] = row.intersection;
    o["frame_index"] = row.frame_index;
    o["mutual_beamspace"] = row.mutual_beamspace;
    o["algorithm_gain"] = opt(row.algorithm_gain);
    o["baseline_gain"] = opt(row.baseline_gain);
    o["baseline_frames_spent"] = opt(row.baseline_frames_spent);
    rows.push_back(o);
  }
  j["intersections"] = rows;
  return j.dump();
}

LoggedRun read_run_log(std::istream& in) {
  LoggedRun log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "run") {
        log.has_run_report = true;
        continue;
      }
      if (type != "frame") throw DecodeError("unknown record type '" + type + "'");
      log.frame_indices.push_back(j.at("frame_index").get<std::int64_t>());
      const Json& poses = j.at("filtered_pose");
      for (int i = 0; i < 2; ++i) {
        const Json& p = poses.at(static_cast<std::size_t>(i));
        if (p.is_null()) continue;
        const Json& pos = p.at("position");
        log.filtered_positions[i].emplace_back(pos.at(0).get<double>(), pos.at(1).get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError("log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

std::array<double, 2> rms_from_log(const LoggedRun& log, const ScenarioConfig& config) {
  if (config.clients.size() != 2) throw ValidationError("clients", "expected two clients");
  std::array<double, 2> out{};
  for (int i = 0; i < 2; ++i) out[i] = compute_rms(log.filtered_positions[i], config.clients[i]);
  return out;
}

}  // namespace p2pbeam
