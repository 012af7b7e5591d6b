#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "p2pbeam/errors.hpp"
#include "p2pbeam/scenario.hpp"

namespace p2pbeam {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where.empty() ? "<root>" : where, "expected an object");
  std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, _] : obj.items()) {
    if (!keys.count(k)) throw ValidationError(where.empty() ? k : where + "." + k, "unknown key");
  }
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback,
                  bool required = false) {
  const std::string field = where.empty() ? key : where + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ValidationError(field, "missing required key");
    return fallback;
  }
  if (!obj[key].is_number()) throw ValidationError(field, "expected a number");
  return obj[key].get<double>();
}

Vec2 get_vec2(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(field, "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

Vec3 get_vec3(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
    throw ValidationError(field, "expected [x, y, z]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

PathSpec parse_path(const json& j, const std::string& where) {
  reject_unknown(j, where, {"waypoints", "speed_mps", "initial_hold_s"});
  PathSpec p;
  if (!j.contains("waypoints") || !j["waypoints"].is_array())
    throw ValidationError(where + ".waypoints", "expected a list of [x, y]");
  for (std::size_t i = 0; i < j["waypoints"].size(); ++i)
    p.waypoints.push_back(get_vec2(j["waypoints"][i], where + ".waypoints[" + std::to_string(i) + "]"));
  p.speed_mps = get_number(j, "speed_mps", where, p.speed_mps, true);
  p.initial_hold_s = get_number(j, "initial_hold_s", where, 0.0);
  return p;
}

json path_to_json(const PathSpec& p) {
  json w = json::array();
  for (const auto& v : p.waypoints) w.push_back({v.x(), v.y()});
  return {{"waypoints", w}, {"speed_mps", p.speed_mps}, {"initial_hold_s", p.initial_hold_s}};
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("<root>", std::string("malformed config: ") + e.what());
  }
  reject_unknown(root, "",
                 {"frame_time_s", "duration_s", "radar_pose", "clients", "clutter", "distractors",
                  "noise_sigma_m", "body_radius_m", "points_per_client_per_frame", "seed", "radar",
                  "imu"});
  ScenarioConfig c;
  c.frame_time_s = get_number(root, "frame_time_s", "", c.frame_time_s, true);
  c.duration_s = get_number(root, "duration_s", "", c.duration_s, true);
  c.noise_sigma_m = get_number(root, "noise_sigma_m", "", c.noise_sigma_m);
  c.body_radius_m = get_number(root, "body_radius_m", "", c.body_radius_m);
  if (root.contains("points_per_client_per_frame")) {
    if (!root["points_per_client_per_frame"].is_number_integer())
      throw ValidationError("points_per_client_per_frame", "expected an integer");
    c.points_per_client_per_frame = root["points_per_client_per_frame"].get<int>();
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw ValidationError("seed", "expected a non-negative integer");
    c.seed = root["seed"].get<std::uint64_t>();
  }

  if (root.contains("radar_pose")) {
    const auto& rp = root["radar_pose"];
    reject_unknown(rp, "radar_pose", {"position", "mounting_height_m"});
    if (rp.contains("position")) c.radar_pose.position = get_vec3(rp["position"], "radar_pose.position");
    c.radar_pose.mounting_height_m =
        get_number(rp, "mounting_height_m", "radar_pose", c.radar_pose.mounting_height_m);
  }

  if (!root.contains("clients") || !root["clients"].is_array())
    throw ValidationError("clients", "expected a list of paths");
  for (std::size_t i = 0; i < root["clients"].size(); ++i)
    c.clients.push_back(parse_path(root["clients"][i], "clients[" + std::to_string(i) + "]"));

  if (root.contains("distractors")) {
    if (!root["distractors"].is_array()) throw ValidationError("distractors", "expected a list");
    for (std::size_t i = 0; i < root["distractors"].size(); ++i)
      c.distractors.push_back(parse_path(root["distractors"][i], "distractors[" + std::to_string(i) + "]"));
  }

  if (root.contains("clutter")) {
    if (!root["clutter"].is_array()) throw ValidationError("clutter", "expected a list");
    for (std::size_t i = 0; i < root["clutter"].size(); ++i) {
      const std::string where = "clutter[" + std::to_string(i) + "]";
      const auto& o = root["clutter"][i];
      reject_unknown(o, where, {"position", "point_count", "radius_m"});
      ClutterObject obj;
      if (!o.contains("position")) throw ValidationError(where + ".position", "missing required key");
      obj.position = get_vec2(o["position"], where + ".position");
      if (o.contains("point_count")) {
        if (!o["point_count"].is_number_integer())
          throw ValidationError(where + ".point_count", "expected an integer");
        obj.point_count = o["point_count"].get<int>();
      }
      obj.radius_m = get_number(o, "radius_m", where, obj.radius_m);
      c.clutter.push_back(obj);
    }
  }

  if (root.contains("radar")) {
    const auto& r = root["radar"];
    reject_unknown(r, "radar",
                   {"instants_per_frame", "doppler_noise_mps", "fov_deg", "boresight_deg", "max_range_m"});
    if (r.contains("instants_per_frame")) {
      if (!r["instants_per_frame"].is_number_integer())
        throw ValidationError("radar.instants_per_frame", "expected an integer");
      c.radar.instants_per_frame = r["instants_per_frame"].get<int>();
    }
    c.radar.doppler_noise_mps = get_number(r, "doppler_noise_mps", "radar", c.radar.doppler_noise_mps);
    c.radar.fov_deg = get_number(r, "fov_deg", "radar", c.radar.fov_deg);
    c.radar.boresight_deg = get_number(r, "boresight_deg", "radar", c.radar.boresight_deg);
    c.radar.max_range_m = get_number(r, "max_range_m", "radar", c.radar.max_range_m);
  }

  if (root.contains("imu")) {
    const auto& m = root["imu"];
    reject_unknown(m, "imu", {"rate_hz", "accel_noise_mps2", "gyro_noise_radps", "accel_bias_mps2",
                              "gyro_bias_radps"});
    c.imu.rate_hz = get_number(m, "rate_hz", "imu", c.imu.rate_hz);
    c.imu.accel_noise_mps2 = get_number(m, "accel_noise_mps2", "imu", c.imu.accel_noise_mps2);
    c.imu.gyro_noise_radps = get_number(m, "gyro_noise_radps", "imu", c.imu.gyro_noise_radps);
    if (m.contains("accel_bias_mps2")) c.imu.accel_bias_mps2 = get_vec3(m["accel_bias_mps2"], "imu.accel_bias_mps2");
    if (m.contains("gyro_bias_radps")) c.imu.gyro_bias_radps = get_vec3(m["gyro_bias_radps"], "imu.gyro_bias_radps");
  }

  validate(c);
  return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("<file>", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config(ss.str());
}

std::string dump_scenario_config(const ScenarioConfig& c) {
  json root;
  root["frame_time_s"] = c.frame_time_s;
  root["duration_s"] = c.duration_s;
  const Vec3& rp = c.radar_pose.position;
  root["radar_pose"] = {{"position", {rp.x(), rp.y(), rp.z()}},
                        {"mounting_height_m", c.radar_pose.mounting_height_m}};
  root["clients"] = json::array();
  for (const auto& p : c.clients) root["clients"].push_back(path_to_json(p));
  root["distractors"] = json::array();
  for (const auto& p : c.distractors) root["distractors"].push_back(path_to_json(p));
  root["clutter"] = json::array();
  for (const auto& o : c.clutter)
    root["clutter"].push_back({{"position", {o.position.x(), o.position.y()}},
                               {"point_count", o.point_count},
                               {"radius_m", o.radius_m}});
  root["noise_sigma_m"] = c.noise_sigma_m;
  root["body_radius_m"] = c.body_radius_m;
  root["points_per_client_per_frame"] = c.points_per_client_per_frame;
  root["seed"] = c.seed;
  root["radar"] = {{"instants_per_frame", c.radar.instants_per_frame},
                   {"doppler_noise_mps", c.radar.doppler_noise_mps},
                   {"fov_deg", c.radar.fov_deg},
                   {"boresight_deg", c.radar.boresight_deg},
                   {"max_range_m", c.radar.max_range_m}};
  const auto& ab = c.imu.accel_bias_mps2;
  const auto& gb = c.imu.gyro_bias_radps;
  root["imu"] = {{"rate_hz", c.imu.rate_hz},
                 {"accel_noise_mps2", c.imu.accel_noise_mps2},
                 {"gyro_noise_radps", c.imu.gyro_noise_radps},
                 {"accel_bias_mps2", {ab.x(), ab.y(), ab.z()}},
                 {"gyro_bias_radps", {gb.x(), gb.y(), gb.z()}}};
  return root.dump(2);
}

ScenarioConfig default_p_path_config(std::uint64_t seed) {
  ScenarioConfig c;
  c.frame_time_s = 0.5;
  c.duration_s = 17.0;
  c.noise_sigma_m = 0.05;
  c.body_radius_m = 0.25;
  c.points_per_client_per_frame = 400;
  c.seed = seed;

  // Client 0 writes a "P" stem-first; client 1 writes its "P" from the bowl end.
  PathSpec a;
  a.waypoints = {{-2.5, 2.0}, {-2.5, 5.0}, {-1.0, 5.0}, {-1.0, 3.5}, {-2.5, 3.5}};
  a.speed_mps = 0.5;
  a.initial_hold_s = 1.2;
  PathSpec b;
  b.waypoints = {{1.0, 3.1}, {2.5, 3.1}, {2.5, 4.6}, {1.0, 4.6}, {1.0, 1.6}};
  b.speed_mps = 0.5;
  b.initial_hold_s = 1.2;
  c.clients = {a, b};

  PathSpec walker;
  walker.waypoints = {{3.5, 7.0}, {-3.5, 7.0}, {3.5, 7.0}};
  walker.speed_mps = 0.6;
  walker.initial_hold_s = 0.0;
  c.distractors = {walker};

  c.clutter = {{{-4.0, 6.0}, 150, 0.2}, {{3.5, 1.5}, 150, 0.2}, {{0.0, 9.0}, 30, 0.2}};
  return c;
}

}  // namespace p2pbeam
