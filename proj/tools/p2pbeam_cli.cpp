// p2pbeam command line: run scenarios, recompute RMS from logs, replay captures.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "p2pbeam/capture.hpp"
#include "p2pbeam/errors.hpp"
#include "p2pbeam/pipeline.hpp"
#include "p2pbeam/report.hpp"
#include "p2pbeam/telemetry.hpp"

namespace {

using namespace p2pbeam;

struct LogSink {
  std::ofstream file;
  std::ostream* out = &std::cout;

  explicit LogSink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot open log file " + path);
    out = &file;
  }
};

ScenarioConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = path.empty() ? default_p_path_config() : load_scenario_config(path);
  if (seed) cfg.seed = *seed;
  validate(cfg);
  return cfg;
}

std::vector<std::uint16_t> parse_ports(const std::string& text) {
  std::vector<std::uint16_t> ports;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int p = 0;
    try {
      p = std::stoi(item);
    } catch (...) {
      throw ValidationError("ports", "not a port number: '" + item + "'");
    }
    if (p <= 0 || p > 65535) throw ValidationError("ports", "port out of range: " + item);
    ports.push_back(static_cast<std::uint16_t>(p));
  }
  if (ports.size() != 2) throw ValidationError("ports", "expected two ports A,B");
  if (ports[0] == ports[1]) throw ValidationError("ports", "ports must differ");
  return ports;
}

void print_summary(const RunReport& r, bool timing) {
  std::fprintf(stderr, "frames %lld  rms A %.4f m  rms B %.4f m  id errors %llu\n",
               static_cast<long long>(r.frames_processed), r.rms_error_m[0], r.rms_error_m[1],
               static_cast<unsigned long long>(r.identification_error_count));
  if (r.mean_gain_algorithm || r.mean_gain_baseline)
    std::fprintf(stderr, "mean gain proxy  algorithm %s  baseline %s\n",
                 r.mean_gain_algorithm ? std::to_string(*r.mean_gain_algorithm).c_str() : "-",
                 r.mean_gain_baseline ? std::to_string(*r.mean_gain_baseline).c_str() : "-");
  if (timing) std::fprintf(stderr, "max frame compute %.3f ms\n", r.max_compute_s * 1e3);
}

RunReport run_live(const ScenarioConfig& cfg, const std::vector<std::uint16_t>& ports, RunOptions options,
                   CaptureWriter* capture) {
  const Scenario scenario(cfg);
  auto server = serve({{0, ports[0]}, {1, ports[1]}});
  std::vector<std::unique_ptr<SimClient>> clients;
  const std::int64_t start = steady_now_ns();
  for (ClientId id = 0; id < 2; ++id) {
    auto stream = scenario.imu_samples(id, 0.0, cfg.duration_s);
    clients.push_back(run_sim_client(id, std::move(stream), "127.0.0.1:" + std::to_string(server->port(id)),
                                     cfg.imu.rate_hz));
  }
  options.on_sector = [&](const SectorCommand& cmd) { server->send_feedback(cmd); };
  ScenarioRadarSource radar(scenario);
  NetworkImuSource imu(*server, start);
  RunReport report;
  if (capture) {
    RecordingRadarSource rec_radar(radar, *capture);
    RecordingImuSource rec_imu(imu, *capture);
    report = run_scenario(scenario, rec_radar, rec_imu, options);
  } else {
    report = run_scenario(scenario, radar, imu, options);
  }
  for (auto& c : clients) c->join();
  server->stop();
  for (ClientId id = 0; id < 2; ++id) {
    const ServerCounters c = server->counters(id);
    std::fprintf(stderr, "client %u  received %llu  accepted %llu  reordered %llu  malformed %llu  feedback %llu\n", id,
                 static_cast<unsigned long long>(c.received), static_cast<unsigned long long>(c.accepted),
                 static_cast<unsigned long long>(c.reordered), static_cast<unsigned long long>(c.malformed),
                 static_cast<unsigned long long>(c.feedback_sent));
  }
  return report;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& mode,
            const std::string& log_path, const std::string& ports_text, const std::string& capture_path, bool timing) {
  const ScenarioConfig cfg = load_config(config_path, seed);
  LogSink sink(log_path);
  JsonlWriter writer(*sink.out);
  RunOptions options;
  options.mode = parse_run_mode(mode);
  options.on_frame = [&](const FrameReport& r) { writer.write(r); };

  std::unique_ptr<CaptureWriter> capture;
  if (!capture_path.empty()) {
    capture = std::make_unique<CaptureWriter>(capture_path);
    capture->write_config(dump_scenario_config(cfg));
  }

  RunReport report;
  if (!ports_text.empty()) {
    report = run_live(cfg, parse_ports(ports_text), options, capture.get());
  } else {
    const Scenario scenario(cfg);
    ScenarioRadarSource radar(scenario);
    ScenarioImuSource imu(scenario);
    if (capture) {
      RecordingRadarSource rec_radar(radar, *capture);
      RecordingImuSource rec_imu(imu, *capture);
      report = run_scenario(scenario, rec_radar, rec_imu, options);
    } else {
      report = run_scenario(scenario, radar, imu, options);
    }
  }
  writer.write(report);
  if (capture) capture->flush();
  print_summary(report, timing);
  return 0;
}

int cmd_replay(const std::string& capture_path, const std::string& mode, const std::string& log_path, bool timing) {
  const Capture capture = read_capture(capture_path);
  const ScenarioConfig cfg = parse_scenario_config(capture.config_json);
  const Scenario scenario(cfg);
  CaptureRadarSource radar(capture);
  CaptureImuSource imu(capture);
  LogSink sink(log_path);
  JsonlWriter writer(*sink.out);
  RunOptions options;
  options.mode = parse_run_mode(mode);
  options.on_frame = [&](const FrameReport& r) { writer.write(r); };
  const RunReport report = run_scenario(scenario, radar, imu, options);
  writer.write(report);
  print_summary(report, timing);
  return 0;
}

int cmd_rms(const std::string& log_path, const std::string& config_path) {
  std::ifstream in(log_path);
  if (!in) throw Error("cannot open log file " + log_path);
  const LoggedRun log = read_run_log(in);
  const ScenarioConfig cfg = load_config(config_path, std::nullopt);
  const auto rms = rms_from_log(log, cfg);
  std::printf("frames %zu\nrms_error_m %.6f %.6f\n", log.frame_indices.size(), rms[0], rms[1]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar and IMU aided peer-to-peer mmWave beam tracking"};
  app.require_subcommand(1);

  std::string config_path, mode = "algorithm", log_path, ports, capture_path;
  std::optional<std::uint64_t> seed;
  bool timing = false;

  auto* run = app.add_subcommand("run", "Run a scenario through the pipeline");
  run->add_option("--config", config_path, "Scenario config (JSON); defaults to the built-in P-path scenario");
  run->add_option("--mode", mode, "algorithm | beamscan | both")->check(CLI::IsMember({"algorithm", "beamscan", "both"}));
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--log", log_path, "JSONL log path (default: stdout)");
  run->add_option("--ports", ports, "Live UDP telemetry on ports A,B (loopback)");
  run->add_option("--capture", capture_path, "Record radar and IMU inputs to a capture file");
  run->add_flag("--timing", timing, "Print wall-clock frame timing to stderr");

  std::string rms_log, rms_config;
  auto* rms = app.add_subcommand("rms", "Recompute per-client RMS from a run log");
  rms->add_option("--log", rms_log, "JSONL log")->required();
  rms->add_option("--config", rms_config, "Scenario config used for the run");

  std::string replay_capture, replay_log, replay_mode = "algorithm";
  auto* replay = app.add_subcommand("replay", "Re-run the pipeline from a capture file");
  replay->add_option("--capture", replay_capture, "Capture file")->required();
  replay->add_option("--mode", replay_mode, "algorithm | beamscan | both")
      ->check(CLI::IsMember({"algorithm", "beamscan", "both"}));
  replay->add_option("--log", replay_log, "JSONL log path (default: stdout)");
  replay->add_flag("--timing", timing, "Print wall-clock frame timing to stderr");

  std::optional<std::uint64_t> config_seed;
  auto* config = app.add_subcommand("config", "Print the built-in default scenario config");
  config->add_option("--seed", config_seed, "Seed to embed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, mode, log_path, ports, capture_path, timing);
    if (*rms) return cmd_rms(rms_log, rms_config);
    if (*replay) return cmd_replay(replay_capture, replay_mode, replay_log, timing);
    if (*config) {
      std::cout << dump_scenario_config(default_p_path_config(config_seed.value_or(42))) << '\n';
      return 0;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid %s: %s\n", e.field().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
