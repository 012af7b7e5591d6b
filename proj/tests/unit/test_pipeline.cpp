#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "p2pbeam/capture.hpp"
#include "p2pbeam/errors.hpp"
#include "p2pbeam/metrics.hpp"
#include "p2pbeam/pipeline.hpp"
#include "p2pbeam/report.hpp"

using namespace p2pbeam;

namespace {

struct LoggedResult {
  RunReport report;
  std::vector<FrameReport> frames;
  std::string log;
};

LoggedResult run_logged(const ScenarioConfig& cfg, RunOptions options) {
  LoggedResult out;
  std::ostringstream log;
  JsonlWriter writer(log);
  options.on_frame = [&](const FrameReport& f) {
    out.frames.push_back(f);
    writer.write(f);
  };
  out.report = run_scenario(cfg, options);
  writer.write(out.report);
  out.log = log.str();
  return out;
}

// Client 0 walks out of the radar's field of view and comes back; client 1
// stays in view the whole time.
ScenarioConfig occlusion_config() {
  ScenarioConfig c = default_p_path_config(8);
  c.distractors.clear();
  c.clients = {PathSpec{{{-1.0, 3.0}, {-5.0, 1.0}, {-1.0, 3.0}}, 0.8, 1.2},
               PathSpec{{{1.0, 2.0}, {1.0, 6.0}, {1.0, 2.0}}, 0.8, 1.2}};
  c.duration_s = 13.0;
  return c;
}

}  // namespace

TEST(RunMode, Parse) {
  EXPECT_EQ(parse_run_mode("both"), RunMode::kBoth);
  EXPECT_EQ(to_string(RunMode::kBeamscan), "beamscan");
  EXPECT_THROW(parse_run_mode("sideways"), ValidationError);
}

TEST(Pipeline, FirstFramesAndBinding) {
  const auto r = run_logged(default_p_path_config(3), {});
  ASSERT_GT(r.frames.size(), 3u);
  const auto& f0 = r.frames[0];
  EXPECT_GT(f0.cluster_count, 0u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_FALSE(f0.bindings[i].has_value());
    EXPECT_FALSE(f0.beam_decisions[i].has_value());
  }
  const auto& f2 = r.frames[2];
  EXPECT_TRUE(f2.error_flags.identification_ran);
  for (int i = 0; i < 2; ++i) {
    ASSERT_TRUE(f2.bindings[i].has_value());
    ASSERT_TRUE(f2.filtered_poses[i].has_value());
  }
  EXPECT_NE(*f2.bindings[0], *f2.bindings[1]);
  // Initialised near the clients' true positions.
  const Scenario s(default_p_path_config(3));
  for (ClientId i = 0; i < 2; ++i)
    EXPECT_LT((f2.filtered_poses[i]->position - s.client_truth(i, f2.timing.radar_timestamp_s).position).norm(), 0.3);
}

TEST(Pipeline, UsesPenultimateRadarInstant) {
  const auto cfg = default_p_path_config(3);
  const Scenario s(cfg);
  const auto r = run_logged(cfg, {});
  for (const auto& f : r.frames) {
    const auto w = s.sample_radar_window(f.frame_index);
    EXPECT_EQ(f.timing.radar_timestamp_s, w[w.size() - 2].timestamp_s);
  }
}

TEST(Pipeline, IdentificationQuiescentAfterFrameFiveInCleanRun) {
  const auto r = run_logged(default_p_path_config(4), {});
  std::array<std::optional<int>, 2> at5 = r.frames[5].bindings;
  for (std::size_t k = 6; k < r.frames.size(); ++k) {
    const auto& f = r.frames[k];
    if (f.error_flags.error_flag_in) break;
    EXPECT_FALSE(f.error_flags.identification_ran) << k;
  }
  EXPECT_TRUE(at5[0].has_value());
}

TEST(Pipeline, OcclusionRaisesFlagAndRebinds) {
  const auto cfg = occlusion_config();
  const Scenario s(cfg);
  const auto r = run_logged(cfg, {});
  std::optional<std::size_t> gone, back;
  for (std::size_t k = 0; k < r.frames.size(); ++k) {
    const bool vis = s.visible(s.client_truth(0, r.frames[k].timing.radar_timestamp_s).position);
    if (!vis && !gone) gone = k;
    if (gone && vis && !back) back = k;
  }
  ASSERT_TRUE(gone.has_value());
  ASSERT_TRUE(back.has_value());
  bool flagged = false;
  for (std::size_t k = *gone; k < *back; ++k) flagged |= r.frames[k].error_flags.error_flag_out;
  EXPECT_TRUE(flagged);
  bool rebound = false;
  for (std::size_t k = *back; k < std::min(r.frames.size(), *back + 3); ++k)
    rebound |= r.frames[k].bindings[0].has_value();
  EXPECT_TRUE(rebound);
  EXPECT_TRUE(r.frames.back().bindings[0].has_value());
  EXPECT_TRUE(r.frames.back().bindings[1].has_value());
}

TEST(Pipeline, RecoversWithinFiveFramesOfInjectedError) {
  const auto cfg = default_p_path_config(6);
  for (std::int64_t at : {8, 15, 24}) {
    RunOptions o;
    o.inject_errors_at = {at};
    const auto r = run_logged(cfg, o);
    ASSERT_GT(static_cast<std::int64_t>(r.frames.size()), at + 5);
    EXPECT_GE(r.report.identification_error_count, 1u);
    bool recovered = false;
    for (std::int64_t k = at; k < at + 5; ++k)
      recovered |= r.frames[k].bindings[0].has_value() && r.frames[k].bindings[1].has_value();
    EXPECT_TRUE(recovered) << "error at frame " << at;
  }
}

TEST(Metrics, RmsExamples) {
  const PathSpec p{{{0, 0}, {2, 0}, {2, 2}}, 0.5, 0.0};
  const std::vector<Vec2> on{{0, 0}, {1, 0}, {2, 1.5}};
  EXPECT_EQ(compute_rms(on, p), 0.0);
  const std::vector<Vec2> off{{1.0, 0.1}};
  EXPECT_NEAR(compute_rms(off, p), 0.1, 1e-15);
  EXPECT_THROW(compute_rms(std::vector<Vec2>{}, p), RangeError);
}

TEST(Metrics, RmsMatchesDenseSampling) {
  const auto cfg = default_p_path_config(1);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> x(-4.0, 4.0), y(0.0, 7.0);
  for (const auto& path : cfg.clients) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 200; ++i) pts.emplace_back(x(rng), y(rng));
    double sum = 0.0;
    for (const auto& q : pts) {
      const double d = oracle::sampled_path_distance(q, path);
      sum += d * d;
    }
    EXPECT_NEAR(compute_rms(pts, path), std::sqrt(sum / pts.size()), 1e-3);
  }
}

TEST(RunScenario, AlgorithmModePopulatesRms) {
  const auto r = run_logged(default_p_path_config(2), {});
  for (double e : r.report.rms_error_m) {
    EXPECT_GT(e, 0.0);
    EXPECT_LT(e, 0.25);
  }
  EXPECT_FALSE(r.report.mean_gain_baseline.has_value());
  EXPECT_TRUE(r.report.intersections.empty());
}

TEST(RunScenario, BothModeTabulatesIntersections) {
  RunOptions o;
  o.mode = RunMode::kBoth;
  const auto cfg = default_p_path_config(2);
  const auto r = run_logged(cfg, o);
  std::size_t expected = 0;
  for (const auto& c : cfg.clients) expected += c.waypoints.size() - 1;
  ASSERT_EQ(r.report.intersections.size(), expected);
  for (const auto& row : r.report.intersections) {
    EXPECT_GE(row.intersection, 1);
    if (row.mutual_beamspace) {
      EXPECT_TRUE(row.algorithm_gain.has_value());
      EXPECT_TRUE(row.baseline_gain.has_value());
      ASSERT_TRUE(row.baseline_frames_spent.has_value());
      EXPECT_GT(*row.baseline_frames_spent, 1);
    }
  }
  ASSERT_TRUE(r.report.mean_gain_algorithm.has_value());
  ASSERT_TRUE(r.report.mean_gain_baseline.has_value());
  EXPECT_GT(*r.report.mean_gain_algorithm, *r.report.mean_gain_baseline);
}

TEST(RunScenario, SameSeedSameLog) {
  RunOptions o;
  o.mode = RunMode::kBoth;
  const auto cfg = default_p_path_config(77);
  EXPECT_EQ(run_logged(cfg, o).log, run_logged(cfg, o).log);
  EXPECT_NE(run_logged(cfg, o).log, run_logged(default_p_path_config(78), o).log);
}

TEST(RunScenario, EveryFrameLoggedOnce) {
  const auto cfg = default_p_path_config(9);
  const auto r = run_logged(cfg, {});
  std::istringstream in(r.log);
  const auto logged = read_run_log(in);
  EXPECT_TRUE(logged.has_run_report);
  const std::int64_t n = Scenario(cfg).frame_count();
  ASSERT_EQ(static_cast<std::int64_t>(logged.frame_indices.size()), n);
  for (std::int64_t k = 0; k < n; ++k) EXPECT_EQ(logged.frame_indices[static_cast<std::size_t>(k)], k);
  EXPECT_EQ(r.report.frames_processed, n);
}

TEST(RunScenario, RmsRecomputedFromLogMatches) {
  const auto cfg = default_p_path_config(10);
  const auto r = run_logged(cfg, {});
  std::istringstream in(r.log);
  const auto rms = rms_from_log(read_run_log(in), cfg);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(rms[i], r.report.rms_error_m[i], 1e-9);
}

TEST(RunScenario, MalformedLogLineIsRejected) {
  std::istringstream in("{\"type\":\"frame\"\nnot json\n");
  EXPECT_THROW(read_run_log(in), DecodeError);
}

TEST(RunScenario, FrameBudget) {
  const auto cfg = default_p_path_config(11);
  RunOptions o;
  o.mode = RunMode::kBoth;
  const auto r = run_scenario(cfg, o);
  EXPECT_LT(r.max_compute_s, cfg.frame_time_s);
}

TEST(RunScenario, CaptureReplayReproducesLog) {
  const auto cfg = default_p_path_config(12);
  const auto path = std::filesystem::temp_directory_path() / "p2pbeam_capture_test.bin";
  RunOptions o;
  o.mode = RunMode::kBoth;

  std::ostringstream live_log;
  {
    JsonlWriter w(live_log);
    o.on_frame = [&](const FrameReport& f) { w.write(f); };
    CaptureWriter cap(path);
    cap.write_config(dump_scenario_config(cfg));
    const Scenario s(cfg);
    ScenarioRadarSource radar(s);
    ScenarioImuSource imu(s);
    RecordingRadarSource rr(radar, cap);
    RecordingImuSource ri(imu, cap);
    w.write(run_scenario(s, rr, ri, o));
    cap.flush();
  }

  std::ostringstream replay_log;
  {
    JsonlWriter w(replay_log);
    o.on_frame = [&](const FrameReport& f) { w.write(f); };
    const Capture cap = read_capture(path);
    const Scenario s(parse_scenario_config(cap.config_json));
    CaptureRadarSource radar(cap);
    CaptureImuSource imu(cap);
    w.write(run_scenario(s, radar, imu, o));
  }
  std::filesystem::remove(path);
  EXPECT_EQ(live_log.str(), replay_log.str());
  EXPECT_EQ(live_log.str(), run_logged(cfg, [&] {
                              RunOptions p;
                              p.mode = RunMode::kBoth;
                              return p;
                            }()).log);
}

TEST(RunScenario, TruncatedCaptureIsDecodeError) {
  const auto path = std::filesystem::temp_directory_path() / "p2pbeam_truncated.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out.write("\x10\x00\x00\x00\x01", 5);
  }
  EXPECT_THROW(read_capture(path), DecodeError);
  std::filesystem::remove(path);
}
