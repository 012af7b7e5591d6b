#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "p2pbeam/pipeline.hpp"

namespace p2pbeam {

// One JSON object per line, no trailing newline. Field order is fixed so equal
// reports serialise to equal bytes.
std::string frame_report_json(const FrameReport& report);
std::string run_report_json(const RunReport& report);

class JsonlWriter {
 public:
  explicit JsonlWriter(std::ostream& out) : out_(out) {}
  void write(const FrameReport& report) { out_ << frame_report_json(report) << '\n'; }
  void write(const RunReport& report) { out_ << run_report_json(report) << '\n'; }

 private:
  std::ostream& out_;
};

struct LoggedRun {
  std::vector<std::int64_t> frame_indices;
  std::array<std::vector<Vec2>, 2> filtered_positions;
  bool has_run_report = false;
};

// Reads a JSONL run log back. Throws DecodeError on malformed lines.
LoggedRun read_run_log(std::istream& in);

// Per-client RMS of the logged filtered positions against the configured paths.
std::array<double, 2> rms_from_log(const LoggedRun& log, const ScenarioConfig& config);

}  // namespace p2pbeam
