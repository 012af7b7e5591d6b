#include "p2pbeam/beam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "p2pbeam/errors.hpp"
#include "rng.hpp"

namespace p2pbeam {

namespace {

int bin(double value, double span, int n, bool& clamped) {
  const double half = span / 2.0;
  if (value < -half || value > half) clamped = true;
  const double pitch = span / n;
  const auto idx = static_cast<int>(std::floor((std::clamp(value, -half, half) + half) / pitch));
  return std::clamp(idx, 0, n - 1);
}

}  // namespace

void validate(const SectorTable& t) {
  if (t.n_az < 1) throw ValidationError("n_az", "must be >= 1");
  if (t.n_el < 1) throw ValidationError("n_el", "must be >= 1");
  if (!(t.az_span_deg > 0.0)) throw ValidationError("az_span_deg", "must be > 0");
  if (!(t.el_span_deg > 0.0)) throw ValidationError("el_span_deg", "must be > 0");
}

double SectorTable::center_az(int sector) const {
  return -az_span_deg / 2.0 + (static_cast<double>(sector % n_az) + 0.5) * az_pitch();
}

double SectorTable::center_el(int sector) const {
  return -el_span_deg / 2.0 + (static_cast<double>(sector / n_az) + 0.5) * el_pitch();
}

double beam_angle(const Vec2& self_pos, double self_heading_rad, const Vec2& peer_pos) {
  const Vec2 d = peer_pos - self_pos;
  if (d.norm() == 0.0) throw GeometryError("beam_angle: coincident positions, bearing undefined");
  return wrap_deg(rad_to_deg(std::atan2(d.y(), d.x()) - self_heading_rad));
}

bool in_beamspace(double bearing_deg) { return std::abs(bearing_deg) <= 90.0; }

SectorChoice angle_to_sector(double bearing_deg, double elevation_deg, const SectorTable& table) {
  validate(table);
  SectorChoice out;
  const int col = bin(bearing_deg, table.az_span_deg, table.n_az, out.clamped);
  const int row = bin(elevation_deg, table.el_span_deg, table.n_el, out.clamped);
  out.sector = row * table.n_az + col;
  return out;
}

double simulate_gain(int sector, double true_bearing_deg, double true_elev_deg, const SectorTable& table) {
  validate(table);
  if (sector < 0 || sector >= table.count()) throw RangeError("sector index out of range");
  const double da = (table.center_az(sector) - true_bearing_deg) / table.az_pitch();
  const double de = (table.center_el(sector) - true_elev_deg) / table.el_pitch();
  const double d = std::sqrt(da * da + de * de);
  const double g = std::max(0.0, 1.0 - d);
  return 100.0 * g * g;
}

int best_sector(double true_bearing_deg, double true_elev_deg, const SectorTable& table) {
  int best = 0;
  double best_gain = -1.0;
  for (int s = 0; s < table.count(); ++s) {
    const double g = simulate_gain(s, true_bearing_deg, true_elev_deg, table);
    if (g > best_gain) {
      best_gain = g;
      best = s;
    }
  }
  return best;
}

BeamScanResult beam_scan_baseline(double true_bearing_deg, double true_elev_deg, const SectorTable& table,
                                  int group_size, double gain_noise_sigma, std::uint64_t noise_seed) {
  validate(table);
  if (group_size < 1) throw ValidationError("group_size", "must be >= 1");
  auto rng = detail::make_rng(noise_seed, 0xbea5ca11);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto read = [&](double gain) { return gain_noise_sigma > 0.0 ? gain + gain_noise_sigma * noise(rng) : gain; };

  const int n = table.count();
  BeamScanResult out;

  int best_group = 0;
  double best_group_read = -std::numeric_limits<double>::infinity();
  for (int g = 0; g * group_size < n; ++g) {
    double group_best = 0.0;
    for (int s = g * group_size; s < std::min(n, (g + 1) * group_size); ++s)
      group_best = std::max(group_best, simulate_gain(s, true_bearing_deg, true_elev_deg, table));
    const double r = read(group_best);
    ++out.frames_spent;
    if (r > best_group_read) {
      best_group_read = r;
      best_group = g;
    }
  }

  double best_read = -std::numeric_limits<double>::infinity();
  for (int s = best_group * group_size; s < std::min(n, (best_group + 1) * group_size); ++s) {
    const double r = read(simulate_gain(s, true_bearing_deg, true_elev_deg, table));
    ++out.frames_spent;
    if (r > best_read) {
      best_read = r;
      out.sector = s;
    }
  }
  return out;
}

}  // namespace p2pbeam
