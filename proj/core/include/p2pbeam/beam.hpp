#pragma once

#include <cstdint>

#include "p2pbeam/geometry.hpp"
#include "p2pbeam/types.hpp"

namespace p2pbeam {

// Uniform tx-sector grid over the azimuth x elevation radiation space,
// indexed row-major (elevation row, azimuth column) from the lower-left corner.
struct SectorTable {
  double az_span_deg = 60.0;
  double el_span_deg = 30.0;
  int n_az = 16;
  int n_el = 4;

  int count() const { return n_az * n_el; }
  double az_pitch() const { return az_span_deg / n_az; }
  double el_pitch() const { return el_span_deg / n_el; }
  double center_az(int sector) const;
  double center_el(int sector) const;
};

void validate(const SectorTable& table);

struct SectorChoice {
  int sector = 0;
  bool clamped = false;  // input was outside the span and was pulled to an edge bin
};

struct BeamDecision {
  ClientId client_id = 0;
  double bearing_deg = 0.0;  // relative to the client's orientation
  double elevation_deg = 0.0;
  int sector = -1;
  bool in_beamspace = false;
  bool clamped = false;
};

// Bearing of peer as seen from self, relative to self's heading, in (-180, 180].
// Throws GeometryError when the positions coincide.
double beam_angle(const Vec2& self_pos, double self_heading_rad, const Vec2& peer_pos);

// The beamspace is the 180-degree half plane centred on the orientation (boundary inclusive).
bool in_beamspace(double bearing_deg);

SectorChoice angle_to_sector(double bearing_deg, double elevation_deg, const SectorTable& table);

// Pointing-quality proxy in [0, 100]: 100 * max(0, 1 - d)^2, where d is the
// angular error between sector centre and true direction measured in sector pitches.
double simulate_gain(int sector, double true_bearing_deg, double true_elev_deg, const SectorTable& table);

// Index of the sector with the highest noiseless gain (lowest index on ties).
int best_sector(double true_bearing_deg, double true_elev_deg, const SectorTable& table);

struct BeamScanResult {
  int sector = 0;
  int frames_spent = 0;
};

// Router-style grouped sector search: probe every group of `group_size`
// consecutive sectors (one frame each, best member reported), descend into the
// best group and probe its members one per frame. Every probe reads the gain
// proxy plus N(0, gain_noise_sigma) noise.
BeamScanResult beam_scan_baseline(double true_bearing_deg, double true_elev_deg, const SectorTable& table,
                                  int group_size, double gain_noise_sigma = 0.0, std::uint64_t noise_seed = 0);

}  // namespace p2pbeam
