#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "p2pbeam/geometry.hpp"
#include "p2pbeam/types.hpp"

namespace p2pbeam {

struct DbscanParams {
  double eps = 0.3;
  int min_pts = 100;
};

struct Cluster {
  int label = 0;
  Vec2 core_point = Vec2::Zero();  // centroid of members' (x, y); elevation dropped
  double mean_doppler_mps = 0.0;
  double max_abs_doppler_mps = 0.0;
  std::size_t point_count = 0;
  std::vector<std::size_t> member_indices;
  // Displacement velocity; filled in by cluster tracking, absent on first appearance.
  std::optional<Vec2> velocity_mps;
};

struct DbscanResult {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> noise;
};

void validate(const DbscanParams& params);

// Density clustering on (x, y, z). Labels follow discovery order when scanning
// points in input order; a border point joins the first cluster that reaches it.
DbscanResult dbscan(std::span<const RadarPoint> points, const DbscanParams& params);

// Zero-Doppler background rejection: drops clusters whose every member has
// |doppler| <= doppler_zero_tol.
std::vector<Cluster> filter_background(std::span<const Cluster> clusters, double doppler_zero_tol = 1e-3);

}  // namespace p2pbeam
