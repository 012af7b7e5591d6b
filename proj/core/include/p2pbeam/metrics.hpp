#pragma once

#include <span>

#include "p2pbeam/geometry.hpp"
#include "p2pbeam/scenario.hpp"

namespace p2pbeam {

// Distance from p to the nearest point on the path's polyline.
double distance_to_path(const Vec2& p, const PathSpec& path);

// Root-mean-square of per-point distances to the path. Throws RangeError on an empty track.
double compute_rms(std::span<const Vec2> track, const PathSpec& path);

}  // namespace p2pbeam
