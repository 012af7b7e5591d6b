#include "p2pbeam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "p2pbeam/errors.hpp"

namespace p2pbeam {

double distance_to_path(const Vec2& p, const PathSpec& path) {
  const auto& w = path.waypoints;
  if (w.empty()) throw RangeError("path has no waypoints");
  if (w.size() == 1) return (p - w.front()).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const Vec2 d = w[k + 1] - w[k];
    const double len2 = d.squaredNorm();
    const double u = len2 > 0.0 ? std::clamp((p - w[k]).dot(d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (w[k] + u * d)).norm());
  }
  return best;
}

double compute_rms(std::span<const Vec2> track, const PathSpec& path) {
  if (track.empty()) throw RangeError("compute_rms: empty track");
  double sum = 0.0;
  for (const auto& p : track) {
    const double e = distance_to_path(p, path);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(track.size()));
}

}  // namespace p2pbeam
