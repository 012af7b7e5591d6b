#include "p2pbeam/clustering.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "p2pbeam/errors.hpp"

namespace p2pbeam {

namespace {

constexpr int kUnvisited = -2;
constexpr int kNoise = -1;

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Uniform grid with cell size eps: all neighbours of a point lie in the 27
// surrounding cells.
class NeighborGrid {
 public:
  NeighborGrid(std::span<const RadarPoint> pts, double eps) : pts_(pts), eps_(eps), eps2_(eps * eps) {
    cells_.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
  }

  void query(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const RadarPoint& p = pts_[i];
    const CellKey c = key(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second) {
            const RadarPoint& q = pts_[j];
            const double ddx = p.x - q.x, ddy = p.y - q.y, ddz = p.z - q.z;
            if (ddx * ddx + ddy * ddy + ddz * ddz <= eps2_) out.push_back(j);
          }
        }
  }

 private:
  CellKey key(const RadarPoint& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / eps_)), static_cast<std::int64_t>(std::floor(p.y / eps_)),
            static_cast<std::int64_t>(std::floor(p.z / eps_))};
  }

  std::span<const RadarPoint> pts_;
  double eps_;
  double eps2_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

}  // namespace

void validate(const DbscanParams& params) {
  if (!(params.eps > 0.0) || !std::isfinite(params.eps)) throw ValidationError("eps", "must be > 0");
  if (params.min_pts < 1) throw ValidationError("min_pts", "must be >= 1");
}

DbscanResult dbscan(std::span<const RadarPoint> points, const DbscanParams& params) {
  validate(params);
  DbscanResult result;
  if (points.empty()) return result;

  const NeighborGrid grid(points, params.eps);
  const auto min_pts = static_cast<std::size_t>(params.min_pts);
  std::vector<int> label(points.size(), kUnvisited);
  std::vector<std::size_t> neighbors;
  std::vector<std::size_t> frontier;
  int next_label = 0;

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    grid.query(i, neighbors);
    if (neighbors.size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int c = next_label++;
    label[i] = c;
    frontier.assign(neighbors.begin(), neighbors.end());
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t j = frontier[f];
      if (label[j] == kNoise) label[j] = c;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = c;
      grid.query(j, neighbors);
      if (neighbors.size() < min_pts) continue;
      for (std::size_t k : neighbors)
        if (label[k] < 0) frontier.push_back(k);
    }
  }

  result.clusters.resize(static_cast<std::size_t>(next_label));
  for (int c = 0; c < next_label; ++c) result.clusters[static_cast<std::size_t>(c)].label = c;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] == kNoise) {
      result.noise.push_back(i);
      continue;
    }
    result.clusters[static_cast<std::size_t>(label[i])].member_indices.push_back(i);
  }
  for (auto& cl : result.clusters) {
    double sx = 0.0, sy = 0.0, sd = 0.0, maxd = 0.0;
    for (std::size_t i : cl.member_indices) {
      sx += points[i].x;
      sy += points[i].y;
      sd += points[i].doppler_mps;
      maxd = std::max(maxd, std::abs(points[i].doppler_mps));
    }
    const auto n = static_cast<double>(cl.member_indices.size());
    cl.point_count = cl.member_indices.size();
    cl.core_point = Vec2(sx / n, sy / n);
    cl.mean_doppler_mps = sd / n;
    cl.max_abs_doppler_mps = maxd;
  }
  return result;
}

std::vector<Cluster> filter_background(std::span<const Cluster> clusters, double doppler_zero_tol) {
  std::vector<Cluster> kept;
  for (const auto& c : clusters)
    if (c.max_abs_doppler_mps > doppler_zero_tol) kept.push_back(c);
  return kept;
}

}  // namespace p2pbeam
