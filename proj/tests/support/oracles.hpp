// Independent reference implementations used as test oracles. Deliberately
// brute force: no grids, no Hungarian, no shortcuts.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "p2pbeam/clustering.hpp"
#include "p2pbeam/cluster_tracking.hpp"
#include "p2pbeam/identification.hpp"
#include "p2pbeam/scenario.hpp"

namespace oracle {

using p2pbeam::Vec2;

// Quadratic DBSCAN. Clusters are the connected components of core points
// (ordered by their lowest core index); a border point goes to the earliest
// such component with a core point in reach.
inline std::vector<std::vector<std::size_t>> dbscan(const std::vector<p2pbeam::RadarPoint>& pts, double eps,
                                                    int min_pts) {
  const std::size_t n = pts.size();
  const double eps2 = eps * eps;
  auto near = [&](std::size_t i, std::size_t j) {
    const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y, dz = pts[i].z - pts[j].z;
    return dx * dx + dy * dy + dz * dz <= eps2;
  };
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) count += near(i, j) ? 1 : 0;
    core[i] = count >= min_pts;
  }
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || comp[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    comp[i] = ncomp;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < n; ++q) {
        if (core[q] && comp[q] < 0 && near(p, q)) {
          comp[q] = ncomp;
          stack.push_back(q);
        }
      }
    }
    ++ncomp;
  }
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(ncomp));
  for (std::size_t i = 0; i < n; ++i) {
    int c = comp[i];
    if (!core[i]) {
      for (std::size_t j = 0; j < n; ++j)
        if (core[j] && near(i, j) && (c < 0 || comp[j] < c)) c = comp[j];
    }
    if (c >= 0) out[static_cast<std::size_t>(c)].push_back(i);
  }
  return out;
}

struct MatchResult {
  std::vector<std::pair<int, int>> pairs;  // ascending prev label
  double cost = 0.0;
};

// Every injective map of min(|prev|, |curr|) pairs; minimum cost, ties (within
// tol) to the lexicographically smallest pair list.
inline MatchResult enumerate_matching(const std::vector<std::pair<int, Vec2>>& prev,
                                      const std::vector<std::pair<int, Vec2>>& curr, double tol = 1e-9) {
  auto p = prev;
  auto c = curr;
  auto by_label = [](const auto& a, const auto& b) { return a.first < b.first; };
  std::sort(p.begin(), p.end(), by_label);
  std::sort(c.begin(), c.end(), by_label);
  const std::size_t k = std::min(p.size(), c.size());
  std::vector<MatchResult> all;
  // Choose which prev entries participate and assign them to distinct curr entries.
  std::vector<int> pick(p.size(), 0);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(k), 1);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (pick[i]) rows.push_back(i);
    std::vector<std::size_t> cols(c.size());
    std::iota(cols.begin(), cols.end(), 0);
    std::set<std::vector<std::size_t>> seen;
    do {
      std::vector<std::size_t> head(cols.begin(), cols.begin() + static_cast<long>(k));
      if (!seen.insert(head).second) continue;
      MatchResult m;
      for (std::size_t r = 0; r < k; ++r) {
        m.pairs.emplace_back(p[rows[r]].first, c[head[r]].first);
        m.cost += (p[rows[r]].second - c[head[r]].second).norm();
      }
      all.push_back(std::move(m));
    } while (std::next_permutation(cols.begin(), cols.end()));
  } while (std::next_permutation(pick.begin(), pick.end()));
  if (all.empty()) return {};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : all) best = std::min(best, m.cost);
  const MatchResult* chosen = nullptr;
  for (const auto& m : all) {
    if (m.cost > best + tol) continue;
    if (!chosen || m.pairs < chosen->pairs) chosen = &m;
  }
  return *chosen;
}

struct IdResult {
  int label0 = -1, label1 = -1;
  double cost = 0.0;
};

inline IdResult enumerate_identification(const std::vector<p2pbeam::LabeledVelocity>& clusters,
                                         const std::array<Vec2, 2>& clients) {
  IdResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (const auto& a : clusters)
    for (const auto& b : clusters) {
      if (a.label == b.label) continue;
      const double cost = (a.velocity - clients[0]).norm() + (b.velocity - clients[1]).norm();
      if (cost < best.cost ||
          (cost == best.cost && std::make_pair(a.label, b.label) < std::make_pair(best.label0, best.label1)))
        best = {a.label, b.label, cost};
    }
  return best;
}

// Walks the path in steps of dt seconds from t = 0, moving speed * dt along the
// polyline per step after the hold.
inline Vec2 integrate_path(const p2pbeam::PathSpec& path, double t, double dt = 1e-3) {
  const auto& w = path.waypoints;
  Vec2 pos = w.front();
  std::size_t next = 1;
  double time = 0.0;
  const double moving = std::max(0.0, t - path.initial_hold_s);
  const long steps = static_cast<long>(std::floor(moving / dt));
  auto advance = [&](double dist) {
    while (dist > 0.0 && next < w.size()) {
      const Vec2 d = w[next] - pos;
      const double len = d.norm();
      if (len <= dist) {
        dist -= len;
        pos = w[next];
        ++next;
      } else {
        pos += d / len * dist;
        dist = 0.0;
      }
    }
  };
  for (long i = 0; i < steps; ++i) {
    advance(path.speed_mps * dt);
    time += dt;
  }
  advance(path.speed_mps * (moving - time));
  return pos;
}

// Nearest distance from p to the path sampled every `step` meters.
inline double sampled_path_distance(const Vec2& p, const p2pbeam::PathSpec& path, double step = 1e-3) {
  double best = std::numeric_limits<double>::infinity();
  const auto& w = path.waypoints;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const Vec2 d = w[i + 1] - w[i];
    const long n = static_cast<long>(std::ceil(d.norm() / step));
    for (long k = 0; k <= n; ++k) best = std::min(best, (w[i] + d * (static_cast<double>(k) / n) - p).norm());
  }
  return best;
}

inline std::set<std::set<std::size_t>> as_set_of_sets(const std::vector<std::vector<std::size_t>>& v) {
  std::set<std::set<std::size_t>> out;
  for (const auto& c : v) out.insert(std::set<std::size_t>(c.begin(), c.end()));
  return out;
}

// Random frames mixing dense blobs and scattered points.
inline std::vector<p2pbeam::RadarPoint> random_frame(std::mt19937_64& rng, std::size_t max_points) {
  std::uniform_int_distribution<std::size_t> total(0, max_points);
  std::uniform_int_distribution<int> blobs(0, 4);
  std::uniform_real_distribution<double> pos(-3.0, 3.0), spread(0.05, 0.4), z(0.0, 1.8);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = total(rng);
  std::vector<p2pbeam::RadarPoint> pts;
  const int nb = blobs(rng);
  std::vector<std::array<double, 4>> centers;
  for (int b = 0; b < nb; ++b) centers.push_back({pos(rng), pos(rng), z(rng), spread(rng)});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (pts.size() < n) {
    if (!centers.empty() && u(rng) < 0.8) {
      const auto& c = centers[static_cast<std::size_t>(u(rng) * static_cast<double>(centers.size())) % centers.size()];
      pts.push_back({c[0] + c[3] * g(rng), c[1] + c[3] * g(rng), c[2] + c[3] * g(rng), 0.1 * g(rng)});
    } else {
      pts.push_back({pos(rng), pos(rng), z(rng), 0.0});
    }
  }
  return pts;
}

}  // namespace oracle
