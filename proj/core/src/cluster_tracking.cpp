#include "p2pbeam/cluster_tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "p2pbeam/assignment.hpp"
#include "p2pbeam/errors.hpp"

namespace p2pbeam {

namespace {

std::vector<std::size_t> order_by_label(const std::vector<Cluster>& clusters) {
  std::vector<std::size_t> idx(clusters.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return clusters[a].label < clusters[b].label; });
  return idx;
}

}  // namespace

const Cluster* ClusterFrame::find(int label) const {
  for (const auto& c : clusters)
    if (c.label == label) return &c;
  return nullptr;
}

Matching match_clusters(const ClusterFrame& prev, const ClusterFrame& curr) {
  const auto po = order_by_label(prev.clusters);
  const auto co = order_by_label(curr.clusters);
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(po.size()), static_cast<Eigen::Index>(co.size()));
  for (std::size_t i = 0; i < po.size(); ++i)
    for (std::size_t j = 0; j < co.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (curr.clusters[co[j]].core_point - prev.clusters[po[i]].core_point).norm();

  const Assignment a = solve_assignment_lexicographic(cost);
  Matching m;
  std::vector<char> curr_used(co.size(), 0);
  for (std::size_t i = 0; i < po.size(); ++i) {
    const int j = a.row_to_col[i];
    const int prev_label = prev.clusters[po[i]].label;
    if (j < 0) {
      m.unmatched_prev.push_back(prev_label);
      continue;
    }
    curr_used[static_cast<std::size_t>(j)] = 1;
    m.pairs.emplace_back(prev_label, curr.clusters[co[static_cast<std::size_t>(j)]].label);
  }
  for (std::size_t j = 0; j < co.size(); ++j)
    if (!curr_used[j]) m.unmatched_curr.push_back(curr.clusters[co[j]].label);
  m.total_cost_m = a.cost;
  return m;
}

double displacement_threshold(const ThresholdParams& p, double frame_time_s) {
  if (!(frame_time_s > 0.0)) throw ContractError("frame_time_s must be > 0");
  if (!(p.v_std_mps >= 0.0)) throw ValidationError("v_std_mps", "must be >= 0");
  if (!(p.k_sigma > 0.0)) throw ValidationError("k_sigma", "must be > 0");
  return (p.v_mean_mps + p.k_sigma * p.v_std_mps) * frame_time_s;
}

ClusterFrame update_clusters(const ClusterFrame& prev, std::span<const Cluster> curr_raw, double threshold_m,
                             double frame_time_s, LabelAllocator& labels, std::int64_t frame_index) {
  if (!(frame_time_s > 0.0)) throw ContractError("frame_time_s must be > 0");
  ClusterFrame out;
  out.frame_index = frame_index;

  ClusterFrame curr;
  curr.clusters.assign(curr_raw.begin(), curr_raw.end());
  for (auto& c : curr.clusters) c.velocity_mps.reset();

  if (prev.clusters.empty()) {
    for (auto c : curr.clusters) {
      c.label = labels.allocate();
      out.clusters.push_back(std::move(c));
    }
    return out;
  }

  const Matching m = match_clusters(prev, curr);
  for (const auto& [pl, cl] : m.pairs) {
    const Cluster& p = *prev.find(pl);
    Cluster c = *curr.find(cl);
    const Vec2 d = c.core_point - p.core_point;
    if (d.norm() >= threshold_m) {
      ++out.rejected;
      continue;
    }
    c.label = pl;
    c.velocity_mps = d / frame_time_s;
    out.clusters.push_back(std::move(c));
  }
  // Fresh labels in the raw (scan) order of the unmatched clusters.
  for (const auto& raw : curr.clusters) {
    if (std::find(m.unmatched_curr.begin(), m.unmatched_curr.end(), raw.label) == m.unmatched_curr.end())
      continue;
    Cluster c = raw;
    c.label = labels.allocate();
    out.clusters.push_back(std::move(c));
  }
  return out;
}

}  // namespace p2pbeam
