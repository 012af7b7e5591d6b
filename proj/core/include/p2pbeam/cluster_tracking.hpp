#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "p2pbeam/clustering.hpp"

namespace p2pbeam {

struct ClusterFrame {
  std::int64_t frame_index = 0;
  std::vector<Cluster> clusters;  // labels unique within the frame
  std::size_t rejected = 0;       // matched clusters dropped by the displacement threshold

  const Cluster* find(int label) const;
};

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (prev_label, curr_label), ascending prev_label
  std::vector<int> unmatched_prev;
  std::vector<int> unmatched_curr;
  double total_cost_m = 0.0;
};

struct ThresholdParams {
  double v_mean_mps = 0.5;
  double v_std_mps = 0.1;
  double k_sigma = 3.0;
};

// Hands out track labels; owned by the caller so labels stay unique across frames.
class LabelAllocator {
 public:
  int allocate() { return next_++; }
  int peek() const { return next_; }

 private:
  int next_ = 0;
};

// Minimum total core-point distance injective matching of min(|prev|, |curr|)
// pairs. Ties resolve to the lexicographically smallest (prev_label, curr_label) list.
Matching match_clusters(const ClusterFrame& prev, const ClusterFrame& curr);

// T = (v_mean + k_sigma * v_std) * frame_time_s.
double displacement_threshold(const ThresholdParams& params, double frame_time_s);

// One cluster-update step: adopt everything when prev is empty, otherwise match,
// delete pairs displaced by >= threshold_m, carry labels and displacement
// velocities over, and give unmatched current clusters fresh labels.
ClusterFrame update_clusters(const ClusterFrame& prev, std::span<const Cluster> curr_raw, double threshold_m,
                             double frame_time_s, LabelAllocator& labels, std::int64_t frame_index = 0);

}  // namespace p2pbeam
