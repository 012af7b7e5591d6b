#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "p2pbeam/geometry.hpp"

namespace p2pbeam {

struct IdentificationGate {
  std::int64_t frame_index = 0;
  bool error_flag = false;  // a client was lost, out of view, or occluded
};

struct IdentificationPolicy {
  std::int64_t first_frame = 2;
  std::int64_t last_frame = 5;
  // Only frames first_frame and last_frame exactly, instead of the inclusive window.
  bool endpoints_only = false;
};

struct LabeledVelocity {
  int label = 0;
  Vec2 velocity = Vec2::Zero();
};

// bound_labels[i] is the cluster label of client i.
struct ClientBinding {
  std::array<int, 2> bound_labels{-1, -1};
  std::int64_t bound_at_frame = 0;
  double cost = 0.0;
};

bool should_identify(const IdentificationGate& gate, const IdentificationPolicy& policy = {});

// Ordered pair of distinct labels minimising sum_i |v_cluster(label_i) - v_client(i)|.
// Equal costs resolve to the lexicographically smallest (label_0, label_1).
// Throws IdentificationError with fewer than two clusters.
ClientBinding identify_clients(std::span<const LabeledVelocity> cluster_velocities,
                               const std::array<Vec2, 2>& client_velocities, std::int64_t frame_index = 0);

}  // namespace p2pbeam
