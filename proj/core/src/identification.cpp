#include "p2pbeam/identification.hpp"

#include <limits>
#include <string>
#include <utility>

#include "p2pbeam/errors.hpp"

namespace p2pbeam {

bool should_identify(const IdentificationGate& gate, const IdentificationPolicy& policy) {
  if (gate.error_flag) return true;
  if (policy.endpoints_only) return gate.frame_index == policy.first_frame || gate.frame_index == policy.last_frame;
  return gate.frame_index >= policy.first_frame && gate.frame_index <= policy.last_frame;
}

ClientBinding identify_clients(std::span<const LabeledVelocity> clusters, const std::array<Vec2, 2>& clients,
                               std::int64_t frame_index) {
  if (clusters.size() < 2)
    throw IdentificationError("identification needs >= 2 velocity-bearing clusters, got " +
                              std::to_string(clusters.size()));
  ClientBinding best;
  best.bound_at_frame = frame_index;
  best.cost = std::numeric_limits<double>::infinity();
  for (const auto& a : clusters) {
    const double ca = (a.velocity - clients[0]).norm();
    for (const auto& b : clusters) {
      if (a.label == b.label) continue;
      const double cost = ca + (b.velocity - clients[1]).norm();
      const bool better = cost < best.cost ||
                          (cost == best.cost && std::pair(a.label, b.label) <
                                                    std::pair(best.bound_labels[0], best.bound_labels[1]));
      if (better) {
        best.cost = cost;
        best.bound_labels = {a.label, b.label};
      }
    }
  }
  return best;
}

}  // namespace p2pbeam
