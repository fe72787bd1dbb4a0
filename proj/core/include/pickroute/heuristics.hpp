#pragma once

#include <string>
#include <string_view>

#include "pickroute/tour_graph.hpp"

namespace pickroute {

enum class HeuristicKind { kSShape, kReturn, kLargestGap, kComposite };

std::string_view to_string(HeuristicKind kind);
/// Accepts "sshape", "return", "largestgap", "composite".
HeuristicKind parse_heuristic(std::string_view name);

// Every heuristic is expressed as an action-pair sequence and replayed through
// the tour-graph environment, so the returned rollout is valid by
// construction and its length is audited by the same cost model as the
// optimal solver. A depot-only first aisle is crossed along the front
// (bottom, 02) and is not treated as a pick aisle.

/// Traverses every pick aisle; with an odd number of pick aisles the last is
/// served from the front.
Rollout s_shape(const AisleSequence& seq);

/// Serves every aisle from the front cross-aisle.
Rollout return_policy(const AisleSequence& seq);

/// Traverses the first and last pick aisles; in between, each aisle is served
/// from whichever sides leave the largest stretch untravelled (ties prefer
/// bottom, then top, then gap).
Rollout largest_gap(const AisleSequence& seq);

/// Greedy traverse-or-return choice per aisle with a one-aisle look-ahead to
/// the next aisle's farthest pick.
Rollout composite(const AisleSequence& seq);

Rollout run_heuristic(HeuristicKind kind, const AisleSequence& seq);

}  // namespace pickroute
