#include "pickroute/heuristics.hpp"

#include <algorithm>
#include <vector>

#include "pickroute/error.hpp"

namespace pickroute {
namespace {

using V = VerticalAction;
using H = HorizontalAction;

// Index of the first pick aisle. A depot-only first aisle is skipped along
// the front cross-aisle when later aisles hold picks.
std::size_t first_pick_aisle(const AisleSequence& seq, std::vector<ActionPair>& actions) {
  if (seq.size() > 1 && seq[0].pick_count() == 0) {
    actions.push_back({V::kBottom, H::kH02});
    return 1;
  }
  return 0;
}

}  // namespace

std::string_view to_string(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::kSShape: return "sshape";
    case HeuristicKind::kReturn: return "return";
    case HeuristicKind::kLargestGap: return "largestgap";
    case HeuristicKind::kComposite: return "composite";
  }
  return "?";
}

HeuristicKind parse_heuristic(std::string_view name) {
  for (auto kind : {HeuristicKind::kSShape, HeuristicKind::kReturn, HeuristicKind::kLargestGap,
                    HeuristicKind::kComposite}) {
    if (to_string(kind) == name) return kind;
  }
  throw ContractViolation("unknown heuristic '" + std::string(name) + "'");
}

Rollout s_shape(const AisleSequence& seq) {
  std::vector<ActionPair> actions;
  const std::size_t start = first_pick_aisle(seq, actions);
  const std::size_t picks = seq.size() - start;
  for (std::size_t t = 0; t < picks; ++t) {
    const bool last = start + t + 1 == seq.size();
    const V vertical = (picks % 2 == 1 && t + 1 == picks) ? V::kBottom : V::kOnePass;
    // Within a pair of traversed aisles the picker crosses at the back; between
    // pairs the front cross-aisle is walked out and back.
    const H horizontal = (last || t % 2 == 0) ? H::kH11 : H::kH02;
    actions.push_back({vertical, horizontal});
  }
  return replay(actions, seq);
}

Rollout return_policy(const AisleSequence& seq) {
  std::vector<ActionPair> actions;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    actions.push_back({V::kBottom, i + 1 == seq.size() ? H::kH11 : H::kH02});
  }
  return replay(actions, seq);
}

Rollout largest_gap(const AisleSequence& seq) {
  std::vector<ActionPair> actions;
  const std::size_t start = first_pick_aisle(seq, actions);
  const std::size_t last = seq.size() - 1;
  if (start == last) {
    actions.push_back({V::kBottom, H::kH11});
    return replay(actions, seq);
  }
  const Length h = seq.aisle_length();
  actions.push_back({V::kOnePass, H::kH11});
  for (std::size_t i = start + 1; i < last; ++i) {
    const auto& ys = seq[i].ys;
    V best = V::kBottom;
    Length best_cost = vertical_cost(V::kBottom, ys, h);
    for (V candidate : {V::kTop, V::kGap}) {
      if (candidate == V::kGap && ys.size() < 2) continue;
      const Length cost = vertical_cost(candidate, ys, h);
      if (cost < best_cost) {
        best = candidate;
        best_cost = cost;
      }
    }
    actions.push_back({best, H::kH11});
  }
  actions.push_back({V::kOnePass, H::kH11});
  return replay(actions, seq);
}

Rollout composite(const AisleSequence& seq) {
  const Length h = seq.aisle_length();
  const std::size_t n = seq.size();
  // Cost of serving the deepest pick of an aisle when entered from one side,
  // with the option of traversing instead; the last aisle must finish at the
  // front.
  auto serve_cost = [&](std::size_t i, bool at_front) -> Length {
    const auto& ys = seq[i].ys;
    const Length back_out = vertical_cost(at_front ? V::kBottom : V::kTop, ys, h);
    if (i + 1 == n) return at_front ? back_out : h;
    return std::min(back_out, h);
  };

  std::vector<ActionPair> actions;
  bool at_front = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ys = seq[i].ys;
    const V stay = at_front ? V::kBottom : V::kTop;
    V vertical;
    if (i + 1 == n) {
      vertical = at_front ? V::kBottom : V::kOnePass;
    } else {
      const Length stay_score = vertical_cost(stay, ys, h) + serve_cost(i + 1, at_front);
      const Length cross_score = h + serve_cost(i + 1, !at_front);
      vertical = cross_score < stay_score ? V::kOnePass : stay;
    }
    if (vertical == V::kOnePass) at_front = !at_front;
    // Back-side travel pairs with the single front edge of the final walk
    // home (11); front-side travel doubles the front edge (02).
    const H horizontal = (i + 1 == n || !at_front) ? H::kH11 : H::kH02;
    actions.push_back({vertical, horizontal});
  }
  return replay(actions, seq);
}

Rollout run_heuristic(HeuristicKind kind, const AisleSequence& seq) {
  switch (kind) {
    case HeuristicKind::kSShape: return s_shape(seq);
    case HeuristicKind::kReturn: return return_policy(seq);
    case HeuristicKind::kLargestGap: return largest_gap(seq);
    case HeuristicKind::kComposite: return composite(seq);
  }
  throw ContractViolation("unknown heuristic kind");
}

}  // namespace pickroute
