#include "pickroute/exact_solver.hpp"

#include <algorithm>

#include "pickroute/error.hpp"

namespace pickroute {

DpTable build_dp_table(const AisleSequence& seq, bool simplified) {
  const std::size_t n = seq.size();
  if (n == 0) throw ContractViolation("build_dp_table: empty aisle sequence");
  DpTable table;
  table.cost.assign(n, {});
  table.choice.assign(n, {});
  for (auto& cells : table.cost) cells.fill(kUnreachable);
  for (auto& cells : table.choice) cells.fill(kNumActionPairs);

  for (std::size_t pos = n; pos-- > 0;) {
    const bool last = pos + 1 == n;
    for (std::size_t s = 0; s < kNumEquivalenceStates; ++s) {
      const auto state = static_cast<EquivalenceState>(s);
      const ActionMask mask = valid_action_pairs(state, seq, pos, simplified);
      for (std::size_t idx = 0; idx < kNumActionPairs; ++idx) {
        if (!mask.test(idx)) continue;
        const ActionPair pair = ActionPair::from_index(idx);
        Length total = step_cost(seq, pos, pair);
        if (!last) {
          const auto next = *transition(*transition(state, pair.vertical), pair.horizontal);
          total += table.cost[pos + 1][static_cast<std::size_t>(next)];
        }
        if (total < table.cost[pos][s]) {
          table.cost[pos][s] = total;
          table.choice[pos][s] = idx;
        }
      }
    }
  }
  return table;
}

OptimalSolution solve_optimal(const AisleSequence& seq, bool simplified) {
  const DpTable table = build_dp_table(seq, simplified);
  auto state = EquivalenceState::kInitial000C;
  const Length best = table.cost[0][static_cast<std::size_t>(state)];
  if (best == kUnreachable) throw InternalError("solve_optimal: no valid tour graph");

  std::vector<ActionPair> actions;
  actions.reserve(seq.size());
  for (std::size_t pos = 0; pos < seq.size(); ++pos) {
    const ActionPair pair = ActionPair::from_index(table.choice[pos][static_cast<std::size_t>(state)]);
    actions.push_back(pair);
    if (pos + 1 < seq.size()) state = *transition(*transition(state, pair.vertical), pair.horizontal);
  }
  OptimalSolution solution{best, replay(actions, seq)};
  if (solution.rollout.total_length != best) {
    throw InternalError("solve_optimal: replayed length differs from the DP value");
  }
  return solution;
}

OptimalSolution solve_optimal(const Instance& instance) {
  return solve_optimal(to_aisle_sequence(instance));
}

Length brute_force_tsp(const Instance& instance, std::size_t max_items) {
  instance.validate();
  const std::size_t m = instance.items.size();
  if (m > max_items) {
    throw ContractViolation("brute_force_tsp: " + std::to_string(m) + " items exceed the guard of " +
                            std::to_string(max_items));
  }
  // Node 0 is the depot, node j + 1 is item j.
  std::vector<Location> nodes{instance.depot};
  nodes.insert(nodes.end(), instance.items.begin(), instance.items.end());
  const std::size_t k = nodes.size();
  std::vector<Length> dist(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      dist[i * k + j] = shortest_path_distance(nodes[i], nodes[j], instance.geometry);
    }
  }

  const std::size_t full = (std::size_t{1} << m) - 1;
  std::vector<Length> best((full + 1) * m, kUnreachable);
  auto at = [&](std::size_t subset, std::size_t last) -> Length& { return best[subset * m + last]; };
  for (std::size_t j = 0; j < m; ++j) at(std::size_t{1} << j, j) = dist[j + 1];

  for (std::size_t subset = 1; subset <= full; ++subset) {
    for (std::size_t last = 0; last < m; ++last) {
      if (!(subset >> last & 1U)) continue;
      const Length base = at(subset, last);
      if (base == kUnreachable) continue;
      for (std::size_t next = 0; next < m; ++next) {
        if (subset >> next & 1U) continue;
        Length& cell = at(subset | (std::size_t{1} << next), next);
        cell = std::min(cell, base + dist[(last + 1) * k + next + 1]);
      }
    }
  }
  Length answer = kUnreachable;
  for (std::size_t last = 0; last < m; ++last) {
    answer = std::min(answer, at(full, last) + dist[(last + 1) * k]);
  }
  return answer;
}

}  // namespace pickroute
